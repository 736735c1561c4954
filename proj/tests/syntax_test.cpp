#include "tores/syntax.hpp"

#include <gtest/gtest.h>

namespace tores {
namespace {

IndexSubst subst1(IdxPtr m, const char* u) {
  IndexSubst th;
  th.entries.push_back({std::move(m), u});
  return th;
}

// mu V : Pi n:nat. *. Lam n. (n == 0) + Sig m:nat. ((n == suc m) * (unit * V m))
TypePtr vec_mu(const char* tv = "V", const char* n = "n", const char* m = "m") {
  TypePtr elem = ty_unit();
  TypePtr nil = ty_eq(idx_var(n), idx_zero());
  TypePtr cons = ty_sigma(m, ty_prod(ty_eq(idx_var(n), idx_suc(idx_var(m))),
                                     ty_prod(elem, ty_app(ty_var(tv), idx_var(m)))));
  return ty_mu(tv, kind_pi("n", kind_star()), ty_lam(n, ty_sum(nil, cons)));
}

TEST(Kinds, ArityAndEquality) {
  KindPtr k2 = kind_pi("m", kind_pi("n", kind_star()));
  EXPECT_EQ(kind_arity(kind_star()), 0u);
  EXPECT_EQ(kind_arity(k2), 2u);
  EXPECT_TRUE(kind_alpha_eq(k2, kind_pi("a", kind_pi("b", kind_star()))));
  EXPECT_FALSE(kind_alpha_eq(k2, kind_pi("a", kind_star())));
  EXPECT_EQ(kind_binders(k2).size(), 2u);
}

TEST(TypeOps, SpineHeadForm) {
  TypePtr t = ty_app(ty_app(ty_var("V"), idx_zero()), idx_suc(idx_var("u")));
  auto [head, args] = spine_head_form(t);
  ASSERT_TRUE(std::holds_alternative<TyVar>(head->node));
  ASSERT_EQ(args.size(), 2u);
  EXPECT_TRUE(idx_eq(args[0], idx_zero()));
  EXPECT_TRUE(idx_eq(args[1], idx_suc(idx_var("u"))));
  // non-application types decompose into themselves and the empty spine
  auto [h2, a2] = spine_head_form(ty_unit());
  EXPECT_TRUE(std::holds_alternative<TyUnit>(h2->node));
  EXPECT_TRUE(a2.empty());
  EXPECT_TRUE(type_alpha_eq(ty_app_spine(head, args), t));
}

TEST(TypeAlphaEq, BoundNamesIrrelevant) {
  EXPECT_TRUE(type_alpha_eq(vec_mu("V", "n", "m"), vec_mu("W", "k", "j")));
  EXPECT_FALSE(type_alpha_eq(vec_mu(), ty_unit()));
  // free variables still compare by name
  EXPECT_FALSE(type_alpha_eq(ty_var("X"), ty_var("Y")));
  EXPECT_TRUE(type_alpha_eq(ty_sigma("a", ty_eq(idx_var("a"), idx_var("w"))),
                            ty_sigma("b", ty_eq(idx_var("b"), idx_var("w")))));
  EXPECT_FALSE(type_alpha_eq(ty_sigma("a", ty_eq(idx_var("a"), idx_var("w"))),
                             ty_sigma("b", ty_eq(idx_var("b"), idx_var("v")))));
  // binder structure matters: Sig a. (a == a) is not Sig a. (a == b)
  EXPECT_FALSE(type_alpha_eq(ty_sigma("a", ty_eq(idx_var("a"), idx_var("a"))),
                             ty_sigma("b", ty_eq(idx_var("b"), idx_var("a")))));
  // arrow binder spines pair up positionally
  SortSpine s1, s2;
  s1.items = {{"a", Sort::Nat}, {"b", Sort::Nat}};
  s2.items = {{"x", Sort::Nat}, {"y", Sort::Nat}};
  EXPECT_TRUE(type_alpha_eq(ty_arrow(s1, ty_eq(idx_var("a"), idx_var("b")), ty_unit()),
                            ty_arrow(s2, ty_eq(idx_var("x"), idx_var("y")), ty_unit())));
  EXPECT_FALSE(type_alpha_eq(ty_arrow(s1, ty_eq(idx_var("a"), idx_var("b")), ty_unit()),
                             ty_arrow(s2, ty_eq(idx_var("y"), idx_var("x")), ty_unit())));
}

TEST(TypeSubst, IndexSubstitutionBasics) {
  // (V u * (u == 0))[suc 0/u]
  TypePtr t = ty_prod(ty_app(ty_var("V"), idx_var("u")), ty_eq(idx_var("u"), idx_zero()));
  TypePtr r = type_apply_isubst(t, subst1(idx_nat(1), "u"));
  EXPECT_TRUE(type_alpha_eq(
      r, ty_prod(ty_app(ty_var("V"), idx_nat(1)), ty_eq(idx_nat(1), idx_zero()))));
  // shadowed binders block the substitution
  TypePtr sh = ty_sigma("u", ty_eq(idx_var("u"), idx_zero()));
  EXPECT_TRUE(type_alpha_eq(type_apply_isubst(sh, subst1(idx_nat(1), "u")), sh));
}

TEST(TypeSubst, CaptureAvoidance) {
  // (Sig m. v == m)[suc m/v]: the binder must move out of the way
  TypePtr t = ty_sigma("m", ty_eq(idx_var("v"), idx_var("m")));
  TypePtr r = type_apply_isubst(t, subst1(idx_suc(idx_var("m")), "v"));
  EXPECT_TRUE(type_alpha_eq(r, ty_sigma("k", ty_eq(idx_suc(idx_var("m")), idx_var("k")))));
  const TySigma& sg = std::get<TySigma>(r->node);
  EXPECT_NE(sg.name, "m");

  // arrow binders capture the same way
  SortSpine sp;
  sp.items = {{"m", Sort::Nat}};
  TypePtr ar = ty_arrow(sp, ty_eq(idx_var("v"), idx_var("m")), ty_eq(idx_var("m"), idx_var("m")));
  TypePtr ra = type_apply_isubst(ar, subst1(idx_suc(idx_var("m")), "v"));
  SortSpine spk;
  spk.items = {{"k", Sort::Nat}};
  EXPECT_TRUE(type_alpha_eq(ra, ty_arrow(spk, ty_eq(idx_suc(idx_var("m")), idx_var("k")),
                                         ty_eq(idx_var("k"), idx_var("k")))));
}

TEST(TypeSubst, TypeVariableSubstitution) {
  // (X * mu X:*. X)[1/X] only hits the free occurrence
  TypePtr t = ty_prod(ty_var("X"), ty_mu("X", kind_star(), ty_var("X")));
  TypePtr r = type_subst_tvar(t, "X", ty_unit());
  EXPECT_TRUE(type_alpha_eq(r, ty_prod(ty_unit(), ty_mu("X", kind_star(), ty_var("X")))));

  // index binder capturing a free index variable of the replacement
  TypePtr u = ty_sigma("n", ty_app(ty_var("X"), idx_var("n")));
  TypePtr s = ty_eq(idx_var("n"), idx_zero());  // n free here
  TypePtr ru = type_subst_tvar(u, "X", s);
  // expected: Sig n1. ((n == 0) n1), with the binder renamed
  const TySigma& sg = std::get<TySigma>(ru->node);
  EXPECT_NE(sg.name, "n");
  EXPECT_TRUE(type_alpha_eq(
      ru, ty_sigma("k", ty_app(ty_eq(idx_var("n"), idx_zero()), idx_var("k")))));

  // type binder capturing a free type variable of the replacement
  TypePtr v = ty_mu("Y", kind_star(), ty_prod(ty_var("X"), ty_var("Y")));
  TypePtr rv = type_subst_tvar(v, "X", ty_var("Y"));
  const TyMu& mu = std::get<TyMu>(rv->node);
  EXPECT_NE(mu.name, "Y");
  EXPECT_TRUE(type_alpha_eq(rv, ty_mu("Z", kind_star(), ty_prod(ty_var("Y"), ty_var("Z")))));
}

TEST(TypeSubst, UnfoldFixpoint) {
  TypePtr vec = vec_mu();
  const TyMu& mu = std::get<TyMu>(vec->node);
  std::optional<TypePtr> unfolded =
      unfold_fixpoint(mu.name, mu.body, {idx_suc(idx_zero())}, vec);
  ASSERT_TRUE(unfolded.has_value());
  TypePtr expect = ty_sum(
      ty_eq(idx_nat(1), idx_zero()),
      ty_sigma("m", ty_prod(ty_eq(idx_nat(1), idx_suc(idx_var("m"))),
                            ty_prod(ty_unit(), ty_app(vec_mu(), idx_var("m"))))));
  EXPECT_TRUE(type_alpha_eq(*unfolded, expect));
  // not enough lambda binders for the spine
  EXPECT_FALSE(unfold_fixpoint(mu.name, mu.body, {idx_zero(), idx_zero()}, vec).has_value());
}

TEST(TypeOps, FreeVariables) {
  TypePtr t = ty_sigma("m", ty_prod(ty_eq(idx_var("n"), idx_var("m")),
                                    ty_app(ty_var("V"), idx_var("k"))));
  std::vector<std::string> fiv = ty_free_ivars(t);
  EXPECT_EQ(fiv, (std::vector<std::string>{"n", "k"}));
  EXPECT_EQ(ty_free_tvars(t), (std::vector<std::string>{"V"}));
  EXPECT_TRUE(ty_free_tvars(vec_mu()).empty());
  EXPECT_TRUE(ty_free_ivars(vec_mu()).empty());
}

TEST(TermAlphaEq, BindersAndLeaves) {
  TermPtr a = tm_lam({"u"}, "x", tm_pack(idx_var("u"), tm_var("x")));
  TermPtr b = tm_lam({"v"}, "y", tm_pack(idx_var("v"), tm_var("y")));
  EXPECT_TRUE(term_alpha_eq(a, b));
  TermPtr c = tm_lam({"v"}, "y", tm_pack(idx_zero(), tm_var("y")));
  EXPECT_FALSE(term_alpha_eq(a, c));

  EXPECT_TRUE(term_alpha_eq(tm_rec("f", tm_var("f")), tm_rec("g", tm_var("g"))));
  EXPECT_FALSE(term_alpha_eq(tm_rec("f", tm_var("f")), tm_corec("f", tm_var("f"))));

  // annotation types participate in the comparison
  EXPECT_FALSE(term_alpha_eq(tm_annot(tm_unit(), ty_unit()),
                             tm_annot(tm_unit(), ty_prod(ty_unit(), ty_unit()))));

  // case binders rename independently per branch
  TermPtr ca = tm_case(tm_var("s"), "x", tm_var("x"), "y", tm_var("y"));
  TermPtr cb = tm_case(tm_var("s"), "p", tm_var("p"), "q", tm_var("q"));
  EXPECT_TRUE(term_alpha_eq(ca, cb));
}

TEST(TermAlphaEq, EqElimUnifiers) {
  // eqelim q with (k:nat | [suc k/m, k/n]) in pack [k] <>, under outer m, n
  auto mk = [](const char* k) {
    IndexCtx d;
    d.items.push_back({k, Sort::Nat});
    IndexSubst th;
    th.entries.push_back({idx_suc(idx_var(k)), "m"});
    th.entries.push_back({idx_var(k), "n"});
    return tm_eqelim_with(tm_var("q"), d, th, tm_pack(idx_var(k), tm_unit()));
  };
  EXPECT_TRUE(term_alpha_eq(mk("k"), mk("r")));

  // changing a range term breaks it
  IndexCtx d;
  d.items.push_back({"k", Sort::Nat});
  IndexSubst th;
  th.entries.push_back({idx_var("k"), "m"});
  th.entries.push_back({idx_var("k"), "n"});
  TermPtr other = tm_eqelim_with(tm_var("q"), d, th, tm_pack(idx_var("k"), tm_unit()));
  EXPECT_FALSE(term_alpha_eq(mk("k"), other));

  // domain labels refer outward, so they must agree exactly
  IndexSubst th2;
  th2.entries.push_back({idx_suc(idx_var("k")), "n"});
  th2.entries.push_back({idx_var("k"), "m"});
  TermPtr swapped = tm_eqelim_with(tm_var("q"), d, th2, tm_pack(idx_var("k"), tm_unit()));
  EXPECT_FALSE(term_alpha_eq(mk("k"), swapped));

  // explicit and omitted unifiers are distinct shapes
  EXPECT_FALSE(term_alpha_eq(mk("k"), tm_eqelim(tm_var("q"), tm_pack(idx_var("k"), tm_unit()))));
}

TEST(Naming, FreshNames) {
  auto taken = [](std::initializer_list<const char*> names) {
    std::vector<std::string> v(names.begin(), names.end());
    return [v](const std::string& c) { return std::find(v.begin(), v.end(), c) != v.end(); };
  };
  EXPECT_EQ(fresh_name("u", taken({})), "u1");
  EXPECT_EQ(fresh_name("u", taken({"u1", "u2"})), "u3");
  // digit suffixes restart from the stem
  EXPECT_EQ(fresh_name("u7", taken({"u1"})), "u2");
}

}  // namespace
}  // namespace tores
