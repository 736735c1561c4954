#include "tores/index.hpp"

#include <gtest/gtest.h>

#include "test_rng.hpp"

namespace tores {
namespace {

using testing::enumerate_groundings;
using testing::random_grounding;
using testing::random_ictx;
using testing::random_idx;
using testing::random_subst;
using testing::Rng;

IndexCtx ctx(std::initializer_list<const char*> names) {
  IndexCtx d;
  for (const char* n : names) d.items.push_back({n, Sort::Nat});
  return d;
}

IndexSubst subst(std::initializer_list<std::pair<IdxPtr, const char*>> entries) {
  IndexSubst th;
  for (const auto& [m, u] : entries) th.entries.push_back({m, u});
  return th;
}

TEST(IndexTerm, CheckAndEquality) {
  IndexCtx d = ctx({"u"});
  EXPECT_TRUE(idx_check(d, idx_suc(idx_var("u"))));
  EXPECT_FALSE(idx_check(d, idx_var("v")));
  EXPECT_TRUE(idx_check({}, idx_nat(3)));
  EXPECT_TRUE(idx_eq(idx_nat(2), idx_suc(idx_suc(idx_zero()))));
  EXPECT_FALSE(idx_eq(idx_nat(2), idx_nat(3)));
  EXPECT_FALSE(idx_eq(idx_var("u"), idx_var("v")));
  EXPECT_TRUE(idx_ground(idx_nat(4)));
  EXPECT_FALSE(idx_ground(idx_suc(idx_var("u"))));
}

TEST(IndexTerm, Show) {
  EXPECT_EQ(show_idx(idx_nat(0)), "0");
  EXPECT_EQ(show_idx(idx_suc(idx_suc(idx_var("u")))), "suc (suc u)");
  EXPECT_EQ(show_ictx(ctx({"u", "v"})), "u:nat, v:nat");
  EXPECT_EQ(show_subst(subst({{idx_zero(), "u"}, {idx_var("v"), "w"}})), "[0/u, v/w]");
}

TEST(IndexSubstOps, ApplyComposeIdentity) {
  // suc u under [0/u]
  EXPECT_TRUE(idx_eq(subst_apply(idx_suc(idx_var("u")), subst({{idx_zero(), "u"}})), idx_nat(1)));
  // variables outside the domain stay put
  EXPECT_TRUE(idx_eq(subst_apply(idx_var("w"), subst({{idx_zero(), "u"}})), idx_var("w")));

  // [v/u][0/v] keeps the lower layer and rewrites the upper one
  IndexSubst c = subst_compose(subst({{idx_var("v"), "u"}}), subst({{idx_zero(), "v"}}));
  EXPECT_TRUE(subst_eq(c, subst({{idx_zero(), "v"}, {idx_zero(), "u"}})));

  EXPECT_TRUE(subst_eq(subst_compose({}, subst({{idx_zero(), "v"}})), subst({{idx_zero(), "v"}})));
  EXPECT_TRUE(subst_eq(subst_compose(subst({{idx_zero(), "u"}}), {}), subst({{idx_zero(), "u"}})));

  IndexCtx d = ctx({"u", "v"});
  EXPECT_TRUE(subst_check(d, id_subst(d), d));
  EXPECT_TRUE(subst_check({}, subst({{idx_nat(2), "u"}, {idx_nat(0), "v"}}), d));
  // wrong positional order is rejected
  EXPECT_FALSE(subst_check({}, subst({{idx_nat(0), "v"}, {idx_nat(2), "u"}}), d));
}

TEST(IndexSubstOps, ApplyHomomorphicOverCompose) {
  Rng rng(20260815);
  for (int i = 0; i < 2000; ++i) {
    IndexCtx d0 = random_ictx(rng, 3, "a");
    IndexCtx d1 = random_ictx(rng, 3, "b");
    IndexCtx d2 = random_ictx(rng, 3, "c");
    IndexSubst th1 = random_subst(rng, d0, d1, 3);
    IndexSubst th2 = random_subst(rng, d1, d2, 3);
    IdxPtr m = random_idx(rng, d0, 4);
    IdxPtr lhs = subst_apply(m, subst_compose(th1, th2));
    IdxPtr rhs = subst_apply(subst_apply(m, th1), th2);
    ASSERT_TRUE(idx_eq(lhs, rhs)) << show_idx(m) << " via " << show_subst(th1) << " then "
                                  << show_subst(th2);
  }
}

TEST(IndexSubstOps, ApplyPreservesTyping) {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    IndexCtx dom = random_ictx(rng, 3, "a");
    IndexCtx rng_ctx = random_ictx(rng, 3, "b");
    IndexSubst th = random_subst(rng, dom, rng_ctx, 3);
    IdxPtr m = random_idx(rng, dom, 4);
    ASSERT_TRUE(subst_check(rng_ctx, th, dom));
    ASSERT_TRUE(idx_check(rng_ctx, subst_apply(m, th)));
  }
}

TEST(IndexSpine, CheckAndSubst) {
  IndexCtx d = ctx({"u"});
  SortSpine sp;
  sp.items = {{"m", Sort::Nat}, {"n", Sort::Nat}};
  TermSpine args = {idx_zero(), idx_suc(idx_var("u"))};
  EXPECT_TRUE(spine_check(d, args, sp));
  EXPECT_FALSE(spine_check(d, {idx_zero()}, sp));
  EXPECT_FALSE(spine_check({}, args, sp));  // u unbound
  IndexSubst th = spine_subst(sp, args);
  EXPECT_TRUE(subst_eq(th, subst({{idx_zero(), "m"}, {idx_suc(idx_var("u")), "n"}})));
  EXPECT_TRUE(spine_wf(sp, d));
  SortSpine dup;
  dup.items = {{"m", Sort::Nat}, {"m", Sort::Nat}};
  EXPECT_FALSE(spine_wf(dup, d));
  SortSpine shadow;
  shadow.items = {{"u", Sort::Nat}};
  EXPECT_FALSE(spine_wf(shadow, d));
}

TEST(IndexUnify, PinnedExamples) {
  // suc u against suc 0 instantiates u
  {
    UnifyResult r = unify(ctx({"u"}), idx_suc(idx_var("u")), idx_nat(1));
    ASSERT_FALSE(unify_clashed(r));
    const Mgu& g = std::get<Mgu>(r);
    EXPECT_TRUE(g.ctx.empty());
    EXPECT_TRUE(subst_eq(g.subst, subst({{idx_zero(), "u"}})));
  }
  // ground identical terms unify with the identity
  {
    UnifyResult r = unify({}, idx_zero(), idx_zero());
    ASSERT_FALSE(unify_clashed(r));
    EXPECT_TRUE(std::get<Mgu>(r).subst.empty());
  }
  // occurs check: u against suc u
  EXPECT_TRUE(unify_clashed(unify(ctx({"u"}), idx_var("u"), idx_suc(idx_var("u")))));
  // constructor clash
  EXPECT_TRUE(unify_clashed(unify({}, idx_zero(), idx_nat(1))));
  EXPECT_TRUE(unify_clashed(unify(ctx({"u"}), idx_suc(idx_var("u")), idx_zero())));
  // suc u against suc (suc v): u goes to suc v, v survives
  {
    UnifyResult r = unify(ctx({"u", "v"}), idx_suc(idx_var("u")), idx_suc(idx_suc(idx_var("v"))));
    ASSERT_FALSE(unify_clashed(r));
    const Mgu& g = std::get<Mgu>(r);
    EXPECT_TRUE(ictx_eq(g.ctx, ctx({"v"})));
    EXPECT_TRUE(subst_eq(g.subst, subst({{idx_suc(idx_var("v")), "u"}, {idx_var("v"), "v"}})));
  }
  // same variable on both sides is the identity, not a clash
  {
    UnifyResult r = unify(ctx({"u"}), idx_var("u"), idx_var("u"));
    ASSERT_FALSE(unify_clashed(r));
    EXPECT_TRUE(ictx_eq(std::get<Mgu>(r).ctx, ctx({"u"})));
  }
}

TEST(IndexUnify, SoundAndMostGeneral) {
  Rng rng(42);
  for (int i = 0; i < 4000; ++i) {
    IndexCtx d = random_ictx(rng, 3);
    IdxPtr m = random_idx(rng, d, 5);
    IdxPtr n = random_idx(rng, d, 5);
    UnifyResult r = unify(d, m, n);
    if (unify_clashed(r)) continue;
    const Mgu& g = std::get<Mgu>(r);
    // the unifier really unifies and is typed by the surviving context
    ASSERT_TRUE(subst_check(g.ctx, g.subst, d)) << show_idx(m) << " vs " << show_idx(n);
    ASSERT_TRUE(idx_eq(subst_apply(m, g.subst), subst_apply(n, g.subst)))
        << show_idx(m) << " vs " << show_idx(n) << " via " << show_subst(g.subst);
    // the surviving context is a subsequence of the input context
    size_t j = 0;
    for (const IdxBinding& b : d.items)
      if (j < g.ctx.items.size() && g.ctx.items[j].name == b.name) ++j;
    ASSERT_EQ(j, g.ctx.items.size());
  }
}

// Bounded-ground completeness: every ground unifier small enough to enumerate
// factors through the computed unifier, and clashes admit no ground unifier.
TEST(IndexUnify, CompleteAgainstGroundEnumeration) {
  Rng rng(43);
  for (int i = 0; i < 400; ++i) {
    IndexCtx d = random_ictx(rng, 2);
    IdxPtr m = random_idx(rng, d, 4);
    IdxPtr n = random_idx(rng, d, 4);
    UnifyResult r = unify(d, m, n);
    for (const IndexSubst& th : enumerate_groundings(d, 5)) {
      bool unifies = idx_eq(subst_apply(m, th), subst_apply(n, th));
      if (unify_clashed(r)) {
        ASSERT_FALSE(unifies) << show_idx(m) << " vs " << show_idx(n) << " at " << show_subst(th);
        continue;
      }
      if (!unifies) continue;
      const Mgu& g = std::get<Mgu>(r);
      MatchResult f = match_subst(g.ctx, g.subst, th);
      ASSERT_FALSE(match_failed(f)) << show_subst(g.subst) << " vs " << show_subst(th);
      const Matched& mt = std::get<Matched>(f);
      ASSERT_TRUE(mt.ctx.empty());
      ASSERT_TRUE(subst_eq(subst_compose(g.subst, mt.subst), th))
          << show_subst(g.subst) << " o " << show_subst(mt.subst) << " != " << show_subst(th);
    }
  }
}

TEST(IndexUnify, Deterministic) {
  Rng rng(44);
  for (int i = 0; i < 2000; ++i) {
    IndexCtx d = random_ictx(rng, 3);
    IdxPtr m = random_idx(rng, d, 5);
    IdxPtr n = random_idx(rng, d, 5);
    UnifyResult a = unify(d, m, n);
    UnifyResult b = unify(d, m, n);
    ASSERT_EQ(unify_clashed(a), unify_clashed(b));
    if (!unify_clashed(a)) {
      ASSERT_TRUE(ictx_eq(std::get<Mgu>(a).ctx, std::get<Mgu>(b).ctx));
      ASSERT_TRUE(subst_eq(std::get<Mgu>(a).subst, std::get<Mgu>(b).subst));
    }
  }
}

TEST(IndexMatch, PinnedExamples) {
  // pattern variable binds to the target
  {
    MatchResult r = match_term(ctx({"u"}), idx_var("u"), idx_nat(1));
    ASSERT_FALSE(match_failed(r));
    const Matched& m = std::get<Matched>(r);
    EXPECT_TRUE(m.ctx.empty());
    EXPECT_TRUE(subst_eq(m.subst, subst({{idx_nat(1), "u"}})));
  }
  // ground mismatch
  EXPECT_TRUE(match_failed(match_term({}, idx_zero(), idx_nat(1))));
  // matching is one-sided: a constructor pattern never matches a variable
  EXPECT_TRUE(match_failed(match_term(ctx({"v"}), idx_zero(), idx_var("v"))));

  // substitution matching instantiates the shared pattern variable once
  {
    MatchResult r = match_subst(ctx({"u"}), subst({{idx_var("u"), "v"}}),
                                subst({{idx_nat(1), "v"}}));
    ASSERT_FALSE(match_failed(r));
    const Matched& m = std::get<Matched>(r);
    EXPECT_TRUE(m.ctx.empty());
    EXPECT_TRUE(subst_eq(m.subst, subst({{idx_nat(1), "u"}})));
  }
  // inconsistent repeated bindings are rejected
  {
    MatchResult r = match_subst(ctx({"u"}),
                                subst({{idx_var("u"), "v"}, {idx_var("u"), "w"}}),
                                subst({{idx_zero(), "v"}, {idx_nat(1), "w"}}));
    EXPECT_TRUE(match_failed(r));
  }
  // domain mismatch is a failure, not an error
  EXPECT_TRUE(match_failed(match_subst(ctx({"u"}), subst({{idx_var("u"), "v"}}),
                                       subst({{idx_zero(), "w"}}))));
  EXPECT_TRUE(match_failed(match_subst({}, {}, subst({{idx_zero(), "w"}}))));
}

TEST(IndexMatch, SoundOnInstances) {
  Rng rng(45);
  for (int i = 0; i < 4000; ++i) {
    IndexCtx d = random_ictx(rng, 3);
    IdxPtr m = random_idx(rng, d, 5);
    IndexSubst ground = random_grounding(rng, d, 4);
    IdxPtr n = subst_apply(m, ground);
    MatchResult r = match_term(d, m, n);
    ASSERT_FALSE(match_failed(r)) << show_idx(m) << " vs its instance " << show_idx(n);
    const Matched& mt = std::get<Matched>(r);
    ASSERT_TRUE(idx_eq(subst_apply(m, mt.subst), n));
    ASSERT_TRUE(subst_check(mt.ctx, mt.subst, d));
  }
}

TEST(IndexMatch, SubstInstancesRoundTrip) {
  Rng rng(46);
  for (int i = 0; i < 4000; ++i) {
    IndexCtx range = random_ictx(rng, 3, "r");
    IndexCtx dom = random_ictx(rng, 3, "d");
    IndexSubst th1 = random_subst(rng, dom, range, 3);
    IndexSubst ground = random_grounding(rng, range, 3);
    IndexSubst th2;
    for (const SubstEntry& e : th1.entries)
      th2.entries.push_back({subst_apply(e.term, ground), e.var});
    MatchResult r = match_subst(range, th1, th2);
    ASSERT_FALSE(match_failed(r)) << show_subst(th1) << " vs " << show_subst(th2);
    const Matched& mt = std::get<Matched>(r);
    for (size_t k = 0; k < th1.entries.size(); ++k)
      ASSERT_TRUE(idx_eq(subst_apply(th1.entries[k].term, mt.subst), th2.entries[k].term));
  }
}

}  // namespace
}  // namespace tores
