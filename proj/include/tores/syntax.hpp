#pragma once

// Kinds, types, and terms of the core language, together with the syntactic
// operations the checker and machine rely on: alpha-equality, capture-avoiding
// substitution of index terms and type variables, and spine decomposition.
// All nodes are immutable and shared; rebuilding reuses unchanged subtrees.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tores/index.hpp"

namespace tores {

// Byte offsets plus the 1-based line/column of the start token. Hand-built
// nodes keep the zero span.
struct Span {
  uint32_t begin = 0;
  uint32_t end = 0;
  uint32_t line = 0;
  uint32_t col = 0;
  bool known() const { return line != 0; }
};

// ---- kinds -----------------------------------------------------------------

struct Kind;
using KindPtr = std::shared_ptr<const Kind>;

struct KStar {};
struct KPi {
  std::string name;
  Sort sort = Sort::Nat;
  KindPtr body;
};

struct Kind {
  std::variant<KStar, KPi> node;
};

inline KindPtr kind_star() {
  static const KindPtr k = std::make_shared<Kind>(Kind{KStar{}});
  return k;
}
inline KindPtr kind_pi(std::string name, KindPtr body, Sort s = Sort::Nat) {
  return std::make_shared<Kind>(Kind{KPi{std::move(name), s, std::move(body)}});
}

inline bool kind_is_star(const KindPtr& k) { return std::holds_alternative<KStar>(k->node); }

inline size_t kind_arity(const KindPtr& k) {
  size_t n = 0;
  const Kind* cur = k.get();
  while (const KPi* pi = std::get_if<KPi>(&cur->node)) {
    ++n;
    cur = pi->body.get();
  }
  return n;
}

// Sorts carry no index terms, so kind equality ignores binder names entirely.
inline bool kind_alpha_eq(const KindPtr& a, const KindPtr& b) {
  const Kind *x = a.get(), *y = b.get();
  while (true) {
    const KPi* px = std::get_if<KPi>(&x->node);
    const KPi* py = std::get_if<KPi>(&y->node);
    if (!px && !py) return true;
    if (!px || !py || px->sort != py->sort) return false;
    x = px->body.get();
    y = py->body.get();
  }
}

// The binder spine of Pi u1. ... Pi uk. *.
inline SortSpine kind_binders(const KindPtr& k) {
  SortSpine sp;
  const Kind* cur = k.get();
  while (const KPi* pi = std::get_if<KPi>(&cur->node)) {
    sp.items.push_back({pi->name, pi->sort});
    cur = pi->body.get();
  }
  return sp;
}

// ---- types -----------------------------------------------------------------

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct TyUnit {};
struct TyProd {
  TypePtr left, right;
};
struct TySum {
  TypePtr left, right;
};
// (u1:U1, ..., uk:Uk | domain) -> codomain; the binders scope over both sides.
struct TyArrow {
  SortSpine binders;
  TypePtr domain, codomain;
};
struct TySigma {
  std::string name;
  Sort sort = Sort::Nat;
  TypePtr body;
};
struct TyEq {
  IdxPtr lhs, rhs;
};
struct TyApp {
  TypePtr head;
  IdxPtr arg;
};
struct TyLam {
  std::string name;
  Sort sort = Sort::Nat;
  TypePtr body;
};
struct TyVar {
  std::string name;
};
struct TyMu {
  std::string name;  // bound type variable
  KindPtr kind;
  TypePtr body;
};
struct TyNu {
  std::string name;
  KindPtr kind;
  TypePtr body;
};
// Primitive recursion on the nat index: Rec K (0 => zero | suc u, X => suc_branch).
struct TyRec {
  KindPtr kind;
  TypePtr zero;
  std::string suc_name;   // index variable bound in suc_branch
  std::string tvar_name;  // type variable bound in suc_branch
  TypePtr suc_branch;
};

struct Type {
  std::variant<TyUnit, TyProd, TySum, TyArrow, TySigma, TyEq, TyApp, TyLam, TyVar, TyMu, TyNu,
               TyRec>
      node;
  Span span;
};

template <typename N>
TypePtr mk_type(N node, Span sp = {}) {
  return std::make_shared<Type>(Type{std::move(node), sp});
}

inline TypePtr ty_unit(Span sp = {}) { return mk_type(TyUnit{}, sp); }
inline TypePtr ty_prod(TypePtr a, TypePtr b, Span sp = {}) {
  return mk_type(TyProd{std::move(a), std::move(b)}, sp);
}
inline TypePtr ty_sum(TypePtr a, TypePtr b, Span sp = {}) {
  return mk_type(TySum{std::move(a), std::move(b)}, sp);
}
inline TypePtr ty_arrow(SortSpine binders, TypePtr dom, TypePtr cod, Span sp = {}) {
  return mk_type(TyArrow{std::move(binders), std::move(dom), std::move(cod)}, sp);
}
inline TypePtr ty_fn(TypePtr dom, TypePtr cod, Span sp = {}) {
  return ty_arrow({}, std::move(dom), std::move(cod), sp);
}
inline TypePtr ty_sigma(std::string u, TypePtr body, Span sp = {}) {
  return mk_type(TySigma{std::move(u), Sort::Nat, std::move(body)}, sp);
}
inline TypePtr ty_eq(IdxPtr a, IdxPtr b, Span sp = {}) {
  return mk_type(TyEq{std::move(a), std::move(b)}, sp);
}
inline TypePtr ty_app(TypePtr head, IdxPtr arg, Span sp = {}) {
  return mk_type(TyApp{std::move(head), std::move(arg)}, sp);
}
inline TypePtr ty_lam(std::string u, TypePtr body, Span sp = {}) {
  return mk_type(TyLam{std::move(u), Sort::Nat, std::move(body)}, sp);
}
inline TypePtr ty_var(std::string x, Span sp = {}) { return mk_type(TyVar{std::move(x)}, sp); }
inline TypePtr ty_mu(std::string x, KindPtr k, TypePtr body, Span sp = {}) {
  return mk_type(TyMu{std::move(x), std::move(k), std::move(body)}, sp);
}
inline TypePtr ty_nu(std::string x, KindPtr k, TypePtr body, Span sp = {}) {
  return mk_type(TyNu{std::move(x), std::move(k), std::move(body)}, sp);
}
inline TypePtr ty_rec(KindPtr k, TypePtr zero, std::string u, std::string x, TypePtr suc,
                      Span sp = {}) {
  return mk_type(TyRec{std::move(k), std::move(zero), std::move(u), std::move(x), std::move(suc)},
                 sp);
}

inline TypePtr ty_app_spine(TypePtr head, const TermSpine& args) {
  for (const IdxPtr& m : args) head = ty_app(std::move(head), m);
  return head;
}

// Decomposes T into a non-application head and its index arguments in
// application order.
inline std::pair<TypePtr, TermSpine> spine_head_form(TypePtr t) {
  TermSpine rev;
  while (const TyApp* app = std::get_if<TyApp>(&t->node)) {
    rev.push_back(app->arg);
    t = app->head;
  }
  return {t, TermSpine(rev.rbegin(), rev.rend())};
}

// ---- terms -----------------------------------------------------------------

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct TmVar {
  std::string name;
};
struct TmUnit {};
// fn (u1, ..., uk | x) => body
struct TmLam {
  std::vector<std::string> ivars;
  std::string arg;
  TermPtr body;
};
struct TmApp {
  TermPtr fn;
  TermSpine spine;
  TermPtr arg;
};
struct TmPair {
  TermPtr left, right;
};
struct TmSplit {
  TermPtr scrut;
  std::string x1, x2;
  TermPtr body;
};
struct TmInj {
  int side = 1;  // 1 = left, 2 = right
  TermPtr body;
};
struct TmCase {
  TermPtr scrut;
  std::string x1;
  TermPtr left;
  std::string x2;
  TermPtr right;
};
struct TmPack {
  IdxPtr witness;
  TermPtr body;
};
struct TmUnpack {
  TermPtr scrut;
  std::string ivar;
  std::string xvar;
  TermPtr body;
};
struct TmRefl {};
// eqelim scrut with (ctx | subst) in body; the unifier may be omitted in
// source and filled in during elaboration.
struct TmEqElim {
  TermPtr scrut;
  bool has_unifier = false;
  IndexCtx ctx;
  IndexSubst subst;
  TermPtr body;
};
struct TmEqAbort {
  TermPtr scrut;
};
struct TmFold {
  TermPtr body;
};
struct TmRec {
  std::string fvar;
  TermPtr body;
};
struct TmCorec {
  std::string fvar;
  TermPtr body;
};
struct TmOutNu {
  TermPtr body;
};
// inj0 / injs introductions for stratified types.
struct TmInjIdx {
  bool suc = false;
  TermPtr body;
};
struct TmOutIdx {
  bool suc = false;
  TermPtr body;
};
// ind (0 => zero | suc u, f => suc_branch)
struct TmInd {
  TermPtr zero;
  std::string ivar;
  std::string fvar;
  TermPtr suc_branch;
};
struct TmAnnot {
  TermPtr body;
  TypePtr type;
};

struct Term {
  std::variant<TmVar, TmUnit, TmLam, TmApp, TmPair, TmSplit, TmInj, TmCase, TmPack, TmUnpack,
               TmRefl, TmEqElim, TmEqAbort, TmFold, TmRec, TmCorec, TmOutNu, TmInjIdx, TmOutIdx,
               TmInd, TmAnnot>
      node;
  Span span;
};

template <typename N>
TermPtr mk_term(N node, Span sp = {}) {
  return std::make_shared<Term>(Term{std::move(node), sp});
}

inline TermPtr tm_var(std::string x, Span sp = {}) { return mk_term(TmVar{std::move(x)}, sp); }
inline TermPtr tm_unit(Span sp = {}) { return mk_term(TmUnit{}, sp); }
inline TermPtr tm_lam(std::vector<std::string> ivars, std::string arg, TermPtr body, Span sp = {}) {
  return mk_term(TmLam{std::move(ivars), std::move(arg), std::move(body)}, sp);
}
inline TermPtr tm_app(TermPtr fn, TermSpine spine, TermPtr arg, Span sp = {}) {
  return mk_term(TmApp{std::move(fn), std::move(spine), std::move(arg)}, sp);
}
inline TermPtr tm_pair(TermPtr a, TermPtr b, Span sp = {}) {
  return mk_term(TmPair{std::move(a), std::move(b)}, sp);
}
inline TermPtr tm_split(TermPtr s, std::string x1, std::string x2, TermPtr body, Span sp = {}) {
  return mk_term(TmSplit{std::move(s), std::move(x1), std::move(x2), std::move(body)}, sp);
}
inline TermPtr tm_inj(int side, TermPtr body, Span sp = {}) {
  return mk_term(TmInj{side, std::move(body)}, sp);
}
inline TermPtr tm_case(TermPtr s, std::string x1, TermPtr l, std::string x2, TermPtr r,
                       Span sp = {}) {
  return mk_term(TmCase{std::move(s), std::move(x1), std::move(l), std::move(x2), std::move(r)},
                 sp);
}
inline TermPtr tm_pack(IdxPtr m, TermPtr body, Span sp = {}) {
  return mk_term(TmPack{std::move(m), std::move(body)}, sp);
}
inline TermPtr tm_unpack(TermPtr s, std::string u, std::string x, TermPtr body, Span sp = {}) {
  return mk_term(TmUnpack{std::move(s), std::move(u), std::move(x), std::move(body)}, sp);
}
inline TermPtr tm_refl(Span sp = {}) { return mk_term(TmRefl{}, sp); }
inline TermPtr tm_eqelim(TermPtr s, TermPtr body, Span sp = {}) {
  return mk_term(TmEqElim{std::move(s), false, {}, {}, std::move(body)}, sp);
}
inline TermPtr tm_eqelim_with(TermPtr s, IndexCtx d, IndexSubst th, TermPtr body, Span sp = {}) {
  return mk_term(TmEqElim{std::move(s), true, std::move(d), std::move(th), std::move(body)}, sp);
}
inline TermPtr tm_eqabort(TermPtr s, Span sp = {}) { return mk_term(TmEqAbort{std::move(s)}, sp); }
inline TermPtr tm_fold(TermPtr t, Span sp = {}) { return mk_term(TmFold{std::move(t)}, sp); }
inline TermPtr tm_rec(std::string f, TermPtr body, Span sp = {}) {
  return mk_term(TmRec{std::move(f), std::move(body)}, sp);
}
inline TermPtr tm_corec(std::string f, TermPtr body, Span sp = {}) {
  return mk_term(TmCorec{std::move(f), std::move(body)}, sp);
}
inline TermPtr tm_out_nu(TermPtr t, Span sp = {}) { return mk_term(TmOutNu{std::move(t)}, sp); }
inline TermPtr tm_inj_idx(bool suc, TermPtr t, Span sp = {}) {
  return mk_term(TmInjIdx{suc, std::move(t)}, sp);
}
inline TermPtr tm_out_idx(bool suc, TermPtr t, Span sp = {}) {
  return mk_term(TmOutIdx{suc, std::move(t)}, sp);
}
inline TermPtr tm_ind(TermPtr zero, std::string u, std::string f, TermPtr suc, Span sp = {}) {
  return mk_term(TmInd{std::move(zero), std::move(u), std::move(f), std::move(suc)}, sp);
}
inline TermPtr tm_annot(TermPtr t, TypePtr ty, Span sp = {}) {
  return mk_term(TmAnnot{std::move(t), std::move(ty)}, sp);
}

// ---- contexts --------------------------------------------------------------

struct TVarBinding {
  std::string name;
  KindPtr kind;
};

struct TVarCtx {
  std::vector<TVarBinding> items;
  const KindPtr* lookup(const std::string& n) const {
    for (auto it = items.rbegin(); it != items.rend(); ++it)
      if (it->name == n) return &it->kind;
    return nullptr;
  }
  bool contains(const std::string& n) const { return lookup(n) != nullptr; }
};

struct TermBinding {
  std::string name;
  TypePtr type;
};

struct TypingCtx {
  std::vector<TermBinding> items;
  const TypePtr* lookup(const std::string& n) const {
    for (auto it = items.rbegin(); it != items.rend(); ++it)
      if (it->name == n) return &it->type;
    return nullptr;
  }
  bool contains(const std::string& n) const { return lookup(n) != nullptr; }
};

// ---- free variables --------------------------------------------------------

namespace detail {

inline void insert_name(std::vector<std::string>& out, const std::string& n) {
  if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
}

inline void idx_fv_into(const IdxPtr& m, const std::vector<std::string>& bound,
                        std::vector<std::string>& out) {
  std::vector<std::string> raw;
  idx_free_vars(m, raw);
  for (const std::string& n : raw)
    if (std::find(bound.begin(), bound.end(), n) == bound.end()) insert_name(out, n);
}

inline void ty_fiv_into(const TypePtr& t, std::vector<std::string>& bound,
                        std::vector<std::string>& out);

inline void ty_fiv_binder(const TypePtr& body, const std::string& name,
                          std::vector<std::string>& bound, std::vector<std::string>& out) {
  bound.push_back(name);
  ty_fiv_into(body, bound, out);
  bound.pop_back();
}

inline void ty_fiv_into(const TypePtr& t, std::vector<std::string>& bound,
                        std::vector<std::string>& out) {
  if (const TyProd* p = std::get_if<TyProd>(&t->node)) {
    ty_fiv_into(p->left, bound, out);
    ty_fiv_into(p->right, bound, out);
  } else if (const TySum* s = std::get_if<TySum>(&t->node)) {
    ty_fiv_into(s->left, bound, out);
    ty_fiv_into(s->right, bound, out);
  } else if (const TyArrow* a = std::get_if<TyArrow>(&t->node)) {
    size_t n = bound.size();
    for (const IdxBinding& b : a->binders.items) bound.push_back(b.name);
    ty_fiv_into(a->domain, bound, out);
    ty_fiv_into(a->codomain, bound, out);
    bound.resize(n);
  } else if (const TySigma* g = std::get_if<TySigma>(&t->node)) {
    ty_fiv_binder(g->body, g->name, bound, out);
  } else if (const TyEq* e = std::get_if<TyEq>(&t->node)) {
    idx_fv_into(e->lhs, bound, out);
    idx_fv_into(e->rhs, bound, out);
  } else if (const TyApp* ap = std::get_if<TyApp>(&t->node)) {
    ty_fiv_into(ap->head, bound, out);
    idx_fv_into(ap->arg, bound, out);
  } else if (const TyLam* l = std::get_if<TyLam>(&t->node)) {
    ty_fiv_binder(l->body, l->name, bound, out);
  } else if (const TyMu* m = std::get_if<TyMu>(&t->node)) {
    ty_fiv_into(m->body, bound, out);
  } else if (const TyNu* nu = std::get_if<TyNu>(&t->node)) {
    ty_fiv_into(nu->body, bound, out);
  } else if (const TyRec* r = std::get_if<TyRec>(&t->node)) {
    ty_fiv_into(r->zero, bound, out);
    ty_fiv_binder(r->suc_branch, r->suc_name, bound, out);
  }
}

inline void ty_ftv_into(const TypePtr& t, std::vector<std::string>& bound,
                        std::vector<std::string>& out) {
  if (const TyVar* v = std::get_if<TyVar>(&t->node)) {
    if (std::find(bound.begin(), bound.end(), v->name) == bound.end()) insert_name(out, v->name);
  } else if (const TyProd* p = std::get_if<TyProd>(&t->node)) {
    ty_ftv_into(p->left, bound, out);
    ty_ftv_into(p->right, bound, out);
  } else if (const TySum* s = std::get_if<TySum>(&t->node)) {
    ty_ftv_into(s->left, bound, out);
    ty_ftv_into(s->right, bound, out);
  } else if (const TyArrow* a = std::get_if<TyArrow>(&t->node)) {
    ty_ftv_into(a->domain, bound, out);
    ty_ftv_into(a->codomain, bound, out);
  } else if (const TySigma* g = std::get_if<TySigma>(&t->node)) {
    ty_ftv_into(g->body, bound, out);
  } else if (const TyApp* ap = std::get_if<TyApp>(&t->node)) {
    ty_ftv_into(ap->head, bound, out);
  } else if (const TyLam* l = std::get_if<TyLam>(&t->node)) {
    ty_ftv_into(l->body, bound, out);
  } else if (const TyMu* m = std::get_if<TyMu>(&t->node)) {
    bound.push_back(m->name);
    ty_ftv_into(m->body, bound, out);
    bound.pop_back();
  } else if (const TyNu* nu = std::get_if<TyNu>(&t->node)) {
    bound.push_back(nu->name);
    ty_ftv_into(nu->body, bound, out);
    bound.pop_back();
  } else if (const TyRec* r = std::get_if<TyRec>(&t->node)) {
    ty_ftv_into(r->zero, bound, out);
    bound.push_back(r->tvar_name);
    ty_ftv_into(r->suc_branch, bound, out);
    bound.pop_back();
  }
}

}  // namespace detail

inline std::vector<std::string> ty_free_ivars(const TypePtr& t) {
  std::vector<std::string> bound, out;
  detail::ty_fiv_into(t, bound, out);
  return out;
}

inline std::vector<std::string> ty_free_tvars(const TypePtr& t) {
  std::vector<std::string> bound, out;
  detail::ty_ftv_into(t, bound, out);
  return out;
}

// Deterministic fresh names: strip any digit suffix from the stem and append
// the smallest counter that avoids the given set.
inline std::string fresh_name(const std::string& base,
                              const std::function<bool(const std::string&)>& taken) {
  std::string stem = base;
  while (stem.size() > 1 && isdigit((unsigned char)stem.back())) stem.pop_back();
  for (int i = 1;; ++i) {
    std::string cand = stem + std::to_string(i);
    if (!taken(cand)) return cand;
  }
}

// ---- alpha-equality --------------------------------------------------------

namespace detail {

struct RenameStack {
  std::vector<std::pair<std::string, std::string>> pairs;
  void push(const std::string& a, const std::string& b) { pairs.emplace_back(a, b); }
  void pop(size_t n = 1) { pairs.resize(pairs.size() - n); }
  // Two names correspond iff bound at the same depth, or both free and equal.
  bool same(const std::string& a, const std::string& b) const {
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      bool la = it->first == a, rb = it->second == b;
      if (la || rb) return la && rb;
    }
    return a == b;
  }
};

inline bool idx_aeq(const IdxPtr& a, const IdxPtr& b, const RenameStack& iv) {
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case IdxTerm::Tag::Zero: return true;
    case IdxTerm::Tag::Suc: return idx_aeq(a->sub, b->sub, iv);
    case IdxTerm::Tag::Var: return iv.same(a->var, b->var);
  }
  return false;
}

inline bool ty_aeq(const TypePtr& a, const TypePtr& b, RenameStack& iv, RenameStack& tv) {
  if (a->node.index() != b->node.index()) return false;
  if (std::holds_alternative<TyUnit>(a->node)) return true;
  if (const TyProd* x = std::get_if<TyProd>(&a->node)) {
    const TyProd& y = std::get<TyProd>(b->node);
    return ty_aeq(x->left, y.left, iv, tv) && ty_aeq(x->right, y.right, iv, tv);
  }
  if (const TySum* x = std::get_if<TySum>(&a->node)) {
    const TySum& y = std::get<TySum>(b->node);
    return ty_aeq(x->left, y.left, iv, tv) && ty_aeq(x->right, y.right, iv, tv);
  }
  if (const TyArrow* x = std::get_if<TyArrow>(&a->node)) {
    const TyArrow& y = std::get<TyArrow>(b->node);
    if (x->binders.size() != y.binders.size()) return false;
    for (size_t i = 0; i < x->binders.size(); ++i) {
      if (x->binders.items[i].sort != y.binders.items[i].sort) return false;
      iv.push(x->binders.items[i].name, y.binders.items[i].name);
    }
    bool ok = ty_aeq(x->domain, y.domain, iv, tv) && ty_aeq(x->codomain, y.codomain, iv, tv);
    iv.pop(x->binders.size());
    return ok;
  }
  if (const TySigma* x = std::get_if<TySigma>(&a->node)) {
    const TySigma& y = std::get<TySigma>(b->node);
    iv.push(x->name, y.name);
    bool ok = ty_aeq(x->body, y.body, iv, tv);
    iv.pop();
    return ok;
  }
  if (const TyEq* x = std::get_if<TyEq>(&a->node)) {
    const TyEq& y = std::get<TyEq>(b->node);
    return idx_aeq(x->lhs, y.lhs, iv) && idx_aeq(x->rhs, y.rhs, iv);
  }
  if (const TyApp* x = std::get_if<TyApp>(&a->node)) {
    const TyApp& y = std::get<TyApp>(b->node);
    return ty_aeq(x->head, y.head, iv, tv) && idx_aeq(x->arg, y.arg, iv);
  }
  if (const TyLam* x = std::get_if<TyLam>(&a->node)) {
    const TyLam& y = std::get<TyLam>(b->node);
    iv.push(x->name, y.name);
    bool ok = ty_aeq(x->body, y.body, iv, tv);
    iv.pop();
    return ok;
  }
  if (const TyVar* x = std::get_if<TyVar>(&a->node)) {
    return tv.same(x->name, std::get<TyVar>(b->node).name);
  }
  if (const TyMu* x = std::get_if<TyMu>(&a->node)) {
    const TyMu& y = std::get<TyMu>(b->node);
    if (!kind_alpha_eq(x->kind, y.kind)) return false;
    tv.push(x->name, y.name);
    bool ok = ty_aeq(x->body, y.body, iv, tv);
    tv.pop();
    return ok;
  }
  if (const TyNu* x = std::get_if<TyNu>(&a->node)) {
    const TyNu& y = std::get<TyNu>(b->node);
    if (!kind_alpha_eq(x->kind, y.kind)) return false;
    tv.push(x->name, y.name);
    bool ok = ty_aeq(x->body, y.body, iv, tv);
    tv.pop();
    return ok;
  }
  if (const TyRec* x = std::get_if<TyRec>(&a->node)) {
    const TyRec& y = std::get<TyRec>(b->node);
    if (!kind_alpha_eq(x->kind, y.kind)) return false;
    if (!ty_aeq(x->zero, y.zero, iv, tv)) return false;
    iv.push(x->suc_name, y.suc_name);
    tv.push(x->tvar_name, y.tvar_name);
    bool ok = ty_aeq(x->suc_branch, y.suc_branch, iv, tv);
    tv.pop();
    iv.pop();
    return ok;
  }
  return false;
}

inline bool tm_aeq(const TermPtr& a, const TermPtr& b, RenameStack& iv, RenameStack& tv,
                   RenameStack& xv) {
  if (a->node.index() != b->node.index()) return false;
  if (const TmVar* x = std::get_if<TmVar>(&a->node))
    return xv.same(x->name, std::get<TmVar>(b->node).name);
  if (std::holds_alternative<TmUnit>(a->node) || std::holds_alternative<TmRefl>(a->node))
    return true;
  if (const TmLam* x = std::get_if<TmLam>(&a->node)) {
    const TmLam& y = std::get<TmLam>(b->node);
    if (x->ivars.size() != y.ivars.size()) return false;
    for (size_t i = 0; i < x->ivars.size(); ++i) iv.push(x->ivars[i], y.ivars[i]);
    xv.push(x->arg, y.arg);
    bool ok = tm_aeq(x->body, y.body, iv, tv, xv);
    xv.pop();
    iv.pop(x->ivars.size());
    return ok;
  }
  if (const TmApp* x = std::get_if<TmApp>(&a->node)) {
    const TmApp& y = std::get<TmApp>(b->node);
    if (x->spine.size() != y.spine.size()) return false;
    for (size_t i = 0; i < x->spine.size(); ++i)
      if (!idx_aeq(x->spine[i], y.spine[i], iv)) return false;
    return tm_aeq(x->fn, y.fn, iv, tv, xv) && tm_aeq(x->arg, y.arg, iv, tv, xv);
  }
  if (const TmPair* x = std::get_if<TmPair>(&a->node)) {
    const TmPair& y = std::get<TmPair>(b->node);
    return tm_aeq(x->left, y.left, iv, tv, xv) && tm_aeq(x->right, y.right, iv, tv, xv);
  }
  if (const TmSplit* x = std::get_if<TmSplit>(&a->node)) {
    const TmSplit& y = std::get<TmSplit>(b->node);
    if (!tm_aeq(x->scrut, y.scrut, iv, tv, xv)) return false;
    xv.push(x->x1, y.x1);
    xv.push(x->x2, y.x2);
    bool ok = tm_aeq(x->body, y.body, iv, tv, xv);
    xv.pop(2);
    return ok;
  }
  if (const TmInj* x = std::get_if<TmInj>(&a->node)) {
    const TmInj& y = std::get<TmInj>(b->node);
    return x->side == y.side && tm_aeq(x->body, y.body, iv, tv, xv);
  }
  if (const TmCase* x = std::get_if<TmCase>(&a->node)) {
    const TmCase& y = std::get<TmCase>(b->node);
    if (!tm_aeq(x->scrut, y.scrut, iv, tv, xv)) return false;
    xv.push(x->x1, y.x1);
    bool okl = tm_aeq(x->left, y.left, iv, tv, xv);
    xv.pop();
    if (!okl) return false;
    xv.push(x->x2, y.x2);
    bool okr = tm_aeq(x->right, y.right, iv, tv, xv);
    xv.pop();
    return okr;
  }
  if (const TmPack* x = std::get_if<TmPack>(&a->node)) {
    const TmPack& y = std::get<TmPack>(b->node);
    return idx_aeq(x->witness, y.witness, iv) && tm_aeq(x->body, y.body, iv, tv, xv);
  }
  if (const TmUnpack* x = std::get_if<TmUnpack>(&a->node)) {
    const TmUnpack& y = std::get<TmUnpack>(b->node);
    if (!tm_aeq(x->scrut, y.scrut, iv, tv, xv)) return false;
    iv.push(x->ivar, y.ivar);
    xv.push(x->xvar, y.xvar);
    bool ok = tm_aeq(x->body, y.body, iv, tv, xv);
    xv.pop();
    iv.pop();
    return ok;
  }
  if (const TmEqElim* x = std::get_if<TmEqElim>(&a->node)) {
    const TmEqElim& y = std::get<TmEqElim>(b->node);
    if (!tm_aeq(x->scrut, y.scrut, iv, tv, xv)) return false;
    if (x->has_unifier != y.has_unifier) return false;
    if (!x->has_unifier) return tm_aeq(x->body, y.body, iv, tv, xv);
    if (x->ctx.size() != y.ctx.size() || x->subst.size() != y.subst.size()) return false;
    // Domain labels of the stored unifier refer to outer variables; the range
    // terms and the body live under the refined context.
    for (size_t i = 0; i < x->ctx.size(); ++i)
      iv.push(x->ctx.items[i].name, y.ctx.items[i].name);
    bool ok = true;
    for (size_t i = 0; ok && i < x->subst.size(); ++i) {
      const SubstEntry& ex = x->subst.entries[i];
      const SubstEntry& ey = y.subst.entries[i];
      RenameStack outer = iv;
      outer.pop(x->ctx.size());
      ok = outer.same(ex.var, ey.var) && idx_aeq(ex.term, ey.term, iv);
    }
    ok = ok && tm_aeq(x->body, y.body, iv, tv, xv);
    iv.pop(x->ctx.size());
    return ok;
  }
  if (const TmEqAbort* x = std::get_if<TmEqAbort>(&a->node))
    return tm_aeq(x->scrut, std::get<TmEqAbort>(b->node).scrut, iv, tv, xv);
  if (const TmFold* x = std::get_if<TmFold>(&a->node))
    return tm_aeq(x->body, std::get<TmFold>(b->node).body, iv, tv, xv);
  if (const TmRec* x = std::get_if<TmRec>(&a->node)) {
    const TmRec& y = std::get<TmRec>(b->node);
    xv.push(x->fvar, y.fvar);
    bool ok = tm_aeq(x->body, y.body, iv, tv, xv);
    xv.pop();
    return ok;
  }
  if (const TmCorec* x = std::get_if<TmCorec>(&a->node)) {
    const TmCorec& y = std::get<TmCorec>(b->node);
    xv.push(x->fvar, y.fvar);
    bool ok = tm_aeq(x->body, y.body, iv, tv, xv);
    xv.pop();
    return ok;
  }
  if (const TmOutNu* x = std::get_if<TmOutNu>(&a->node))
    return tm_aeq(x->body, std::get<TmOutNu>(b->node).body, iv, tv, xv);
  if (const TmInjIdx* x = std::get_if<TmInjIdx>(&a->node)) {
    const TmInjIdx& y = std::get<TmInjIdx>(b->node);
    return x->suc == y.suc && tm_aeq(x->body, y.body, iv, tv, xv);
  }
  if (const TmOutIdx* x = std::get_if<TmOutIdx>(&a->node)) {
    const TmOutIdx& y = std::get<TmOutIdx>(b->node);
    return x->suc == y.suc && tm_aeq(x->body, y.body, iv, tv, xv);
  }
  if (const TmInd* x = std::get_if<TmInd>(&a->node)) {
    const TmInd& y = std::get<TmInd>(b->node);
    if (!tm_aeq(x->zero, y.zero, iv, tv, xv)) return false;
    iv.push(x->ivar, y.ivar);
    xv.push(x->fvar, y.fvar);
    bool ok = tm_aeq(x->suc_branch, y.suc_branch, iv, tv, xv);
    xv.pop();
    iv.pop();
    return ok;
  }
  if (const TmAnnot* x = std::get_if<TmAnnot>(&a->node)) {
    const TmAnnot& y = std::get<TmAnnot>(b->node);
    return ty_aeq(x->type, y.type, iv, tv) && tm_aeq(x->body, y.body, iv, tv, xv);
  }
  return false;
}

}  // namespace detail

inline bool type_alpha_eq(const TypePtr& a, const TypePtr& b) {
  detail::RenameStack iv, tv;
  return detail::ty_aeq(a, b, iv, tv);
}

inline bool term_alpha_eq(const TermPtr& a, const TermPtr& b) {
  detail::RenameStack iv, tv, xv;
  return detail::tm_aeq(a, b, iv, tv, xv);
}

// ---- substitution ----------------------------------------------------------

namespace detail {

inline bool subst_mentions(const IndexSubst& th, const std::string& name,
                           const std::vector<std::string>& relevant) {
  for (const SubstEntry& e : th.entries) {
    if (std::find(relevant.begin(), relevant.end(), e.var) == relevant.end()) continue;
    if (idx_occurs(name, e.term)) return true;
  }
  return false;
}

inline IndexSubst drop_entries(IndexSubst th, const std::vector<std::string>& names) {
  std::erase_if(th.entries, [&](const SubstEntry& e) {
    return std::find(names.begin(), names.end(), e.var) != names.end();
  });
  return th;
}

}  // namespace detail

TypePtr type_apply_isubst(const TypePtr& t, const IndexSubst& th);

namespace detail {

// Shadows the binders, freshening any that would capture a substituted term.
// Returns the adjusted binder names and the body with renamed occurrences.
struct BinderAdjust {
  std::vector<std::string> names;
  TypePtr body;
  IndexSubst inner;
};

inline BinderAdjust adjust_type_binders(const std::vector<std::string>& binders, TypePtr body,
                                        const IndexSubst& th) {
  BinderAdjust out;
  out.inner = drop_entries(th, binders);
  out.names = binders;
  std::vector<std::string> body_fiv = ty_free_ivars(body);
  for (std::string& name : out.names) {
    if (!subst_mentions(out.inner, name, body_fiv)) continue;
    std::string renamed = fresh_name(name, [&](const std::string& c) {
      if (std::find(out.names.begin(), out.names.end(), c) != out.names.end()) return true;
      for (const SubstEntry& e : out.inner.entries)
        if (e.var == c || idx_occurs(c, e.term)) return true;
      for (const std::string& fv : body_fiv)
        if (fv == c) return true;
      return false;
    });
    IndexSubst rename;
    rename.entries.push_back({idx_var(renamed), name});
    body = type_apply_isubst(body, rename);
    name = renamed;
    body_fiv = ty_free_ivars(body);
  }
  out.body = std::move(body);
  return out;
}

}  // namespace detail

// Capture-avoiding substitution of index terms throughout a type.
inline TypePtr type_apply_isubst(const TypePtr& t, const IndexSubst& th) {
  if (th.empty()) return t;
  if (std::holds_alternative<TyUnit>(t->node) || std::holds_alternative<TyVar>(t->node)) return t;
  if (const TyProd* p = std::get_if<TyProd>(&t->node))
    return ty_prod(type_apply_isubst(p->left, th), type_apply_isubst(p->right, th), t->span);
  if (const TySum* s = std::get_if<TySum>(&t->node))
    return ty_sum(type_apply_isubst(s->left, th), type_apply_isubst(s->right, th), t->span);
  if (const TyArrow* a = std::get_if<TyArrow>(&t->node)) {
    std::vector<std::string> names;
    for (const IdxBinding& b : a->binders.items) names.push_back(b.name);
    // Domain and codomain share the binders, so adjust them against the pair.
    detail::BinderAdjust adj =
        detail::adjust_type_binders(names, ty_prod(a->domain, a->codomain), th);
    const TyProd& pieces = std::get<TyProd>(adj.body->node);
    SortSpine sp;
    for (size_t i = 0; i < adj.names.size(); ++i)
      sp.items.push_back({adj.names[i], a->binders.items[i].sort});
    return ty_arrow(std::move(sp), type_apply_isubst(pieces.left, adj.inner),
                    type_apply_isubst(pieces.right, adj.inner), t->span);
  }
  if (const TySigma* g = std::get_if<TySigma>(&t->node)) {
    detail::BinderAdjust adj = detail::adjust_type_binders({g->name}, g->body, th);
    return ty_sigma(adj.names[0], type_apply_isubst(adj.body, adj.inner), t->span);
  }
  if (const TyEq* e = std::get_if<TyEq>(&t->node))
    return ty_eq(subst_apply(e->lhs, th), subst_apply(e->rhs, th), t->span);
  if (const TyApp* ap = std::get_if<TyApp>(&t->node))
    return ty_app(type_apply_isubst(ap->head, th), subst_apply(ap->arg, th), t->span);
  if (const TyLam* l = std::get_if<TyLam>(&t->node)) {
    detail::BinderAdjust adj = detail::adjust_type_binders({l->name}, l->body, th);
    return ty_lam(adj.names[0], type_apply_isubst(adj.body, adj.inner), t->span);
  }
  if (const TyMu* m = std::get_if<TyMu>(&t->node))
    return ty_mu(m->name, m->kind, type_apply_isubst(m->body, th), t->span);
  if (const TyNu* nu = std::get_if<TyNu>(&t->node))
    return ty_nu(nu->name, nu->kind, type_apply_isubst(nu->body, th), t->span);
  if (const TyRec* r = std::get_if<TyRec>(&t->node)) {
    detail::BinderAdjust adj = detail::adjust_type_binders({r->suc_name}, r->suc_branch, th);
    return ty_rec(r->kind, type_apply_isubst(r->zero, th), adj.names[0], r->tvar_name,
                  type_apply_isubst(adj.body, adj.inner), t->span);
  }
  return t;
}

// Substitution of a type for a free type variable, avoiding capture of both
// the type variables and the index variables free in the replacement.
inline TypePtr type_subst_tvar(const TypePtr& t, const std::string& x, const TypePtr& s) {
  if (const TyVar* v = std::get_if<TyVar>(&t->node)) return v->name == x ? s : t;
  if (std::holds_alternative<TyUnit>(t->node) || std::holds_alternative<TyEq>(t->node)) return t;
  if (const TyProd* p = std::get_if<TyProd>(&t->node))
    return ty_prod(type_subst_tvar(p->left, x, s), type_subst_tvar(p->right, x, s), t->span);
  if (const TySum* su = std::get_if<TySum>(&t->node))
    return ty_sum(type_subst_tvar(su->left, x, s), type_subst_tvar(su->right, x, s), t->span);

  std::vector<std::string> s_fiv = ty_free_ivars(s);
  auto captures_idx = [&](const std::string& name) {
    return std::find(s_fiv.begin(), s_fiv.end(), name) != s_fiv.end();
  };
  // Renames one index binder out of the way of s's free index variables.
  auto freshen_idx = [&](const std::string& name, const TypePtr& body)
      -> std::pair<std::string, TypePtr> {
    std::vector<std::string> body_fiv = ty_free_ivars(body);
    std::string renamed = fresh_name(name, [&](const std::string& c) {
      return captures_idx(c) || std::find(body_fiv.begin(), body_fiv.end(), c) != body_fiv.end();
    });
    IndexSubst rename;
    rename.entries.push_back({idx_var(renamed), name});
    return {renamed, type_apply_isubst(body, rename)};
  };

  if (const TyArrow* a = std::get_if<TyArrow>(&t->node)) {
    SortSpine sp = a->binders;
    TypePtr packed = ty_prod(a->domain, a->codomain);
    for (IdxBinding& b : sp.items) {
      if (!captures_idx(b.name)) continue;
      auto [renamed, body] = freshen_idx(b.name, packed);
      b.name = renamed;
      packed = body;
    }
    const TyProd& pieces = std::get<TyProd>(packed->node);
    return ty_arrow(std::move(sp), type_subst_tvar(pieces.left, x, s),
                    type_subst_tvar(pieces.right, x, s), t->span);
  }
  if (const TySigma* g = std::get_if<TySigma>(&t->node)) {
    std::string name = g->name;
    TypePtr body = g->body;
    if (captures_idx(name)) std::tie(name, body) = freshen_idx(name, body);
    return ty_sigma(name, type_subst_tvar(body, x, s), t->span);
  }
  if (const TyApp* ap = std::get_if<TyApp>(&t->node))
    return ty_app(type_subst_tvar(ap->head, x, s), ap->arg, t->span);
  if (const TyLam* l = std::get_if<TyLam>(&t->node)) {
    std::string name = l->name;
    TypePtr body = l->body;
    if (captures_idx(name)) std::tie(name, body) = freshen_idx(name, body);
    return ty_lam(name, type_subst_tvar(body, x, s), t->span);
  }

  std::vector<std::string> s_ftv = ty_free_tvars(s);
  auto captures_tvar = [&](const std::string& name) {
    return std::find(s_ftv.begin(), s_ftv.end(), name) != s_ftv.end();
  };
  // Renames a binding type variable out of the way of s's free type variables.
  auto freshen_tvar = [&](const std::string& name, const TypePtr& body)
      -> std::pair<std::string, TypePtr> {
    std::vector<std::string> body_ftv = ty_free_tvars(body);
    std::string renamed = fresh_name(name, [&](const std::string& c) {
      return captures_tvar(c) ||
             std::find(body_ftv.begin(), body_ftv.end(), c) != body_ftv.end() || c == x;
    });
    return {renamed, type_subst_tvar(body, name, ty_var(renamed))};
  };

  if (const TyMu* m = std::get_if<TyMu>(&t->node)) {
    if (m->name == x) return t;
    std::string name = m->name;
    TypePtr body = m->body;
    if (captures_tvar(name)) std::tie(name, body) = freshen_tvar(name, body);
    return ty_mu(name, m->kind, type_subst_tvar(body, x, s), t->span);
  }
  if (const TyNu* nu = std::get_if<TyNu>(&t->node)) {
    if (nu->name == x) return t;
    std::string name = nu->name;
    TypePtr body = nu->body;
    if (captures_tvar(name)) std::tie(name, body) = freshen_tvar(name, body);
    return ty_nu(name, nu->kind, type_subst_tvar(body, x, s), t->span);
  }
  if (const TyRec* r = std::get_if<TyRec>(&t->node)) {
    TypePtr zero = type_subst_tvar(r->zero, x, s);
    if (r->tvar_name == x) {
      TypePtr suc = r->suc_branch;
      std::string sname = r->suc_name;
      if (captures_idx(sname)) std::tie(sname, suc) = freshen_idx(sname, suc);
      return ty_rec(r->kind, zero, sname, r->tvar_name, suc, t->span);
    }
    std::string sname = r->suc_name;
    std::string tname = r->tvar_name;
    TypePtr suc = r->suc_branch;
    if (captures_idx(sname)) std::tie(sname, suc) = freshen_idx(sname, suc);
    if (captures_tvar(tname)) std::tie(tname, suc) = freshen_tvar(tname, suc);
    return ty_rec(r->kind, zero, sname, tname, type_subst_tvar(suc, x, s), t->span);
  }
  return t;
}

// Entry-wise index substitution over a term context.
inline TypingCtx ctx_apply_isubst(const TypingCtx& g, const IndexSubst& th) {
  TypingCtx out;
  out.items.reserve(g.items.size());
  for (const TermBinding& b : g.items) out.items.push_back({b.name, type_apply_isubst(b.type, th)});
  return out;
}

// Deep copy with fresh term nodes throughout; types inside annotations stay
// shared since nothing is keyed on their identity.
inline TermPtr term_clone(const TermPtr& t) {
  if (const TmVar* n = std::get_if<TmVar>(&t->node)) return tm_var(n->name, t->span);
  if (std::get_if<TmUnit>(&t->node)) return tm_unit(t->span);
  if (const TmLam* n = std::get_if<TmLam>(&t->node))
    return tm_lam(n->ivars, n->arg, term_clone(n->body), t->span);
  if (const TmApp* n = std::get_if<TmApp>(&t->node))
    return tm_app(term_clone(n->fn), n->spine, term_clone(n->arg), t->span);
  if (const TmPair* n = std::get_if<TmPair>(&t->node))
    return tm_pair(term_clone(n->left), term_clone(n->right), t->span);
  if (const TmSplit* n = std::get_if<TmSplit>(&t->node))
    return tm_split(term_clone(n->scrut), n->x1, n->x2, term_clone(n->body), t->span);
  if (const TmInj* n = std::get_if<TmInj>(&t->node))
    return tm_inj(n->side, term_clone(n->body), t->span);
  if (const TmCase* n = std::get_if<TmCase>(&t->node))
    return tm_case(term_clone(n->scrut), n->x1, term_clone(n->left), n->x2, term_clone(n->right),
                   t->span);
  if (const TmPack* n = std::get_if<TmPack>(&t->node))
    return tm_pack(n->witness, term_clone(n->body), t->span);
  if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node))
    return tm_unpack(term_clone(n->scrut), n->ivar, n->xvar, term_clone(n->body), t->span);
  if (std::get_if<TmRefl>(&t->node)) return tm_refl(t->span);
  if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
    return n->has_unifier
               ? tm_eqelim_with(term_clone(n->scrut), n->ctx, n->subst, term_clone(n->body),
                                t->span)
               : tm_eqelim(term_clone(n->scrut), term_clone(n->body), t->span);
  }
  if (const TmEqAbort* n = std::get_if<TmEqAbort>(&t->node))
    return tm_eqabort(term_clone(n->scrut), t->span);
  if (const TmFold* n = std::get_if<TmFold>(&t->node))
    return tm_fold(term_clone(n->body), t->span);
  if (const TmRec* n = std::get_if<TmRec>(&t->node))
    return tm_rec(n->fvar, term_clone(n->body), t->span);
  if (const TmCorec* n = std::get_if<TmCorec>(&t->node))
    return tm_corec(n->fvar, term_clone(n->body), t->span);
  if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node))
    return tm_out_nu(term_clone(n->body), t->span);
  if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node))
    return tm_inj_idx(n->suc, term_clone(n->body), t->span);
  if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node))
    return tm_out_idx(n->suc, term_clone(n->body), t->span);
  if (const TmInd* n = std::get_if<TmInd>(&t->node))
    return tm_ind(term_clone(n->zero), n->ivar, n->fvar, term_clone(n->suc_branch), t->span);
  const TmAnnot& n = std::get<TmAnnot>(t->node);
  return tm_annot(term_clone(n.body), n.type, t->span);
}

inline size_t term_size(const TermPtr& t) {
  size_t n = 1;
  if (const TmLam* c = std::get_if<TmLam>(&t->node)) return n + term_size(c->body);
  if (const TmApp* c = std::get_if<TmApp>(&t->node))
    return n + term_size(c->fn) + term_size(c->arg);
  if (const TmPair* c = std::get_if<TmPair>(&t->node))
    return n + term_size(c->left) + term_size(c->right);
  if (const TmSplit* c = std::get_if<TmSplit>(&t->node))
    return n + term_size(c->scrut) + term_size(c->body);
  if (const TmInj* c = std::get_if<TmInj>(&t->node)) return n + term_size(c->body);
  if (const TmCase* c = std::get_if<TmCase>(&t->node))
    return n + term_size(c->scrut) + term_size(c->left) + term_size(c->right);
  if (const TmPack* c = std::get_if<TmPack>(&t->node)) return n + term_size(c->body);
  if (const TmUnpack* c = std::get_if<TmUnpack>(&t->node))
    return n + term_size(c->scrut) + term_size(c->body);
  if (const TmEqElim* c = std::get_if<TmEqElim>(&t->node))
    return n + term_size(c->scrut) + term_size(c->body);
  if (const TmEqAbort* c = std::get_if<TmEqAbort>(&t->node)) return n + term_size(c->scrut);
  if (const TmFold* c = std::get_if<TmFold>(&t->node)) return n + term_size(c->body);
  if (const TmRec* c = std::get_if<TmRec>(&t->node)) return n + term_size(c->body);
  if (const TmCorec* c = std::get_if<TmCorec>(&t->node)) return n + term_size(c->body);
  if (const TmOutNu* c = std::get_if<TmOutNu>(&t->node)) return n + term_size(c->body);
  if (const TmInjIdx* c = std::get_if<TmInjIdx>(&t->node)) return n + term_size(c->body);
  if (const TmOutIdx* c = std::get_if<TmOutIdx>(&t->node)) return n + term_size(c->body);
  if (const TmInd* c = std::get_if<TmInd>(&t->node))
    return n + term_size(c->zero) + term_size(c->suc_branch);
  if (const TmAnnot* c = std::get_if<TmAnnot>(&t->node)) return n + term_size(c->body);
  return n;
}

// True when the type variable occurs free in any annotation inside the term.
// Terms bind no type variables, so only annotation types can capture it.
inline bool term_mentions_tvar(const TermPtr& t, const std::string& x) {
  if (const TmAnnot* c = std::get_if<TmAnnot>(&t->node)) {
    std::vector<std::string> ftv = ty_free_tvars(c->type);
    if (std::find(ftv.begin(), ftv.end(), x) != ftv.end()) return true;
    return term_mentions_tvar(c->body, x);
  }
  if (const TmLam* c = std::get_if<TmLam>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmApp* c = std::get_if<TmApp>(&t->node))
    return term_mentions_tvar(c->fn, x) || term_mentions_tvar(c->arg, x);
  if (const TmPair* c = std::get_if<TmPair>(&t->node))
    return term_mentions_tvar(c->left, x) || term_mentions_tvar(c->right, x);
  if (const TmSplit* c = std::get_if<TmSplit>(&t->node))
    return term_mentions_tvar(c->scrut, x) || term_mentions_tvar(c->body, x);
  if (const TmInj* c = std::get_if<TmInj>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmCase* c = std::get_if<TmCase>(&t->node))
    return term_mentions_tvar(c->scrut, x) || term_mentions_tvar(c->left, x) ||
           term_mentions_tvar(c->right, x);
  if (const TmPack* c = std::get_if<TmPack>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmUnpack* c = std::get_if<TmUnpack>(&t->node))
    return term_mentions_tvar(c->scrut, x) || term_mentions_tvar(c->body, x);
  if (const TmEqElim* c = std::get_if<TmEqElim>(&t->node))
    return term_mentions_tvar(c->scrut, x) || term_mentions_tvar(c->body, x);
  if (const TmEqAbort* c = std::get_if<TmEqAbort>(&t->node))
    return term_mentions_tvar(c->scrut, x);
  if (const TmFold* c = std::get_if<TmFold>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmRec* c = std::get_if<TmRec>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmCorec* c = std::get_if<TmCorec>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmOutNu* c = std::get_if<TmOutNu>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmInjIdx* c = std::get_if<TmInjIdx>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmOutIdx* c = std::get_if<TmOutIdx>(&t->node)) return term_mentions_tvar(c->body, x);
  if (const TmInd* c = std::get_if<TmInd>(&t->node))
    return term_mentions_tvar(c->zero, x) || term_mentions_tvar(c->suc_branch, x);
  return false;
}

// Substitution for a free term variable where each occurrence receives its
// own replacement from the factory, so node identities stay unique across use
// sites. Binders that shadow the variable stop the traversal.
inline TermPtr term_subst_var_with(const TermPtr& t, const std::string& x,
                                   const std::function<TermPtr()>& make) {
  auto go = [&](const TermPtr& u) { return term_subst_var_with(u, x, make); };
  if (const TmVar* n = std::get_if<TmVar>(&t->node)) return n->name == x ? make() : t;
  if (const TmLam* n = std::get_if<TmLam>(&t->node)) {
    if (n->arg == x) return t;
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_lam(n->ivars, n->arg, b, t->span);
  }
  if (const TmApp* n = std::get_if<TmApp>(&t->node)) {
    TermPtr f = go(n->fn), a = go(n->arg);
    return (f == n->fn && a == n->arg) ? t : tm_app(f, n->spine, a, t->span);
  }
  if (const TmPair* n = std::get_if<TmPair>(&t->node)) {
    TermPtr l = go(n->left), r = go(n->right);
    return (l == n->left && r == n->right) ? t : tm_pair(l, r, t->span);
  }
  if (const TmSplit* n = std::get_if<TmSplit>(&t->node)) {
    TermPtr sc = go(n->scrut);
    TermPtr b = (n->x1 == x || n->x2 == x) ? n->body : go(n->body);
    return (sc == n->scrut && b == n->body) ? t : tm_split(sc, n->x1, n->x2, b, t->span);
  }
  if (const TmInj* n = std::get_if<TmInj>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_inj(n->side, b, t->span);
  }
  if (const TmCase* n = std::get_if<TmCase>(&t->node)) {
    TermPtr sc = go(n->scrut);
    TermPtr l = n->x1 == x ? n->left : go(n->left);
    TermPtr r = n->x2 == x ? n->right : go(n->right);
    return (sc == n->scrut && l == n->left && r == n->right)
               ? t
               : tm_case(sc, n->x1, l, n->x2, r, t->span);
  }
  if (const TmPack* n = std::get_if<TmPack>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_pack(n->witness, b, t->span);
  }
  if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node)) {
    TermPtr sc = go(n->scrut);
    TermPtr b = n->xvar == x ? n->body : go(n->body);
    return (sc == n->scrut && b == n->body) ? t : tm_unpack(sc, n->ivar, n->xvar, b, t->span);
  }
  if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
    TermPtr sc = go(n->scrut), b = go(n->body);
    if (sc == n->scrut && b == n->body) return t;
    return n->has_unifier ? tm_eqelim_with(sc, n->ctx, n->subst, b, t->span)
                          : tm_eqelim(sc, b, t->span);
  }
  if (const TmEqAbort* n = std::get_if<TmEqAbort>(&t->node)) {
    TermPtr sc = go(n->scrut);
    return sc == n->scrut ? t : tm_eqabort(sc, t->span);
  }
  if (const TmFold* n = std::get_if<TmFold>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_fold(b, t->span);
  }
  if (const TmRec* n = std::get_if<TmRec>(&t->node)) {
    if (n->fvar == x) return t;
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_rec(n->fvar, b, t->span);
  }
  if (const TmCorec* n = std::get_if<TmCorec>(&t->node)) {
    if (n->fvar == x) return t;
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_corec(n->fvar, b, t->span);
  }
  if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_out_nu(b, t->span);
  }
  if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_inj_idx(n->suc, b, t->span);
  }
  if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_out_idx(n->suc, b, t->span);
  }
  if (const TmInd* n = std::get_if<TmInd>(&t->node)) {
    TermPtr z = go(n->zero);
    TermPtr sb = n->fvar == x ? n->suc_branch : go(n->suc_branch);
    return (z == n->zero && sb == n->suc_branch) ? t
                                                 : tm_ind(z, n->ivar, n->fvar, sb, t->span);
  }
  if (const TmAnnot* n = std::get_if<TmAnnot>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_annot(b, n->type, t->span);
  }
  return t;  // unit, refl
}

// Substitution of a closed term for a free term variable; every occurrence
// gets a fresh clone.
inline TermPtr term_subst_var(const TermPtr& t, const std::string& x, const TermPtr& s) {
  return term_subst_var_with(t, x, [&s] { return term_clone(s); });
}

// Substitution of a type for a type variable inside a term. Terms carry types
// only in annotations, so the traversal rebuilds a node exactly when a child
// changed and shares the original otherwise.
inline TermPtr term_subst_tvar(const TermPtr& t, const std::string& x, const TypePtr& s) {
  auto go = [&](const TermPtr& u) { return term_subst_tvar(u, x, s); };
  if (const TmLam* n = std::get_if<TmLam>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_lam(n->ivars, n->arg, b, t->span);
  }
  if (const TmApp* n = std::get_if<TmApp>(&t->node)) {
    TermPtr f = go(n->fn), a = go(n->arg);
    return (f == n->fn && a == n->arg) ? t : tm_app(f, n->spine, a, t->span);
  }
  if (const TmPair* n = std::get_if<TmPair>(&t->node)) {
    TermPtr l = go(n->left), r = go(n->right);
    return (l == n->left && r == n->right) ? t : tm_pair(l, r, t->span);
  }
  if (const TmSplit* n = std::get_if<TmSplit>(&t->node)) {
    TermPtr sc = go(n->scrut), b = go(n->body);
    return (sc == n->scrut && b == n->body) ? t : tm_split(sc, n->x1, n->x2, b, t->span);
  }
  if (const TmInj* n = std::get_if<TmInj>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_inj(n->side, b, t->span);
  }
  if (const TmCase* n = std::get_if<TmCase>(&t->node)) {
    TermPtr sc = go(n->scrut), l = go(n->left), r = go(n->right);
    return (sc == n->scrut && l == n->left && r == n->right)
               ? t
               : tm_case(sc, n->x1, l, n->x2, r, t->span);
  }
  if (const TmPack* n = std::get_if<TmPack>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_pack(n->witness, b, t->span);
  }
  if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node)) {
    TermPtr sc = go(n->scrut), b = go(n->body);
    return (sc == n->scrut && b == n->body) ? t : tm_unpack(sc, n->ivar, n->xvar, b, t->span);
  }
  if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
    TermPtr sc = go(n->scrut), b = go(n->body);
    if (sc == n->scrut && b == n->body) return t;
    return n->has_unifier ? tm_eqelim_with(sc, n->ctx, n->subst, b, t->span)
                          : tm_eqelim(sc, b, t->span);
  }
  if (const TmEqAbort* n = std::get_if<TmEqAbort>(&t->node)) {
    TermPtr sc = go(n->scrut);
    return sc == n->scrut ? t : tm_eqabort(sc, t->span);
  }
  if (const TmFold* n = std::get_if<TmFold>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_fold(b, t->span);
  }
  if (const TmRec* n = std::get_if<TmRec>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_rec(n->fvar, b, t->span);
  }
  if (const TmCorec* n = std::get_if<TmCorec>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_corec(n->fvar, b, t->span);
  }
  if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_out_nu(b, t->span);
  }
  if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_inj_idx(n->suc, b, t->span);
  }
  if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node)) {
    TermPtr b = go(n->body);
    return b == n->body ? t : tm_out_idx(n->suc, b, t->span);
  }
  if (const TmInd* n = std::get_if<TmInd>(&t->node)) {
    TermPtr z = go(n->zero), sb = go(n->suc_branch);
    return (z == n->zero && sb == n->suc_branch) ? t
                                                 : tm_ind(z, n->ivar, n->fvar, sb, t->span);
  }
  if (const TmAnnot* n = std::get_if<TmAnnot>(&t->node)) {
    TermPtr b = go(n->body);
    TypePtr ty = type_subst_tvar(n->type, x, s);
    return (b == n->body && ty == n->type) ? t : tm_annot(b, ty, t->span);
  }
  return t;  // variables, unit, refl
}

// Unfolding of a recursive type applied to a spine: peel one lambda binder per
// argument, substitute the arguments, then plug `self` in for the bound type
// variable. Fails (nullopt) if the body does not bind enough arguments.
inline std::optional<TypePtr> unfold_fixpoint(const std::string& tvar, const TypePtr& body,
                                              const TermSpine& args, const TypePtr& self) {
  TypePtr cur = body;
  IndexSubst th;
  std::vector<std::string> seen;
  for (const IdxPtr& arg : args) {
    const TyLam* l = std::get_if<TyLam>(&cur->node);
    if (!l) return std::nullopt;
    th.entries.push_back({arg, l->name});
    seen.push_back(l->name);
    for (size_t i = 0; i + 1 < seen.size(); ++i)
      if (seen[i] == l->name) return std::nullopt;  // shadowed binder spine
    cur = l->body;
  }
  return type_subst_tvar(type_apply_isubst(cur, th), tvar, self);
}

// One unfolding step of a stratified type at a successor index: substitute
// the predecessor for the bound index variable and the stratified type at
// the predecessor for the bound type variable.
inline TypePtr strat_suc_unfold(const TyRec& rc, const TypePtr& head, const IdxPtr& pred) {
  IndexSubst th;
  th.entries.push_back({pred, rc.suc_name});
  TypePtr branch = type_apply_isubst(rc.suc_branch, th);
  return type_subst_tvar(branch, rc.tvar_name, ty_app(head, pred));
}

// Substitutes ground index terms through a term. Entries shadowed by a binder
// are dropped, which is capture-safe because the ranges are closed.
inline TermPtr term_ground_isubst(const TermPtr& t, const IndexSubst& th) {
  if (th.empty()) return t;
  auto go = [&](const TermPtr& u) { return term_ground_isubst(u, th); };
  if (std::get_if<TmVar>(&t->node) || std::get_if<TmUnit>(&t->node) ||
      std::get_if<TmRefl>(&t->node))
    return t;
  if (const TmLam* n = std::get_if<TmLam>(&t->node)) {
    IndexSubst inner = detail::drop_entries(th, n->ivars);
    TermPtr body = term_ground_isubst(n->body, inner);
    return body.get() == n->body.get() ? t : tm_lam(n->ivars, n->arg, body, t->span);
  }
  if (const TmApp* n = std::get_if<TmApp>(&t->node)) {
    TermSpine sp;
    for (const IdxPtr& m : n->spine) sp.push_back(subst_apply(m, th));
    return tm_app(go(n->fn), std::move(sp), go(n->arg), t->span);
  }
  if (const TmPair* n = std::get_if<TmPair>(&t->node))
    return tm_pair(go(n->left), go(n->right), t->span);
  if (const TmSplit* n = std::get_if<TmSplit>(&t->node))
    return tm_split(go(n->scrut), n->x1, n->x2, go(n->body), t->span);
  if (const TmInj* n = std::get_if<TmInj>(&t->node)) return tm_inj(n->side, go(n->body), t->span);
  if (const TmCase* n = std::get_if<TmCase>(&t->node))
    return tm_case(go(n->scrut), n->x1, go(n->left), n->x2, go(n->right), t->span);
  if (const TmPack* n = std::get_if<TmPack>(&t->node))
    return tm_pack(subst_apply(n->witness, th), go(n->body), t->span);
  if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node)) {
    IndexSubst inner = detail::drop_entries(th, {n->ivar});
    return tm_unpack(go(n->scrut), n->ivar, n->xvar, term_ground_isubst(n->body, inner), t->span);
  }
  if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
    if (!n->has_unifier) return tm_eqelim(go(n->scrut), go(n->body), t->span);
    // A stated unifier's context scopes its range terms and body; the labels
    // name enclosing variables and stay as they are.
    std::vector<std::string> bound;
    for (const IdxBinding& b : n->ctx.items) bound.push_back(b.name);
    IndexSubst inner = detail::drop_entries(th, bound);
    IndexSubst sub;
    for (const SubstEntry& e : n->subst.entries)
      sub.entries.push_back({subst_apply(e.term, inner), e.var});
    return tm_eqelim_with(go(n->scrut), n->ctx, std::move(sub),
                          term_ground_isubst(n->body, inner), t->span);
  }
  if (const TmEqAbort* n = std::get_if<TmEqAbort>(&t->node))
    return tm_eqabort(go(n->scrut), t->span);
  if (const TmFold* n = std::get_if<TmFold>(&t->node)) return tm_fold(go(n->body), t->span);
  if (const TmRec* n = std::get_if<TmRec>(&t->node)) return tm_rec(n->fvar, go(n->body), t->span);
  if (const TmCorec* n = std::get_if<TmCorec>(&t->node))
    return tm_corec(n->fvar, go(n->body), t->span);
  if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node)) return tm_out_nu(go(n->body), t->span);
  if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node))
    return tm_inj_idx(n->suc, go(n->body), t->span);
  if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node))
    return tm_out_idx(n->suc, go(n->body), t->span);
  if (const TmInd* n = std::get_if<TmInd>(&t->node)) {
    IndexSubst inner = detail::drop_entries(th, {n->ivar});
    return tm_ind(go(n->zero), n->ivar, n->fvar, term_ground_isubst(n->suc_branch, inner),
                  t->span);
  }
  const TmAnnot& n = std::get<TmAnnot>(t->node);
  return tm_annot(go(n.body), type_apply_isubst(n.type, th), t->span);
}

inline TermPtr term_ground_isubst1(const TermPtr& t, const std::string& x, const IdxPtr& m) {
  IndexSubst th;
  th.entries.push_back({m, x});
  return term_ground_isubst(t, th);
}

}  // namespace tores
