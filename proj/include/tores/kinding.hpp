#pragma once

// Bidirectional kind checking. Star formers (unit, products, sums, arrows,
// existentials, equations) both check and synthesize at *; type variables,
// applications, fixpoints and index-recursive types synthesize; type-level
// lambdas only check, so an application head can never be a lambda redex.

#include <optional>
#include <string>
#include <variant>

#include "tores/printer.hpp"
#include "tores/syntax.hpp"

namespace tores {

struct KindError {
  enum class Reason {
    not_star,
    head_not_pi,
    unbound_tvar,
    lambda_needs_pi,
    strat_kind_shape,
    sort_mismatch,
  };
  Reason reason;
  std::string detail;
  Span span;
};

inline const char* kind_error_code(KindError::Reason r) {
  switch (r) {
    case KindError::Reason::not_star: return "K001";
    case KindError::Reason::head_not_pi: return "K002";
    case KindError::Reason::unbound_tvar: return "K003";
    case KindError::Reason::lambda_needs_pi: return "K004";
    case KindError::Reason::strat_kind_shape: return "K005";
    case KindError::Reason::sort_mismatch: return "K006";
  }
  return "K000";
}

using KindCheckResult = std::optional<KindError>;
using KindInferResult = std::variant<KindPtr, KindError>;

inline KindCheckResult kind_check(const IndexCtx& d, const TVarCtx& xi, const TypePtr& t,
                                  const KindPtr& k);
inline KindInferResult kind_infer(const IndexCtx& d, const TVarCtx& xi, const TypePtr& t);

namespace detail {

inline KindError kerr(KindError::Reason r, std::string detail, Span sp) {
  return KindError{r, std::move(detail), sp};
}

inline std::optional<KindError> check_idx(const IndexCtx& d, const IdxPtr& m, Span sp) {
  if (!idx_check(d, m))
    return kerr(KindError::Reason::sort_mismatch,
                "index term '" + show_idx_surface(m) + "' is not well sorted here", sp);
  return std::nullopt;
}

// Nested shadowing is fine here since lookups take the innermost binding, but
// one binder list introducing the same name twice is ill-formed.
inline void extend_ictx(IndexCtx& d, const std::string& name) {
  d.items.push_back({name, Sort::Nat});
}

inline std::optional<KindError> distinct_binders(const SortSpine& binders, Span sp) {
  for (size_t i = 0; i < binders.items.size(); ++i)
    for (size_t j = i + 1; j < binders.items.size(); ++j)
      if (binders.items[i].name == binders.items[j].name)
        return kerr(KindError::Reason::sort_mismatch,
                    "duplicate index binder '" + binders.items[i].name + "' in one binder list",
                    sp);
  return std::nullopt;
}

// Star formers share one path used by both modes.
inline KindCheckResult infer_star_former(const IndexCtx& d, const TVarCtx& xi, const TypePtr& t) {
  if (const TyUnit* n = std::get_if<TyUnit>(&t->node)) {
    (void)n;
    return std::nullopt;
  }
  if (const TyProd* n = std::get_if<TyProd>(&t->node)) {
    if (auto e = kind_check(d, xi, n->left, kind_star())) return e;
    return kind_check(d, xi, n->right, kind_star());
  }
  if (const TySum* n = std::get_if<TySum>(&t->node)) {
    if (auto e = kind_check(d, xi, n->left, kind_star())) return e;
    return kind_check(d, xi, n->right, kind_star());
  }
  if (const TyArrow* n = std::get_if<TyArrow>(&t->node)) {
    if (auto e = distinct_binders(n->binders, t->span)) return e;
    IndexCtx inner = d;
    for (const IdxBinding& b : n->binders.items) extend_ictx(inner, b.name);
    if (auto e = kind_check(inner, xi, n->domain, kind_star())) return e;
    return kind_check(inner, xi, n->codomain, kind_star());
  }
  if (const TySigma* n = std::get_if<TySigma>(&t->node)) {
    IndexCtx inner = d;
    extend_ictx(inner, n->name);
    return kind_check(inner, xi, n->body, kind_star());
  }
  const TyEq& n = std::get<TyEq>(t->node);
  if (auto e = check_idx(d, n.lhs, t->span)) return e;
  return check_idx(d, n.rhs, t->span);
}

inline bool is_star_former(const TypePtr& t) {
  return std::holds_alternative<TyUnit>(t->node) || std::holds_alternative<TyProd>(t->node) ||
         std::holds_alternative<TySum>(t->node) || std::holds_alternative<TyArrow>(t->node) ||
         std::holds_alternative<TySigma>(t->node) || std::holds_alternative<TyEq>(t->node);
}

}  // namespace detail

inline KindInferResult kind_infer(const IndexCtx& d, const TVarCtx& xi, const TypePtr& t) {
  using detail::kerr;
  if (detail::is_star_former(t)) {
    if (auto e = detail::infer_star_former(d, xi, t)) return *e;
    return kind_star();
  }
  if (const TyVar* n = std::get_if<TyVar>(&t->node)) {
    if (const KindPtr* k = xi.lookup(n->name)) return *k;
    return kerr(KindError::Reason::unbound_tvar, "type variable '" + n->name + "' is not in scope",
                t->span);
  }
  if (const TyApp* n = std::get_if<TyApp>(&t->node)) {
    KindInferResult head = kind_infer(d, xi, n->head);
    if (std::holds_alternative<KindError>(head)) return head;
    const KindPtr& hk = std::get<KindPtr>(head);
    const KPi* pi = std::get_if<KPi>(&hk->node);
    if (!pi)
      return kerr(KindError::Reason::head_not_pi,
                  "application head has kind * and cannot take an index argument", t->span);
    if (auto e = detail::check_idx(d, n->arg, t->span)) return *e;
    // Kinds contain no index occurrences, so K[M/u] is K itself.
    return pi->body;
  }
  if (const TyLam* n = std::get_if<TyLam>(&t->node)) {
    (void)n;
    return kerr(KindError::Reason::lambda_needs_pi,
                "type-level lambda has no inferred kind; it only checks against Pi kinds",
                t->span);
  }
  if (const TyMu* n = std::get_if<TyMu>(&t->node)) {
    TVarCtx inner = xi;
    inner.items.push_back({n->name, n->kind});
    if (auto e = kind_check(d, inner, n->body, n->kind)) return *e;
    return n->kind;
  }
  if (const TyNu* n = std::get_if<TyNu>(&t->node)) {
    TVarCtx inner = xi;
    inner.items.push_back({n->name, n->kind});
    if (auto e = kind_check(d, inner, n->body, n->kind)) return *e;
    return n->kind;
  }
  const TyRec& n = std::get<TyRec>(t->node);
  const KPi* pi = std::get_if<KPi>(&n.kind->node);
  if (!pi || pi->sort != Sort::Nat)
    return kerr(KindError::Reason::strat_kind_shape,
                "a Rec annotation must have shape Pi u:nat. K, found " + show_kind(n.kind),
                t->span);
  if (auto e = kind_check(d, xi, n.zero, pi->body)) return *e;
  IndexCtx di = d;
  detail::extend_ictx(di, n.suc_name);
  TVarCtx xii = xi;
  xii.items.push_back({n.tvar_name, pi->body});
  if (auto e = kind_check(di, xii, n.suc_branch, pi->body)) return *e;
  return n.kind;
}

inline KindCheckResult kind_check(const IndexCtx& d, const TVarCtx& xi, const TypePtr& t,
                                  const KindPtr& k) {
  using detail::kerr;
  if (detail::is_star_former(t)) {
    if (!kind_is_star(k))
      return kerr(KindError::Reason::not_star,
                  "this type forms kind * but " + show_kind(k) + " was expected", t->span);
    return detail::infer_star_former(d, xi, t);
  }
  if (const TyLam* n = std::get_if<TyLam>(&t->node)) {
    const KPi* pi = std::get_if<KPi>(&k->node);
    if (!pi)
      return kerr(KindError::Reason::lambda_needs_pi,
                  "type-level lambda checked against *; it needs a Pi kind", t->span);
    IndexCtx inner = d;
    detail::extend_ictx(inner, n->name);
    return kind_check(inner, xi, n->body, pi->body);
  }
  // Conversion: synthesize and compare, at any kind.
  KindInferResult r = kind_infer(d, xi, t);
  if (KindError* e = std::get_if<KindError>(&r)) return *e;
  const KindPtr& got = std::get<KindPtr>(r);
  if (!kind_alpha_eq(got, k))
    return kerr(KindError::Reason::not_star,
                "expected kind " + show_kind(k) + ", inferred " + show_kind(got), t->span);
  return std::nullopt;
}

}  // namespace tores
