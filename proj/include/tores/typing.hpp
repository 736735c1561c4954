#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "tores/index.hpp"
#include "tores/kinding.hpp"
#include "tores/syntax.hpp"

namespace tores {

// ---- diagnostics -------------------------------------------------------------

struct TypeError {
  enum class Reason {
    mismatch,
    cannot_infer,
    not_function,
    not_product,
    not_sum,
    not_sigma,
    not_equality,
    not_mu,
    not_nu,
    not_strat,
    unifier_mismatch,
    expected_clash_but_unifiable,
    index_error,
    scope_error,
    rec_shape,
    spine_shape,
  };
  Reason reason;
  std::string detail;
  Span span;
  TypePtr expected;  // may be null
  TypePtr found;     // may be null
};

inline const char* type_error_code(TypeError::Reason r) {
  switch (r) {
    case TypeError::Reason::mismatch: return "T001";
    case TypeError::Reason::cannot_infer: return "T002";
    case TypeError::Reason::not_function: return "T003";
    case TypeError::Reason::not_product: return "T004";
    case TypeError::Reason::not_sum: return "T005";
    case TypeError::Reason::not_sigma: return "T006";
    case TypeError::Reason::not_equality: return "T007";
    case TypeError::Reason::not_mu: return "T008";
    case TypeError::Reason::not_nu: return "T009";
    case TypeError::Reason::not_strat: return "T010";
    case TypeError::Reason::unifier_mismatch: return "T011";
    case TypeError::Reason::expected_clash_but_unifiable: return "T012";
    case TypeError::Reason::index_error: return "T013";
    case TypeError::Reason::scope_error: return "T014";
    case TypeError::Reason::rec_shape: return "T015";
    case TypeError::Reason::spine_shape: return "T016";
  }
  return "T000";
}

using CheckResult = std::optional<TypeError>;
using InferResult = std::variant<TypePtr, TypeError>;

// ---- checking trace ----------------------------------------------------------

// Facts recorded at function nodes: the contexts and goal type the node was
// checked with. Recursion variables of enclosing rec/corec targets are already
// instantiated with the concrete fixpoint types, both in the contexts and in
// the stored copy of the code, so a later value-level re-check needs no type
// variable context.
struct FnAnnot {
  IndexCtx d;
  TypingCtx g;
  TypePtr type;
  TermPtr code;
};

// The unifier an equality elimination was checked with; evaluation extends it
// against the runtime index environment.
struct ElimInfo {
  IndexCtx ctx;
  IndexSubst subst;
};

// The refuted equation of an eqabort, kept for ground-instance audits.
struct AbortInfo {
  IndexCtx d;
  IdxPtr lhs, rhs;
};

struct Trace {
  std::unordered_map<const Term*, FnAnnot> fns;
  std::unordered_map<const Term*, ElimInfo> elims;
  std::unordered_map<const Term*, AbortInfo> aborts;
};

// ---- unifier comparison --------------------------------------------------------

// Order-preserving alpha-equivalence of unifiers: contexts correspond
// positionally, domain labels agree exactly, range terms agree after renaming
// the second context's variables to the first's.
inline bool unifier_alpha_eq(const IndexCtx& d1, const IndexSubst& th1, const IndexCtx& d2,
                             const IndexSubst& th2) {
  if (d1.items.size() != d2.items.size()) return false;
  if (th1.entries.size() != th2.entries.size()) return false;
  IndexSubst ren;
  for (size_t i = 0; i < d2.items.size(); ++i)
    ren.entries.push_back({idx_var(d1.items[i].name), d2.items[i].name});
  for (size_t i = 0; i < th1.entries.size(); ++i) {
    if (th1.entries[i].var != th2.entries[i].var) return false;
    if (!idx_eq(th1.entries[i].term, subst_apply(th2.entries[i].term, ren))) return false;
  }
  return true;
}

// ---- the checker ---------------------------------------------------------------

class Checker {
 public:
  explicit Checker(Trace* trace = nullptr) : trace_(trace) {}

  CheckResult check(const IndexCtx& d, const TVarCtx& xi, const TypingCtx& g, const TermPtr& t,
                    const TypePtr& ty) {
    using R = TypeError::Reason;

    if (std::get_if<TmUnit>(&t->node)) {
      if (!std::holds_alternative<TyUnit>(ty->node))
        return err(R::mismatch, "a unit value only checks against the unit type", t->span, ty);
      return std::nullopt;
    }

    if (const TmPair* n = std::get_if<TmPair>(&t->node)) {
      const TyProd* p = std::get_if<TyProd>(&ty->node);
      if (!p) return err(R::mismatch, "a pair only checks against a product type", t->span, ty);
      if (auto e = check(d, xi, g, n->left, p->left)) return e;
      return check(d, xi, g, n->right, p->right);
    }

    if (const TmInj* n = std::get_if<TmInj>(&t->node)) {
      const TySum* s = std::get_if<TySum>(&ty->node);
      if (!s) return err(R::mismatch, "an injection only checks against a sum type", t->span, ty);
      return check(d, xi, g, n->body, n->side == 1 ? s->left : s->right);
    }

    if (const TmPack* n = std::get_if<TmPack>(&t->node)) {
      const TySigma* s = std::get_if<TySigma>(&ty->node);
      if (!s)
        return err(R::mismatch, "pack only checks against an existential type", t->span, ty);
      if (!idx_check(d, n->witness))
        return err(R::index_error, "index witness " + show_idx(n->witness) + " is not well-sorted here",
                   t->span, ty);
      IndexSubst th;
      th.entries.push_back({n->witness, s->name});
      return check(d, xi, g, n->body, type_apply_isubst(s->body, th));
    }

    if (std::get_if<TmRefl>(&t->node)) {
      const TyEq* e = std::get_if<TyEq>(&ty->node);
      if (!e)
        return err(R::mismatch, "refl only checks against an index equality type", t->span, ty);
      if (!idx_eq(e->lhs, e->rhs))
        return err(R::mismatch,
                   "refl needs both sides of the equality to be the same index term, but " +
                       show_idx(e->lhs) + " and " + show_idx(e->rhs) + " differ",
                   t->span, ty);
      return std::nullopt;
    }

    if (const TmLam* n = std::get_if<TmLam>(&t->node)) {
      const TyArrow* a = std::get_if<TyArrow>(&ty->node);
      if (!a)
        return err(R::mismatch, "a function only checks against a function type", t->span, ty);
      if (n->ivars.size() != a->binders.items.size())
        return err(R::spine_shape,
                   "this function binds " + std::to_string(n->ivars.size()) +
                       " index arguments but its type provides " +
                       std::to_string(a->binders.items.size()),
                   t->span, ty);
      // Index variables refine types, so their binders may not shadow; term
      // variables resolve to the innermost binding and may.
      IndexCtx dd = d;
      for (size_t i = 0; i < n->ivars.size(); ++i) {
        if (dd.contains(n->ivars[i]))
          return err(R::scope_error,
                     "index variable " + n->ivars[i] +
                         " shadows an earlier binder or repeats; rename it",
                     t->span);
        dd = ictx_extend(dd, n->ivars[i], a->binders.items[i].sort);
      }
      record_fn(t, d, g, ty);
      // Rename the type's binders to the term's names, simultaneously.
      IndexSubst ren;
      for (size_t i = 0; i < n->ivars.size(); ++i)
        ren.entries.push_back({idx_var(n->ivars[i]), a->binders.items[i].name});
      TypePtr packed = type_apply_isubst(ty_prod(a->domain, a->codomain), ren);
      const TyProd& pieces = std::get<TyProd>(packed->node);
      TypingCtx gg = g;
      gg.items.push_back({n->arg, pieces.left});
      return check(dd, xi, gg, n->body, pieces.right);
    }

    if (const TmSplit* n = std::get_if<TmSplit>(&t->node)) {
      InferResult sr = infer(d, xi, g, n->scrut);
      if (TypeError* e = std::get_if<TypeError>(&sr)) return *e;
      TypePtr sty = std::get<TypePtr>(sr);
      const TyProd* p = std::get_if<TyProd>(&sty->node);
      if (!p)
        return err(R::not_product, "split needs its scrutinee to synthesize a product type",
                   n->scrut->span, nullptr, sty);
      TypingCtx gg = g;
      gg.items.push_back({n->x1, p->left});
      gg.items.push_back({n->x2, p->right});
      return check(d, xi, gg, n->body, ty);
    }

    if (const TmCase* n = std::get_if<TmCase>(&t->node)) {
      InferResult sr = infer(d, xi, g, n->scrut);
      if (TypeError* e = std::get_if<TypeError>(&sr)) return *e;
      TypePtr sty = std::get<TypePtr>(sr);
      const TySum* s = std::get_if<TySum>(&sty->node);
      if (!s)
        return err(R::not_sum, "case needs its scrutinee to synthesize a sum type",
                   n->scrut->span, nullptr, sty);
      TypingCtx gl = g;
      gl.items.push_back({n->x1, s->left});
      if (auto e = check(d, xi, gl, n->left, ty)) return e;
      TypingCtx gr = g;
      gr.items.push_back({n->x2, s->right});
      return check(d, xi, gr, n->right, ty);
    }

    if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node)) {
      InferResult sr = infer(d, xi, g, n->scrut);
      if (TypeError* e = std::get_if<TypeError>(&sr)) return *e;
      TypePtr sty = std::get<TypePtr>(sr);
      const TySigma* s = std::get_if<TySigma>(&sty->node);
      if (!s)
        return err(R::not_sigma, "unpack needs its scrutinee to synthesize an existential type",
                   n->scrut->span, nullptr, sty);
      if (d.contains(n->ivar))
        return err(R::scope_error,
                   "index variable " + n->ivar + " shadows an earlier binder; rename it", t->span);
      IndexSubst ren;
      ren.entries.push_back({idx_var(n->ivar), s->name});
      IndexCtx dd = ictx_extend(d, n->ivar, s->sort);
      TypingCtx gg = g;
      gg.items.push_back({n->xvar, type_apply_isubst(s->body, ren)});
      return check(dd, xi, gg, n->body, ty);
    }

    if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
      InferResult sr = infer(d, xi, g, n->scrut);
      if (TypeError* e = std::get_if<TypeError>(&sr)) return *e;
      TypePtr sty = std::get<TypePtr>(sr);
      const TyEq* eq = std::get_if<TyEq>(&sty->node);
      if (!eq)
        return err(R::not_equality,
                   "eqelim needs its scrutinee to synthesize an index equality",
                   n->scrut->span, nullptr, sty);
      UnifyResult ur = unify(d, eq->lhs, eq->rhs);
      if (unify_clashed(ur))
        return err(R::index_error,
                   "the equation " + show_idx(eq->lhs) + " == " + show_idx(eq->rhs) +
                       " cannot hold; this branch is impossible, use eqabort instead",
                   t->span);
      const Mgu& mgu = std::get<Mgu>(ur);
      const IndexCtx* uctx = &mgu.ctx;
      const IndexSubst* usub = &mgu.subst;
      if (n->has_unifier) {
        if (!ictx_wf(n->ctx))
          return err(R::unifier_mismatch, "the stated unifier's context repeats a name", t->span);
        if (!unifier_alpha_eq(n->ctx, n->subst, mgu.ctx, mgu.subst))
          return err(R::unifier_mismatch,
                     "the stated unifier does not match the most general one, which is (" +
                         show_ictx(mgu.ctx) + " | " + show_subst(mgu.subst) + ")",
                     t->span);
        uctx = &n->ctx;
        usub = &n->subst;
      }
      if (trace_) trace_->elims[t.get()] = {*uctx, *usub};
      // Kinds contain no index terms, so the type variable context is
      // untouched by the substitution.
      return check(*uctx, xi, ctx_apply_isubst(g, *usub), n->body, type_apply_isubst(ty, *usub));
    }

    if (const TmEqAbort* n = std::get_if<TmEqAbort>(&t->node)) {
      InferResult sr = infer(d, xi, g, n->scrut);
      if (TypeError* e = std::get_if<TypeError>(&sr)) return *e;
      TypePtr sty = std::get<TypePtr>(sr);
      const TyEq* eq = std::get_if<TyEq>(&sty->node);
      if (!eq)
        return err(R::not_equality,
                   "eqabort needs its scrutinee to synthesize an index equality",
                   n->scrut->span, nullptr, sty);
      if (!unify_clashed(unify(d, eq->lhs, eq->rhs)))
        return err(R::expected_clash_but_unifiable,
                   "the equation " + show_idx(eq->lhs) + " == " + show_idx(eq->rhs) +
                       " is satisfiable, so this branch cannot be dismissed",
                   t->span);
      if (trace_) trace_->aborts[t.get()] = {d, eq->lhs, eq->rhs};
      return std::nullopt;
    }

    if (const TmFold* n = std::get_if<TmFold>(&t->node)) {
      auto [head, args] = spine_head_form(ty);
      const TyMu* mu = std::get_if<TyMu>(&head->node);
      if (!mu)
        return err(R::not_mu, "fold only checks against an applied recursive type", t->span, ty);
      if (kind_arity(mu->kind) != args.size())
        return err(R::not_mu,
                   "the recursive type takes " + std::to_string(kind_arity(mu->kind)) +
                       " index arguments but is applied to " + std::to_string(args.size()),
                   t->span, ty);
      std::optional<TypePtr> unfolded = unfold_fixpoint(mu->name, mu->body, args, head);
      if (!unfolded)
        return err(R::not_mu, "the recursive type's body does not bind its index arguments",
                   t->span, ty);
      return check(d, xi, g, n->body, *unfolded);
    }

    if (const TmRec* n = std::get_if<TmRec>(&t->node)) {
      const TyArrow* a = std::get_if<TyArrow>(&ty->node);
      if (!a) return err(R::mismatch, "rec only checks against a function type", t->span, ty);
      auto [head, args] = spine_head_form(a->domain);
      const TyMu* mu = std::get_if<TyMu>(&head->node);
      if (!mu)
        return err(R::not_mu, "rec needs an applied recursive type as the function's domain",
                   t->span, ty, a->domain);
      if (auto e = fixpoint_shape(t, a->binders, args, head, mu->kind, "rec", "domain"))
        return e;
      TermSpine vars = binder_spine(a->binders);
      InferResult xn = recursion_var(xi, mu->name, head, n->body, t->span);
      if (TypeError* e = std::get_if<TypeError>(&xn)) return *e;
      const std::string& xname = std::get<TyVar>(std::get<TypePtr>(xn)->node).name;
      TypePtr peeled = *unfold_fixpoint(mu->name, mu->body, vars, std::get<TypePtr>(xn));
      TVarCtx xi2 = xi;
      xi2.items.push_back({xname, mu->kind});
      TypingCtx g2 = g;
      g2.items.push_back(
          {n->fvar, ty_arrow(a->binders, ty_app_spine(std::get<TypePtr>(xn), vars), a->codomain)});
      record_fn(t, d, g, ty);
      inst_.push_back({xname, head});
      CheckResult res = check(d, xi2, g2, n->body, ty_arrow(a->binders, peeled, a->codomain));
      inst_.pop_back();
      return res;
    }

    if (const TmCorec* n = std::get_if<TmCorec>(&t->node)) {
      const TyArrow* a = std::get_if<TyArrow>(&ty->node);
      if (!a) return err(R::mismatch, "corec only checks against a function type", t->span, ty);
      auto [head, args] = spine_head_form(a->codomain);
      const TyNu* nu = std::get_if<TyNu>(&head->node);
      if (!nu)
        return err(R::not_nu, "corec needs an applied corecursive type as the function's codomain",
                   t->span, ty, a->codomain);
      if (auto e = fixpoint_shape(t, a->binders, args, head, nu->kind, "corec", "codomain"))
        return e;
      TermSpine vars = binder_spine(a->binders);
      InferResult xn = recursion_var(xi, nu->name, head, n->body, t->span);
      if (TypeError* e = std::get_if<TypeError>(&xn)) return *e;
      const std::string& xname = std::get<TyVar>(std::get<TypePtr>(xn)->node).name;
      TypePtr peeled = *unfold_fixpoint(nu->name, nu->body, vars, std::get<TypePtr>(xn));
      TVarCtx xi2 = xi;
      xi2.items.push_back({xname, nu->kind});
      TypingCtx g2 = g;
      g2.items.push_back(
          {n->fvar, ty_arrow(a->binders, a->domain, ty_app_spine(std::get<TypePtr>(xn), vars))});
      record_fn(t, d, g, ty);
      inst_.push_back({xname, head});
      CheckResult res = check(d, xi2, g2, n->body, ty_arrow(a->binders, a->domain, peeled));
      inst_.pop_back();
      return res;
    }

    if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node)) {
      auto [head, args] = spine_head_form(ty);
      const TyRec* rc = std::get_if<TyRec>(&head->node);
      const char* who = n->suc ? "injs" : "inj0";
      if (!rc || args.empty())
        return err(R::not_strat,
                   std::string(who) + " only checks against a stratified type applied to its nat index",
                   t->span, ty);
      TermSpine rest(args.begin() + 1, args.end());
      if (!n->suc) {
        if (args[0]->tag != IdxTerm::Tag::Zero)
          return err(R::not_strat,
                     "inj0 needs the stratified type's index to be literally 0, but it is " +
                         show_idx(args[0]),
                     t->span, ty);
        return check(d, xi, g, n->body, ty_app_spine(rc->zero, rest));
      }
      if (args[0]->tag != IdxTerm::Tag::Suc)
        return err(R::not_strat,
                   "injs needs the stratified type's index to be literally a successor, but it is " +
                       show_idx(args[0]),
                   t->span, ty);
      return check(d, xi, g, n->body, ty_app_spine(strat_suc_unfold(*rc, head, args[0]->sub), rest));
    }

    if (const TmInd* n = std::get_if<TmInd>(&t->node)) {
      const TyArrow* a = std::get_if<TyArrow>(&ty->node);
      if (!a || a->binders.items.size() != 1 || !std::holds_alternative<TyUnit>(a->domain->node))
        return err(R::mismatch,
                   "ind only checks against a function type with one nat index binder and domain unit",
                   t->span, ty);
      record_fn(t, d, g, ty);
      const std::string& w = a->binders.items[0].name;
      IndexSubst z;
      z.entries.push_back({idx_zero(), w});
      if (auto e = check(d, xi, g, n->zero, type_apply_isubst(a->codomain, z))) return e;
      if (d.contains(n->ivar))
        return err(R::scope_error,
                   "index variable " + n->ivar + " shadows an earlier binder; rename it", t->span);
      IndexSubst toVar, toSuc;
      toVar.entries.push_back({idx_var(n->ivar), w});
      toSuc.entries.push_back({idx_suc(idx_var(n->ivar)), w});
      IndexCtx dd = ictx_extend(d, n->ivar);
      TypingCtx gg = g;
      gg.items.push_back({n->fvar, type_apply_isubst(a->codomain, toVar)});
      return check(dd, xi, gg, n->suc_branch, type_apply_isubst(a->codomain, toSuc));
    }

    // Synthesizing forms close the loop through the conversion rule.
    InferResult r = infer(d, xi, g, t);
    if (TypeError* e = std::get_if<TypeError>(&r)) return *e;
    TypePtr found = std::get<TypePtr>(r);
    if (!type_alpha_eq(found, ty))
      return err(R::mismatch, "the synthesized type does not match the expected one", t->span, ty,
                 found);
    return std::nullopt;
  }

  InferResult infer(const IndexCtx& d, const TVarCtx& xi, const TypingCtx& g, const TermPtr& t) {
    using R = TypeError::Reason;

    if (const TmVar* n = std::get_if<TmVar>(&t->node)) {
      const TypePtr* ty = g.lookup(n->name);
      if (!ty) return err(R::scope_error, "unbound variable " + n->name, t->span);
      return *ty;
    }

    if (const TmApp* n = std::get_if<TmApp>(&t->node)) {
      InferResult fr = infer(d, xi, g, n->fn);
      if (TypeError* e = std::get_if<TypeError>(&fr)) return *e;
      TypePtr fty = std::get<TypePtr>(fr);
      const TyArrow* a = std::get_if<TyArrow>(&fty->node);
      if (!a)
        return err(R::not_function, "the application head must synthesize a function type",
                   n->fn->span, nullptr, fty);
      if (n->spine.size() != a->binders.items.size())
        return err(R::spine_shape,
                   "this application supplies " + std::to_string(n->spine.size()) +
                       " index arguments but the function expects " +
                       std::to_string(a->binders.items.size()),
                   t->span, fty);
      for (const IdxPtr& m : n->spine)
        if (!idx_check(d, m))
          return err(R::index_error, "index argument " + show_idx(m) + " is not well-sorted here",
                     t->span);
      IndexSubst th = spine_subst(a->binders, n->spine);
      if (auto e = check(d, xi, g, n->arg, type_apply_isubst(a->domain, th))) return *e;
      return type_apply_isubst(a->codomain, th);
    }

    if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node)) {
      InferResult br = infer(d, xi, g, n->body);
      if (TypeError* e = std::get_if<TypeError>(&br)) return *e;
      TypePtr bty = std::get<TypePtr>(br);
      auto [head, args] = spine_head_form(bty);
      const TyNu* nu = std::get_if<TyNu>(&head->node);
      if (!nu)
        return err(R::not_nu, "out_nu needs its argument to synthesize an applied corecursive type",
                   t->span, nullptr, bty);
      if (kind_arity(nu->kind) != args.size())
        return err(R::not_nu,
                   "the corecursive type takes " + std::to_string(kind_arity(nu->kind)) +
                       " index arguments but is applied to " + std::to_string(args.size()),
                   t->span, nullptr, bty);
      std::optional<TypePtr> unfolded = unfold_fixpoint(nu->name, nu->body, args, head);
      if (!unfolded)
        return err(R::not_nu, "the corecursive type's body does not bind its index arguments",
                   t->span, nullptr, bty);
      return *unfolded;
    }

    if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node)) {
      InferResult br = infer(d, xi, g, n->body);
      if (TypeError* e = std::get_if<TypeError>(&br)) return *e;
      TypePtr bty = std::get<TypePtr>(br);
      auto [head, args] = spine_head_form(bty);
      const TyRec* rc = std::get_if<TyRec>(&head->node);
      const char* who = n->suc ? "outs" : "out0";
      if (!rc || args.empty())
        return err(R::not_strat,
                   std::string(who) +
                       " needs its argument to synthesize a stratified type applied to its nat index",
                   t->span, nullptr, bty);
      TermSpine rest(args.begin() + 1, args.end());
      if (!n->suc) {
        if (args[0]->tag != IdxTerm::Tag::Zero)
          return err(R::not_strat,
                     "out0 needs the stratified type's index to be literally 0, but it is " +
                         show_idx(args[0]),
                     t->span, nullptr, bty);
        return ty_app_spine(rc->zero, rest);
      }
      if (args[0]->tag != IdxTerm::Tag::Suc)
        return err(R::not_strat,
                   "outs needs the stratified type's index to be literally a successor, but it is " +
                       show_idx(args[0]),
                   t->span, nullptr, bty);
      return ty_app_spine(strat_suc_unfold(*rc, head, args[0]->sub), rest);
    }

    if (const TmAnnot* n = std::get_if<TmAnnot>(&t->node)) {
      if (auto ke = kind_check(d, xi, n->type, kind_star()))
        return err(R::index_error, "the annotation is not a well-formed type: " + ke->detail,
                   ke->span.known() ? ke->span : t->span);
      if (auto e = check(d, xi, g, n->body, n->type)) return *e;
      return n->type;
    }

    return err(R::cannot_infer,
               "this term form does not synthesize a type; add a type annotation", t->span);
  }

 private:
  Trace* trace_;
  // Instantiations of enclosing recursion variables, innermost last. Applied
  // to everything recorded in the trace so value-level re-checks run with an
  // empty type variable context.
  std::vector<std::pair<std::string, TypePtr>> inst_;

  static TypeError err(TypeError::Reason r, std::string detail, Span sp, TypePtr expected = nullptr,
                       TypePtr found = nullptr) {
    return {r, std::move(detail), sp, std::move(expected), std::move(found)};
  }

  static TermSpine binder_spine(const SortSpine& binders) {
    TermSpine vars;
    vars.reserve(binders.items.size());
    for (const IdxBinding& b : binders.items) vars.push_back(idx_var(b.name));
    return vars;
  }

  // Shared shape requirements of rec and corec: the fixpoint type is applied
  // to exactly the arrow's binders in order, the binders are distinct and do
  // not occur free in the fixpoint type itself, and the kind arity matches.
  CheckResult fixpoint_shape(const TermPtr& t, const SortSpine& binders, const TermSpine& args,
                             const TypePtr& head, const KindPtr& kind, const char* who,
                             const char* where) {
    using R = TypeError::Reason;
    if (args.size() != binders.items.size())
      return err(R::rec_shape,
                 std::string(who) + " needs the " + where +
                     "'s type to be applied to exactly the bound index variables, in order",
                 t->span);
    for (size_t i = 0; i < args.size(); ++i)
      if (args[i]->tag != IdxTerm::Tag::Var || args[i]->var != binders.items[i].name)
        return err(R::rec_shape,
                   std::string(who) + " needs the " + where +
                       "'s type to be applied to exactly the bound index variables, in order",
                   t->span);
    for (size_t i = 0; i < binders.items.size(); ++i)
      for (size_t j = i + 1; j < binders.items.size(); ++j)
        if (binders.items[i].name == binders.items[j].name)
          return err(R::rec_shape,
                     std::string(who) + " needs distinct index binders in its type", t->span);
    if (kind_arity(kind) != args.size())
      return err(R::rec_shape,
                 "the fixpoint type takes " + std::to_string(kind_arity(kind)) +
                     " index arguments but is applied to " + std::to_string(args.size()),
                 t->span);
    std::vector<std::string> fiv = ty_free_ivars(head);
    for (const IdxBinding& b : binders.items)
      if (std::find(fiv.begin(), fiv.end(), b.name) != fiv.end())
        return err(R::rec_shape,
                   "index binder " + b.name + " occurs free in the fixpoint type; rename it",
                   t->span);
    TermSpine vars = binder_spine(binders);
    const TypePtr* body = nullptr;
    const std::string* tvar = nullptr;
    if (const TyMu* mu = std::get_if<TyMu>(&head->node)) {
      body = &mu->body;
      tvar = &mu->name;
    } else {
      const TyNu& nu = std::get<TyNu>(head->node);
      body = &nu.body;
      tvar = &nu.name;
    }
    if (!unfold_fixpoint(*tvar, *body, vars, ty_var(*tvar)))
      return err(R::rec_shape, "the fixpoint type's body does not bind its index arguments",
                 t->span);
    return std::nullopt;
  }

  // The abstract recursion variable a rec or corec body is checked under. Its
  // source name is the fixpoint's own binder; when that collides with an
  // enclosing recursion variable, a fresh name keeps the instantiation stack
  // unambiguous. The rename is confined to types, so a body whose annotations
  // mention the colliding name has to be renamed by hand instead.
  InferResult recursion_var(const TVarCtx& xi, const std::string& name, const TypePtr& head,
                            const TermPtr& body, Span sp) const {
    if (!xi.contains(name)) return ty_var(name);
    if (term_mentions_tvar(body, name))
      return err(TypeError::Reason::scope_error,
                 "recursion variable " + name +
                     " shadows an enclosing one that the body still mentions; rename one of the "
                     "fixpoint binders",
                 sp);
    std::vector<std::string> headftv = ty_free_tvars(head);
    std::string fresh = fresh_name(name, [&](const std::string& c) {
      if (xi.contains(c)) return true;
      if (std::find(headftv.begin(), headftv.end(), c) != headftv.end()) return true;
      for (const auto& p : inst_)
        if (p.first == c) return true;
      return term_mentions_tvar(body, c);
    });
    return ty_var(fresh);
  }

  TypePtr close_tvars(TypePtr t) const {
    for (auto it = inst_.rbegin(); it != inst_.rend(); ++it)
      t = type_subst_tvar(t, it->first, it->second);
    return t;
  }

  TermPtr close_tvars_term(TermPtr t) const {
    for (auto it = inst_.rbegin(); it != inst_.rend(); ++it)
      t = term_subst_tvar(t, it->first, it->second);
    return t;
  }

  void record_fn(const TermPtr& t, const IndexCtx& d, const TypingCtx& g, const TypePtr& ty) {
    if (!trace_) return;
    TypingCtx gg;
    gg.items.reserve(g.items.size());
    for (const TermBinding& b : g.items) gg.items.push_back({b.name, close_tvars(b.type)});
    trace_->fns[t.get()] = {d, std::move(gg), close_tvars(ty), close_tvars_term(t)};
  }
};

// ---- convenience wrappers ------------------------------------------------------

inline CheckResult check(const IndexCtx& d, const TVarCtx& xi, const TypingCtx& g,
                         const TermPtr& t, const TypePtr& ty, Trace* trace = nullptr) {
  Checker ck(trace);
  return ck.check(d, xi, g, t, ty);
}

inline InferResult infer(const IndexCtx& d, const TVarCtx& xi, const TypingCtx& g,
                         const TermPtr& t, Trace* trace = nullptr) {
  Checker ck(trace);
  return ck.infer(d, xi, g, t);
}

}  // namespace tores
