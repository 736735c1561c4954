// Big-step evaluator over closed, checked terms. Values close over their
// environments instead of substituting, corecursive applications stay
// suspended until out_nu forces them, and every step burns one unit of fuel
// so evaluation always returns. A value audit is provided that replays the
// checker's recorded annotations against runtime values.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tores/printer.hpp"
#include "tores/syntax.hpp"
#include "tores/typing.hpp"

namespace tores {

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

// Runtime index environments are ground substitutions; lookups are last-wins
// like every other context.
using IndexEnv = IndexSubst;

struct ValueBinding {
  std::string name;
  ValuePtr value;
};

struct ValueEnv {
  std::vector<ValueBinding> items;
  const ValuePtr* lookup(const std::string& n) const {
    for (auto it = items.rbegin(); it != items.rend(); ++it)
      if (it->name == n) return &it->value;
    return nullptr;
  }
};

struct VUnit {};
struct VRefl {};
struct VPair {
  ValuePtr left, right;
};
struct VInj {
  int side = 1;
  ValuePtr body;
};
struct VPack {
  IdxPtr witness;  // ground
  ValuePtr body;
};
struct VFold {
  ValuePtr body;
};
struct VInjIdx {
  bool suc = false;
  ValuePtr body;
};
// One closure form covers fn, rec, corec, and ind: the node plus the
// environments it was built under.
struct VClosure {
  TermPtr code;
  IndexEnv ienv;
  ValueEnv venv;
};
// A corecursive application; out_nu forces it one layer.
struct VCorecApp {
  ValuePtr fn;  // closure over a corec node
  TermSpine spine;  // ground
  ValuePtr arg;
};

struct Value {
  std::variant<VUnit, VRefl, VPair, VInj, VPack, VFold, VInjIdx, VClosure, VCorecApp> node;
};

template <typename N>
ValuePtr mk_value(N node) {
  return std::make_shared<Value>(Value{std::move(node)});
}

struct EvalOutcome {
  ValuePtr value;  // set on success
  bool out_of_fuel = false;
  std::string error;  // invariant violation; unreachable from checked programs

  bool ok() const { return value != nullptr; }
};

inline EvalOutcome eval_ok(ValuePtr v) { return {std::move(v), false, ""}; }
inline EvalOutcome eval_spent() { return {nullptr, true, ""}; }
inline EvalOutcome eval_wrong(std::string msg) { return {nullptr, false, std::move(msg)}; }

inline constexpr long kDefaultFuel = 1'000'000;

// One emitted line per rule fired; tests count them and the CLI prints them.
struct EvalStep {
  const char* rule;
  const Term* at;
};
using EvalSink = std::function<void(const EvalStep&)>;

class Evaluator {
 public:
  explicit Evaluator(long fuel = kDefaultFuel, EvalSink sink = {})
      : fuel_(fuel), sink_(std::move(sink)) {}

  long fuel_left() const { return fuel_; }

  EvalOutcome eval(const TermPtr& t, const IndexEnv& ie, const ValueEnv& ve) {
    if (fuel_-- <= 0) return eval_spent();
    if (const TmVar* n = std::get_if<TmVar>(&t->node)) {
      step("var", t);
      const ValuePtr* v = ve.lookup(n->name);
      if (!v) return eval_wrong("unbound variable " + n->name);
      return eval_ok(*v);
    }
    if (std::get_if<TmUnit>(&t->node)) {
      step("unit", t);
      return eval_ok(mk_value(VUnit{}));
    }
    if (std::get_if<TmRefl>(&t->node)) {
      step("refl", t);
      return eval_ok(mk_value(VRefl{}));
    }
    if (std::get_if<TmLam>(&t->node) || std::get_if<TmRec>(&t->node) ||
        std::get_if<TmCorec>(&t->node) || std::get_if<TmInd>(&t->node)) {
      step("close", t);
      return eval_ok(mk_value(VClosure{t, ie, ve}));
    }
    if (const TmApp* n = std::get_if<TmApp>(&t->node)) {
      step("app", t);
      EvalOutcome f = eval(n->fn, ie, ve);
      if (!f.ok()) return f;
      EvalOutcome a = eval(n->arg, ie, ve);
      if (!a.ok()) return a;
      TermSpine spine;
      for (const IdxPtr& m : n->spine) {
        IdxPtr g = subst_apply(m, ie);
        if (!idx_ground(g)) return eval_wrong("open index argument " + show_idx(g));
        spine.push_back(std::move(g));
      }
      return apply(f.value, spine, a.value);
    }
    if (const TmPair* n = std::get_if<TmPair>(&t->node)) {
      step("pair", t);
      EvalOutcome l = eval(n->left, ie, ve);
      if (!l.ok()) return l;
      EvalOutcome r = eval(n->right, ie, ve);
      if (!r.ok()) return r;
      return eval_ok(mk_value(VPair{l.value, r.value}));
    }
    if (const TmSplit* n = std::get_if<TmSplit>(&t->node)) {
      step("split", t);
      EvalOutcome s = eval(n->scrut, ie, ve);
      if (!s.ok()) return s;
      const VPair* p = std::get_if<VPair>(&s.value->node);
      if (!p) return eval_wrong("split scrutinee is not a pair");
      ValueEnv ve2 = ve;
      ve2.items.push_back({n->x1, p->left});
      ve2.items.push_back({n->x2, p->right});
      return eval(n->body, ie, ve2);
    }
    if (const TmInj* n = std::get_if<TmInj>(&t->node)) {
      step("inj", t);
      EvalOutcome b = eval(n->body, ie, ve);
      if (!b.ok()) return b;
      return eval_ok(mk_value(VInj{n->side, b.value}));
    }
    if (const TmCase* n = std::get_if<TmCase>(&t->node)) {
      step("case", t);
      EvalOutcome s = eval(n->scrut, ie, ve);
      if (!s.ok()) return s;
      const VInj* i = std::get_if<VInj>(&s.value->node);
      if (!i) return eval_wrong("case scrutinee is not an injection");
      ValueEnv ve2 = ve;
      if (i->side == 1) {
        ve2.items.push_back({n->x1, i->body});
        return eval(n->left, ie, ve2);
      }
      ve2.items.push_back({n->x2, i->body});
      return eval(n->right, ie, ve2);
    }
    if (const TmPack* n = std::get_if<TmPack>(&t->node)) {
      step("pack", t);
      IdxPtr w = subst_apply(n->witness, ie);
      if (!idx_ground(w)) return eval_wrong("open pack witness " + show_idx(w));
      EvalOutcome b = eval(n->body, ie, ve);
      if (!b.ok()) return b;
      return eval_ok(mk_value(VPack{std::move(w), b.value}));
    }
    if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node)) {
      step("unpack", t);
      EvalOutcome s = eval(n->scrut, ie, ve);
      if (!s.ok()) return s;
      const VPack* p = std::get_if<VPack>(&s.value->node);
      if (!p) return eval_wrong("unpack scrutinee is not a pack");
      IndexEnv ie2 = ie;
      ie2.entries.push_back({p->witness, n->ivar});
      ValueEnv ve2 = ve;
      ve2.items.push_back({n->xvar, p->body});
      return eval(n->body, ie2, ve2);
    }
    if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
      step("eqelim", t);
      EvalOutcome s = eval(n->scrut, ie, ve);
      if (!s.ok()) return s;
      if (!std::get_if<VRefl>(&s.value->node))
        return eval_wrong("eqelim scrutinee is not refl");
      // Without a stated unifier the body only mentions surviving variables,
      // whose runtime values the ambient environment already holds. A stated
      // unifier renames them, so solve for its context against the ambient
      // values of its domain labels.
      if (!n->has_unifier) return eval(n->body, ie, ve);
      IndexSubst ambient;
      for (const SubstEntry& e : n->subst.entries) {
        const IdxPtr* g = ie.lookup(e.var);
        if (!g || !idx_ground(*g))
          return eval_wrong("eqelim domain variable " + e.var + " has no ground value");
        ambient.entries.push_back({*g, e.var});
      }
      MatchResult m = match_subst(n->ctx, n->subst, ambient);
      if (match_failed(m))
        return eval_wrong("eqelim unifier does not match the runtime environment");
      Matched& mm = std::get<Matched>(m);
      if (!mm.ctx.items.empty())
        return eval_wrong("eqelim unifier left variables uninstantiated");
      return eval(n->body, mm.subst, ve);
    }
    if (std::get_if<TmEqAbort>(&t->node)) {
      step("eqabort", t);
      return eval_wrong("eqabort reached at runtime");
    }
    if (const TmFold* n = std::get_if<TmFold>(&t->node)) {
      step("fold", t);
      EvalOutcome b = eval(n->body, ie, ve);
      if (!b.ok()) return b;
      return eval_ok(mk_value(VFold{b.value}));
    }
    if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node)) {
      step("out_nu", t);
      EvalOutcome b = eval(n->body, ie, ve);
      if (!b.ok()) return b;
      return force(b.value);
    }
    if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node)) {
      step(n->suc ? "injs" : "inj0", t);
      EvalOutcome b = eval(n->body, ie, ve);
      if (!b.ok()) return b;
      return eval_ok(mk_value(VInjIdx{n->suc, b.value}));
    }
    if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node)) {
      step(n->suc ? "outs" : "out0", t);
      EvalOutcome b = eval(n->body, ie, ve);
      if (!b.ok()) return b;
      const VInjIdx* i = std::get_if<VInjIdx>(&b.value->node);
      if (!i || i->suc != n->suc)
        return eval_wrong("stratified projection does not match its injection");
      return eval_ok(i->body);
    }
    const TmAnnot& a = std::get<TmAnnot>(t->node);
    step("annot", t);
    return eval(a.body, ie, ve);
  }

  // Applies a function value to ground index arguments and an argument value.
  EvalOutcome apply(const ValuePtr& vf, const TermSpine& spine, const ValuePtr& va) {
    if (fuel_-- <= 0) return eval_spent();
    const VClosure* cl = std::get_if<VClosure>(&vf->node);
    if (!cl) return eval_wrong("application head is not a function value");
    if (const TmLam* n = std::get_if<TmLam>(&cl->code->node)) {
      step("app_fn", cl->code.get());
      if (n->ivars.size() != spine.size()) return eval_wrong("index spine arity mismatch");
      IndexEnv ie2 = cl->ienv;
      for (size_t i = 0; i < spine.size(); ++i) ie2.entries.push_back({spine[i], n->ivars[i]});
      ValueEnv ve2 = cl->venv;
      ve2.items.push_back({n->arg, va});
      return eval(n->body, ie2, ve2);
    }
    if (const TmRec* n = std::get_if<TmRec>(&cl->code->node)) {
      step("app_rec", cl->code.get());
      const VFold* f = std::get_if<VFold>(&va->node);
      if (!f) return eval_wrong("rec applied to a non-fold value");
      ValueEnv ve2 = cl->venv;
      ve2.items.push_back({n->fvar, vf});
      EvalOutcome b = eval(n->body, cl->ienv, ve2);
      if (!b.ok()) return b;
      return apply(b.value, spine, f->body);
    }
    if (std::get_if<TmCorec>(&cl->code->node)) {
      step("app_corec", cl->code.get());
      return eval_ok(mk_value(VCorecApp{vf, spine, va}));
    }
    if (const TmInd* n = std::get_if<TmInd>(&cl->code->node)) {
      if (spine.size() != 1) return eval_wrong("ind expects exactly one index argument");
      if (spine[0]->tag == IdxTerm::Tag::Zero) {
        step("app_ind_zero", cl->code.get());
        return eval(n->zero, cl->ienv, cl->venv);
      }
      if (spine[0]->tag != IdxTerm::Tag::Suc)
        return eval_wrong("ind applied to an open index");
      step("app_ind_suc", cl->code.get());
      EvalOutcome prev = apply(vf, {spine[0]->sub}, mk_value(VUnit{}));
      if (!prev.ok()) return prev;
      IndexEnv ie2 = cl->ienv;
      ie2.entries.push_back({spine[0]->sub, n->ivar});
      ValueEnv ve2 = cl->venv;
      ve2.items.push_back({n->fvar, prev.value});
      return eval(n->suc_branch, ie2, ve2);
    }
    return eval_wrong("application head is not a function value");
  }

  // Unfolds a suspended corecursive application by one layer.
  EvalOutcome force(const ValuePtr& v) {
    const VCorecApp* ca = std::get_if<VCorecApp>(&v->node);
    if (!ca) return eval_wrong("out_nu forced a non-corecursive value");
    const VClosure* cl = std::get_if<VClosure>(&ca->fn->node);
    const TmCorec* n = cl ? std::get_if<TmCorec>(&cl->code->node) : nullptr;
    if (!n) return eval_wrong("out_nu forced a non-corecursive value");
    step("force_corec", cl->code.get());
    ValueEnv ve2 = cl->venv;
    ve2.items.push_back({n->fvar, ca->fn});
    EvalOutcome b = eval(n->body, cl->ienv, ve2);
    if (!b.ok()) return b;
    return apply(b.value, ca->spine, ca->arg);
  }

 private:
  void step(const char* rule, const Term* at) {
    if (sink_) sink_(EvalStep{rule, at});
  }
  void step(const char* rule, const TermPtr& at) { step(rule, at.get()); }

  long fuel_;
  EvalSink sink_;
};

// Evaluates a closed term with fresh environments.
inline EvalOutcome eval_term(const TermPtr& t, long fuel = kDefaultFuel, EvalSink sink = {}) {
  Evaluator ev(fuel, std::move(sink));
  return ev.eval(t, IndexEnv{}, ValueEnv{});
}

// ---- reading values back as terms -------------------------------------------

// Reifies a value as the closed normal-form term it denotes: closures become
// their code with both environments substituted in.
inline TermPtr value_to_term(const ValuePtr& v) {
  if (std::get_if<VUnit>(&v->node)) return tm_unit();
  if (std::get_if<VRefl>(&v->node)) return tm_refl();
  if (const VPair* n = std::get_if<VPair>(&v->node))
    return tm_pair(value_to_term(n->left), value_to_term(n->right));
  if (const VInj* n = std::get_if<VInj>(&v->node))
    return tm_inj(n->side, value_to_term(n->body));
  if (const VPack* n = std::get_if<VPack>(&v->node))
    return tm_pack(n->witness, value_to_term(n->body));
  if (const VFold* n = std::get_if<VFold>(&v->node)) return tm_fold(value_to_term(n->body));
  if (const VInjIdx* n = std::get_if<VInjIdx>(&v->node))
    return tm_inj_idx(n->suc, value_to_term(n->body));
  if (const VClosure* n = std::get_if<VClosure>(&v->node)) {
    TermPtr code = term_ground_isubst(n->code, n->ienv);
    // Later bindings shadow earlier ones, so substitute them first; the
    // leftover occurrences then belong to the outer entries.
    for (auto it = n->venv.items.rbegin(); it != n->venv.items.rend(); ++it)
      code = term_subst_var(code, it->name, value_to_term(it->value));
    return code;
  }
  const VCorecApp& ca = std::get<VCorecApp>(v->node);
  return tm_app(value_to_term(ca.fn), ca.spine, value_to_term(ca.arg));
}

inline std::string show_value(const ValuePtr& v) { return show_term(value_to_term(v)); }

// ---- runtime value audit -----------------------------------------------------

// Checks machine values against closed types by replaying the annotations the
// checker recorded for closure code. Returns an explanation on failure.
inline std::optional<std::string> value_check(const Trace& tr, const ValuePtr& v,
                                              const TypePtr& ty);

namespace detail {

inline std::optional<std::string> env_check(const Trace& tr, const ValueEnv& ve,
                                            const TypingCtx& g) {
  if (ve.items.size() != g.items.size())
    return "closure environment has " + std::to_string(ve.items.size()) +
           " entries but the recorded context has " + std::to_string(g.items.size());
  for (size_t i = 0; i < g.items.size(); ++i) {
    if (ve.items[i].name != g.items[i].name)
      return "closure environment binds " + ve.items[i].name +
             " where the recorded context binds " + g.items[i].name;
    if (auto e = value_check(tr, ve.items[i].value, g.items[i].type)) return e;
  }
  return std::nullopt;
}

// Validates a closure against its recorded annotation and returns the closed
// type its code was checked at.
inline std::variant<TypePtr, std::string> closure_check(const Trace& tr, const VClosure& cl) {
  auto it = tr.fns.find(cl.code.get());
  if (it == tr.fns.end()) return std::string("closure code was never checked");
  const FnAnnot& a = it->second;
  IndexSubst th;
  for (const IdxBinding& b : a.d.items) {
    const IdxPtr* g = cl.ienv.lookup(b.name);
    if (!g || !idx_ground(*g))
      return "closure index environment lacks a ground value for " + b.name;
    th.entries.push_back({*g, b.name});
  }
  if (auto e = env_check(tr, cl.venv, ctx_apply_isubst(a.g, th))) return *e;
  if (check(a.d, TVarCtx{}, a.g, a.code, a.type))
    return std::string("recorded annotation no longer checks");
  return type_apply_isubst(a.type, th);
}

}  // namespace detail

inline std::optional<std::string> value_check(const Trace& tr, const ValuePtr& v,
                                              const TypePtr& ty) {
  if (std::get_if<VUnit>(&v->node)) {
    if (std::holds_alternative<TyUnit>(ty->node)) return std::nullopt;
    return "unit value at type " + show_type(ty);
  }
  if (std::get_if<VRefl>(&v->node)) {
    const TyEq* e = std::get_if<TyEq>(&ty->node);
    if (e && idx_eq(e->lhs, e->rhs)) return std::nullopt;
    return "refl at type " + show_type(ty);
  }
  if (const VPair* n = std::get_if<VPair>(&v->node)) {
    const TyProd* p = std::get_if<TyProd>(&ty->node);
    if (!p) return "pair value at type " + show_type(ty);
    if (auto e = value_check(tr, n->left, p->left)) return e;
    return value_check(tr, n->right, p->right);
  }
  if (const VInj* n = std::get_if<VInj>(&v->node)) {
    const TySum* s = std::get_if<TySum>(&ty->node);
    if (!s) return "injection at type " + show_type(ty);
    return value_check(tr, n->body, n->side == 1 ? s->left : s->right);
  }
  if (const VPack* n = std::get_if<VPack>(&v->node)) {
    const TySigma* s = std::get_if<TySigma>(&ty->node);
    if (!s) return "pack at type " + show_type(ty);
    IndexSubst th;
    th.entries.push_back({n->witness, s->name});
    return value_check(tr, n->body, type_apply_isubst(s->body, th));
  }
  if (const VFold* n = std::get_if<VFold>(&v->node)) {
    auto [head, args] = spine_head_form(ty);
    const TyMu* mu = std::get_if<TyMu>(&head->node);
    if (!mu) return "fold at type " + show_type(ty);
    std::optional<TypePtr> unfolded = unfold_fixpoint(mu->name, mu->body, args, head);
    if (!unfolded) return "recursive type does not bind its arguments";
    return value_check(tr, n->body, *unfolded);
  }
  if (const VInjIdx* n = std::get_if<VInjIdx>(&v->node)) {
    auto [head, args] = spine_head_form(ty);
    const TyRec* rc = std::get_if<TyRec>(&head->node);
    if (!rc || args.empty()) return "stratified value at type " + show_type(ty);
    TermSpine rest(args.begin() + 1, args.end());
    if (!n->suc) {
      if (args[0]->tag != IdxTerm::Tag::Zero) return "inj0 at nonzero index";
      return value_check(tr, n->body, ty_app_spine(rc->zero, rest));
    }
    if (args[0]->tag != IdxTerm::Tag::Suc) return "injs at non-successor index";
    return value_check(tr, n->body,
                       ty_app_spine(strat_suc_unfold(*rc, head, args[0]->sub), rest));
  }
  if (const VClosure* n = std::get_if<VClosure>(&v->node)) {
    auto r = detail::closure_check(tr, *n);
    if (std::string* e = std::get_if<std::string>(&r)) return *e;
    if (!type_alpha_eq(std::get<TypePtr>(r), ty))
      return "closure checked at " + show_type(std::get<TypePtr>(r)) + " but used at " +
             show_type(ty);
    return std::nullopt;
  }
  const VCorecApp& ca = std::get<VCorecApp>(v->node);
  const VClosure* cl = std::get_if<VClosure>(&ca.fn->node);
  if (!cl) return std::optional<std::string>("corecursive application head is not a closure");
  auto r = detail::closure_check(tr, *cl);
  if (std::string* e = std::get_if<std::string>(&r)) return *e;
  const TyArrow* a = std::get_if<TyArrow>(&std::get<TypePtr>(r)->node);
  if (!a) return std::optional<std::string>("corecursive head is not a function");
  if (a->binders.items.size() != ca.spine.size())
    return std::optional<std::string>("corecursive application spine arity mismatch");
  IndexSubst th = spine_subst(a->binders, ca.spine);
  if (auto e = value_check(tr, ca.arg, type_apply_isubst(a->domain, th))) return e;
  TypePtr result = type_apply_isubst(a->codomain, th);
  if (!type_alpha_eq(result, ty))
    return "corecursive application produces " + show_type(result) + " but is used at " +
           show_type(ty);
  return std::nullopt;
}

}  // namespace tores
