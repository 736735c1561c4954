#pragma once

// Declaration-level driver: resolves names by inlining earlier declarations
// (the core language has no definitional constants), kind-checks every type
// declaration, and type-checks every definition against its annotation.
// Inlined copies get fresh term nodes so the checking trace, which is keyed
// by node identity, stays unambiguous across use sites.

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tores/kinding.hpp"
#include "tores/parser.hpp"
#include "tores/printer.hpp"
#include "tores/typing.hpp"

namespace tores {

struct ElabType {
  std::string name;
  KindPtr kind;
  TypePtr body;  // aliases fully inlined
  Span span;
};

struct ElabDef {
  std::string name;
  TypePtr type;  // aliases fully inlined
  TermPtr term;  // aliases and earlier definitions fully inlined
  Span span;
};

struct Elab {
  std::vector<ElabType> types;
  std::vector<ElabDef> defs;
  Trace trace;
};

using ElabResult = std::variant<Elab, std::vector<Diagnostic>>;

inline bool elab_failed(const ElabResult& r) {
  return std::holds_alternative<std::vector<Diagnostic>>(r);
}

namespace detail {

inline Diagnostic diag_from_kind(const std::string& file, const Span& fallback,
                                 const KindError& e) {
  return {file, e.span.known() ? e.span : fallback, kind_error_code(e.reason), e.detail, "", ""};
}

inline Diagnostic diag_from_type(const std::string& file, const Span& fallback,
                                 const TypeError& e) {
  Diagnostic d{file, e.span.known() ? e.span : fallback, type_error_code(e.reason), e.detail, "",
               ""};
  if (e.expected) d.expected = show_type(e.expected);
  if (e.found) d.found = show_type(e.found);
  return d;
}

// Every index-variable name a program mentions, bound or free. Inlined copies
// of a definition draw replacement binder names from outside this pool, so a
// copy can never capture or shadow an index variable at its use site.
inline void idx_names(const IdxPtr& m, std::set<std::string>& out) {
  if (!m) return;
  switch (m->tag) {
    case IdxTerm::Tag::Zero: return;
    case IdxTerm::Tag::Suc: idx_names(m->sub, out); return;
    case IdxTerm::Tag::Var: out.insert(m->var); return;
  }
}

inline void ty_index_names(const TypePtr& t, std::set<std::string>& out) {
  if (!t) return;
  if (const TyProd* n = std::get_if<TyProd>(&t->node)) {
    ty_index_names(n->left, out);
    ty_index_names(n->right, out);
    return;
  }
  if (const TySum* n = std::get_if<TySum>(&t->node)) {
    ty_index_names(n->left, out);
    ty_index_names(n->right, out);
    return;
  }
  if (const TyArrow* n = std::get_if<TyArrow>(&t->node)) {
    for (const IdxBinding& b : n->binders.items) out.insert(b.name);
    ty_index_names(n->domain, out);
    ty_index_names(n->codomain, out);
    return;
  }
  if (const TySigma* n = std::get_if<TySigma>(&t->node)) {
    out.insert(n->name);
    ty_index_names(n->body, out);
    return;
  }
  if (const TyEq* n = std::get_if<TyEq>(&t->node)) {
    idx_names(n->lhs, out);
    idx_names(n->rhs, out);
    return;
  }
  if (const TyApp* n = std::get_if<TyApp>(&t->node)) {
    ty_index_names(n->head, out);
    idx_names(n->arg, out);
    return;
  }
  if (const TyLam* n = std::get_if<TyLam>(&t->node)) {
    out.insert(n->name);
    ty_index_names(n->body, out);
    return;
  }
  if (const TyMu* n = std::get_if<TyMu>(&t->node)) {
    ty_index_names(n->body, out);
    return;
  }
  if (const TyNu* n = std::get_if<TyNu>(&t->node)) {
    ty_index_names(n->body, out);
    return;
  }
  if (const TyRec* n = std::get_if<TyRec>(&t->node)) {
    ty_index_names(n->zero, out);
    out.insert(n->suc_name);
    ty_index_names(n->suc_branch, out);
    return;
  }
}

inline void term_index_names(const TermPtr& t, std::set<std::string>& out) {
  if (!t) return;
  if (const TmLam* n = std::get_if<TmLam>(&t->node)) {
    for (const std::string& iv : n->ivars) out.insert(iv);
    term_index_names(n->body, out);
    return;
  }
  if (const TmApp* n = std::get_if<TmApp>(&t->node)) {
    term_index_names(n->fn, out);
    for (const IdxPtr& m : n->spine) idx_names(m, out);
    term_index_names(n->arg, out);
    return;
  }
  if (const TmPair* n = std::get_if<TmPair>(&t->node)) {
    term_index_names(n->left, out);
    term_index_names(n->right, out);
    return;
  }
  if (const TmSplit* n = std::get_if<TmSplit>(&t->node)) {
    term_index_names(n->scrut, out);
    term_index_names(n->body, out);
    return;
  }
  if (const TmInj* n = std::get_if<TmInj>(&t->node)) {
    term_index_names(n->body, out);
    return;
  }
  if (const TmCase* n = std::get_if<TmCase>(&t->node)) {
    term_index_names(n->scrut, out);
    term_index_names(n->left, out);
    term_index_names(n->right, out);
    return;
  }
  if (const TmPack* n = std::get_if<TmPack>(&t->node)) {
    idx_names(n->witness, out);
    term_index_names(n->body, out);
    return;
  }
  if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node)) {
    term_index_names(n->scrut, out);
    out.insert(n->ivar);
    term_index_names(n->body, out);
    return;
  }
  if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
    term_index_names(n->scrut, out);
    for (const IdxBinding& b : n->ctx.items) out.insert(b.name);
    for (const SubstEntry& e : n->subst.entries) {
      idx_names(e.term, out);
      out.insert(e.var);
    }
    term_index_names(n->body, out);
    return;
  }
  if (const TmEqAbort* n = std::get_if<TmEqAbort>(&t->node)) {
    term_index_names(n->scrut, out);
    return;
  }
  if (const TmFold* n = std::get_if<TmFold>(&t->node)) {
    term_index_names(n->body, out);
    return;
  }
  if (const TmRec* n = std::get_if<TmRec>(&t->node)) {
    term_index_names(n->body, out);
    return;
  }
  if (const TmCorec* n = std::get_if<TmCorec>(&t->node)) {
    term_index_names(n->body, out);
    return;
  }
  if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node)) {
    term_index_names(n->body, out);
    return;
  }
  if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node)) {
    term_index_names(n->body, out);
    return;
  }
  if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node)) {
    term_index_names(n->body, out);
    return;
  }
  if (const TmInd* n = std::get_if<TmInd>(&t->node)) {
    term_index_names(n->zero, out);
    out.insert(n->ivar);
    term_index_names(n->suc_branch, out);
    return;
  }
  if (const TmAnnot* n = std::get_if<TmAnnot>(&t->node)) {
    term_index_names(n->body, out);
    ty_index_names(n->type, out);
    return;
  }
}

inline std::string mint(const std::string& base, std::set<std::string>& used) {
  std::string f = fresh_name(base, [&](const std::string& c) { return used.count(c) != 0; });
  used.insert(f);
  return f;
}

// Copy a definition body for inlining, renaming every index binder the term
// introduces to a name outside the pool. Checking keeps contexts of distinct
// index names, so copies must not reintroduce a name their host already binds.
// ren carries binder renames in scope as a substitution of variables.
inline TermPtr freshen_clone(const TermPtr& t, const IndexSubst& ren,
                             std::set<std::string>& used) {
  auto go = [&](const TermPtr& u) { return freshen_clone(u, ren, used); };
  if (const TmVar* n = std::get_if<TmVar>(&t->node)) return tm_var(n->name, t->span);
  if (std::get_if<TmUnit>(&t->node)) return tm_unit(t->span);
  if (const TmLam* n = std::get_if<TmLam>(&t->node)) {
    IndexSubst ren2 = ren;
    std::vector<std::string> ivars;
    for (const std::string& iv : n->ivars) {
      std::string f = mint(iv, used);
      ivars.push_back(f);
      ren2.entries.push_back({idx_var(f), iv});
    }
    return tm_lam(std::move(ivars), n->arg, freshen_clone(n->body, ren2, used), t->span);
  }
  if (const TmApp* n = std::get_if<TmApp>(&t->node)) {
    TermSpine sp;
    for (const IdxPtr& m : n->spine) sp.push_back(subst_apply(m, ren));
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
    return tm_pack(subst_apply(n->witness, ren), go(n->body), t->span);
  if (const TmUnpack* n = std::get_if<TmUnpack>(&t->node)) {
    std::string f = mint(n->ivar, used);
    IndexSubst ren2 = ren;
    ren2.entries.push_back({idx_var(f), n->ivar});
    return tm_unpack(go(n->scrut), f, n->xvar, freshen_clone(n->body, ren2, used), t->span);
  }
  if (std::get_if<TmRefl>(&t->node)) return tm_refl(t->span);
  if (const TmEqElim* n = std::get_if<TmEqElim>(&t->node)) {
    TermPtr sc = go(n->scrut);
    if (!n->has_unifier) return tm_eqelim(sc, go(n->body), t->span);
    // A stated unifier binds its own context; its range terms and the body
    // live under that context, while its domain labels name enclosing binders.
    IndexCtx ctx;
    IndexSubst ctx_ren;
    for (const IdxBinding& b : n->ctx.items) {
      std::string f = mint(b.name, used);
      ctx.items.push_back({f, b.sort});
      ctx_ren.entries.push_back({idx_var(f), b.name});
    }
    IndexSubst th;
    for (const SubstEntry& e : n->subst.entries) {
      std::string label = e.var;
      if (const IdxPtr* r = ren.lookup(label))
        if ((*r)->tag == IdxTerm::Tag::Var) label = (*r)->var;
      th.entries.push_back({subst_apply(e.term, ctx_ren), label});
    }
    return tm_eqelim_with(sc, std::move(ctx), std::move(th),
                          freshen_clone(n->body, ctx_ren, used), t->span);
  }
  if (const TmEqAbort* n = std::get_if<TmEqAbort>(&t->node))
    return tm_eqabort(go(n->scrut), t->span);
  if (const TmFold* n = std::get_if<TmFold>(&t->node)) return tm_fold(go(n->body), t->span);
  if (const TmRec* n = std::get_if<TmRec>(&t->node))
    return tm_rec(n->fvar, go(n->body), t->span);
  if (const TmCorec* n = std::get_if<TmCorec>(&t->node))
    return tm_corec(n->fvar, go(n->body), t->span);
  if (const TmOutNu* n = std::get_if<TmOutNu>(&t->node)) return tm_out_nu(go(n->body), t->span);
  if (const TmInjIdx* n = std::get_if<TmInjIdx>(&t->node))
    return tm_inj_idx(n->suc, go(n->body), t->span);
  if (const TmOutIdx* n = std::get_if<TmOutIdx>(&t->node))
    return tm_out_idx(n->suc, go(n->body), t->span);
  if (const TmInd* n = std::get_if<TmInd>(&t->node)) {
    std::string f = mint(n->ivar, used);
    IndexSubst ren2 = ren;
    ren2.entries.push_back({idx_var(f), n->ivar});
    return tm_ind(go(n->zero), f, n->fvar, freshen_clone(n->suc_branch, ren2, used), t->span);
  }
  const TmAnnot& n = std::get<TmAnnot>(t->node);
  return tm_annot(go(n.body), type_apply_isubst(n.type, ren), t->span);
}

}  // namespace detail

// Default ceiling on the node count of a fully inlined definition; guards
// against exponential blowup from repeated references.
inline constexpr size_t kElabNodeLimit = 1'000'000;

inline ElabResult elaborate(const Program& p, size_t node_limit = kElabNodeLimit) {
  Elab out;
  std::vector<Diagnostic> diags;
  std::vector<std::string> names;

  std::set<std::string> used;
  for (const Decl& decl : p.decls) {
    detail::ty_index_names(decl.type_body, used);
    detail::ty_index_names(decl.type_annot, used);
    detail::term_index_names(decl.term_body, used);
  }

  for (const Decl& decl : p.decls) {
    if (std::find(names.begin(), names.end(), decl.name) != names.end()) {
      diags.push_back({p.file, decl.span, "E001",
                       "duplicate declaration name " + decl.name, "", ""});
      continue;
    }

    if (decl.which == Decl::Which::Type) {
      TypePtr body = decl.type_body;
      for (const ElabType& a : out.types) body = type_subst_tvar(body, a.name, a.body);
      if (auto e = kind_check(IndexCtx{}, TVarCtx{}, body, decl.kind_annot)) {
        diags.push_back(detail::diag_from_kind(p.file, decl.span, *e));
        continue;
      }
      names.push_back(decl.name);
      out.types.push_back({decl.name, decl.kind_annot, body, decl.span});
      continue;
    }

    TypePtr ty = decl.type_annot;
    TermPtr term = decl.term_body;
    for (const ElabType& a : out.types) {
      ty = type_subst_tvar(ty, a.name, a.body);
      term = term_subst_tvar(term, a.name, a.body);
    }
    if (auto e = kind_check(IndexCtx{}, TVarCtx{}, ty, kind_star())) {
      diags.push_back(detail::diag_from_kind(p.file, decl.span, *e));
      continue;
    }
    bool too_big = false;
    for (const ElabDef& d : out.defs) {
      term = term_subst_var_with(term, d.name, [&] {
        return tm_annot(detail::freshen_clone(d.term, IndexSubst{}, used), d.type, d.span);
      });
      if (term_size(term) > node_limit) {
        diags.push_back({p.file, decl.span, "E002",
                         "definition " + decl.name + " exceeds " + std::to_string(node_limit) +
                             " nodes after inlining",
                         "", ""});
        too_big = true;
        break;
      }
    }
    if (too_big) continue;
    if (auto e = check(IndexCtx{}, TVarCtx{}, TypingCtx{}, term, ty, &out.trace)) {
      diags.push_back(detail::diag_from_type(p.file, decl.span, *e));
      continue;
    }
    names.push_back(decl.name);
    out.defs.push_back({decl.name, ty, term, decl.span});
  }

  if (!diags.empty()) return diags;
  return out;
}

}  // namespace tores
