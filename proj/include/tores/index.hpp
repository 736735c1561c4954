#pragma once

// Index language over the single sort nat: terms, contexts, substitutions,
// argument spines, plus first-order unification and (asymmetric) matching.
// Terms are immutable trees shared through shared_ptr, so copying any of the
// aggregates below is cheap.

#include <algorithm>
#include <cassert>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tores {

enum class Sort { Nat };

inline const char* show_sort(Sort) { return "nat"; }

struct IdxTerm;
using IdxPtr = std::shared_ptr<const IdxTerm>;

struct IdxTerm {
  enum class Tag { Zero, Suc, Var };
  Tag tag;
  IdxPtr sub;       // Suc payload
  std::string var;  // Var payload
};

inline IdxPtr idx_zero() {
  static const IdxPtr z = std::make_shared<IdxTerm>(IdxTerm{IdxTerm::Tag::Zero, nullptr, {}});
  return z;
}

inline IdxPtr idx_suc(IdxPtr m) {
  return std::make_shared<IdxTerm>(IdxTerm{IdxTerm::Tag::Suc, std::move(m), {}});
}

inline IdxPtr idx_var(std::string name) {
  return std::make_shared<IdxTerm>(IdxTerm{IdxTerm::Tag::Var, nullptr, std::move(name)});
}

// suc^n(0) helper, mostly for tests and numeral sugar in the parser.
inline IdxPtr idx_nat(unsigned n) {
  IdxPtr t = idx_zero();
  for (unsigned i = 0; i < n; ++i) t = idx_suc(t);
  return t;
}

struct IdxBinding {
  std::string name;
  Sort sort = Sort::Nat;
};

// Ordered, name-distinct telescope of index variables.
struct IndexCtx {
  std::vector<IdxBinding> items;

  bool contains(const std::string& n) const {
    return std::any_of(items.begin(), items.end(),
                       [&](const IdxBinding& b) { return b.name == n; });
  }
  std::optional<Sort> lookup(const std::string& n) const {
    for (auto it = items.rbegin(); it != items.rend(); ++it)
      if (it->name == n) return it->sort;
    return std::nullopt;
  }
  size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

inline IndexCtx ictx_extend(IndexCtx d, std::string name, Sort s = Sort::Nat) {
  d.items.push_back({std::move(name), s});
  return d;
}

inline bool ictx_wf(const IndexCtx& d) {
  for (size_t i = 0; i < d.items.size(); ++i)
    for (size_t j = i + 1; j < d.items.size(); ++j)
      if (d.items[i].name == d.items[j].name) return false;
  return true;
}

struct SubstEntry {
  IdxPtr term;
  std::string var;
};

// Simultaneous substitution [M1/u1, ..., Mk/uk]. Entries are stored in the
// same order as the domain context they instantiate; later entries win on
// lookup so composition can shadow without re-sorting.
struct IndexSubst {
  std::vector<SubstEntry> entries;

  const IdxPtr* lookup(const std::string& n) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      if (it->var == n) return &it->term;
    return nullptr;
  }
  size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// Binder spine (u1:U1, ..., uk:Uk) attached to function types; names must be
// pairwise distinct.
struct SortSpine {
  std::vector<IdxBinding> items;
  size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

inline bool spine_wf(const SortSpine& sp, const IndexCtx& outer) {
  for (size_t i = 0; i < sp.items.size(); ++i) {
    if (outer.contains(sp.items[i].name)) return false;
    for (size_t j = i + 1; j < sp.items.size(); ++j)
      if (sp.items[i].name == sp.items[j].name) return false;
  }
  return true;
}

// Index argument list M1 ... Mk supplied at an application site.
using TermSpine = std::vector<IdxPtr>;

// ---- basic operations ------------------------------------------------------

inline bool idx_check(const IndexCtx& d, const IdxPtr& m, Sort = Sort::Nat) {
  switch (m->tag) {
    case IdxTerm::Tag::Zero: return true;
    case IdxTerm::Tag::Suc: return idx_check(d, m->sub);
    case IdxTerm::Tag::Var: return d.lookup(m->var).has_value();
  }
  return false;
}

// Syntactic equality; there is no reduction on index terms.
inline bool idx_eq(const IdxPtr& a, const IdxPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case IdxTerm::Tag::Zero: return true;
    case IdxTerm::Tag::Suc: return idx_eq(a->sub, b->sub);
    case IdxTerm::Tag::Var: return a->var == b->var;
  }
  return false;
}

inline bool idx_ground(const IdxPtr& m) {
  switch (m->tag) {
    case IdxTerm::Tag::Zero: return true;
    case IdxTerm::Tag::Suc: return idx_ground(m->sub);
    case IdxTerm::Tag::Var: return false;
  }
  return false;
}

inline void idx_free_vars(const IdxPtr& m, std::vector<std::string>& out) {
  switch (m->tag) {
    case IdxTerm::Tag::Zero: return;
    case IdxTerm::Tag::Suc: idx_free_vars(m->sub, out); return;
    case IdxTerm::Tag::Var:
      if (std::find(out.begin(), out.end(), m->var) == out.end()) out.push_back(m->var);
      return;
  }
}

inline bool idx_occurs(const std::string& u, const IdxPtr& m) {
  switch (m->tag) {
    case IdxTerm::Tag::Zero: return false;
    case IdxTerm::Tag::Suc: return idx_occurs(u, m->sub);
    case IdxTerm::Tag::Var: return m->var == u;
  }
  return false;
}

// Homomorphic replacement of variables; variables outside the domain are kept.
inline IdxPtr subst_apply(const IdxPtr& m, const IndexSubst& th) {
  switch (m->tag) {
    case IdxTerm::Tag::Zero: return m;
    case IdxTerm::Tag::Suc: {
      IdxPtr sub = subst_apply(m->sub, th);
      return sub.get() == m->sub.get() ? m : idx_suc(sub);
    }
    case IdxTerm::Tag::Var: {
      const IdxPtr* hit = th.lookup(m->var);
      return hit ? *hit : m;
    }
  }
  return m;
}

// Entry-wise typing: D' |- Th : D, checked positionally against D.
inline bool subst_check(const IndexCtx& range, const IndexSubst& th, const IndexCtx& domain) {
  if (th.entries.size() != domain.items.size()) return false;
  for (size_t i = 0; i < th.entries.size(); ++i) {
    if (th.entries[i].var != domain.items[i].name) return false;
    if (!idx_check(range, th.entries[i].term)) return false;
  }
  return true;
}

// Composition Th1[Th2]: keep Th2 underneath and rewrite every Th1 entry by
// Th2. When the same variable ends up bound twice the later (rewritten Th1)
// entry replaces the earlier one, which collapses the identity overlaps
// produced by matching.
inline IndexSubst subst_compose(const IndexSubst& th1, const IndexSubst& th2) {
  IndexSubst out = th2;
  for (const SubstEntry& e : th1.entries) {
    IdxPtr rewritten = subst_apply(e.term, th2);
    auto hit = std::find_if(out.entries.begin(), out.entries.end(),
                            [&](const SubstEntry& o) { return o.var == e.var; });
    if (hit != out.entries.end()) out.entries.erase(hit);
    out.entries.push_back({std::move(rewritten), e.var});
  }
  return out;
}

inline IndexSubst id_subst(const IndexCtx& d) {
  IndexSubst th;
  th.entries.reserve(d.items.size());
  for (const IdxBinding& b : d.items) th.entries.push_back({idx_var(b.name), b.name});
  return th;
}

inline bool spine_check(const IndexCtx& d, const TermSpine& args, const SortSpine& binders) {
  if (args.size() != binders.items.size()) return false;
  for (const IdxPtr& m : args)
    if (!idx_check(d, m)) return false;
  return true;
}

// Pairs each binder with its argument: [M1/u1, ..., Mk/uk].
inline IndexSubst spine_subst(const SortSpine& binders, const TermSpine& args) {
  assert(binders.items.size() == args.size());
  IndexSubst th;
  th.entries.reserve(args.size());
  for (size_t i = 0; i < args.size(); ++i) th.entries.push_back({args[i], binders.items[i].name});
  return th;
}

// ---- unification -----------------------------------------------------------

struct Mgu {
  IndexCtx ctx;     // surviving variables, original order
  IndexSubst subst; // instantiates the full input context
};
struct Clash {};
using UnifyResult = std::variant<Mgu, Clash>;

inline bool unify_clashed(const UnifyResult& r) { return std::holds_alternative<Clash>(r); }

namespace detail {

// Removes u from d and builds id1,[m/u],id2 over the remaining variables.
inline Mgu eliminate_var(const IndexCtx& d, const std::string& u, const IdxPtr& m) {
  Mgu out;
  for (const IdxBinding& b : d.items) {
    if (b.name == u) {
      out.subst.entries.push_back({m, u});
    } else {
      out.ctx.items.push_back(b);
      out.subst.entries.push_back({idx_var(b.name), b.name});
    }
  }
  return out;
}

}  // namespace detail

// Most general unifier of M and N over d, or a clash. Both orientations of the
// variable rule are provided; when both sides are distinct variables the left
// one is eliminated.
inline UnifyResult unify(const IndexCtx& d, const IdxPtr& m, const IdxPtr& n) {
  using Tag = IdxTerm::Tag;
  if (m->tag == Tag::Var && n->tag == Tag::Var && m->var == n->var)
    return Mgu{d, id_subst(d)};
  if (m->tag == Tag::Var) {
    if (idx_occurs(m->var, n)) return Clash{};
    return detail::eliminate_var(d, m->var, n);
  }
  if (n->tag == Tag::Var) {
    if (idx_occurs(n->var, m)) return Clash{};
    return detail::eliminate_var(d, n->var, m);
  }
  if (m->tag == Tag::Zero && n->tag == Tag::Zero) return Mgu{d, id_subst(d)};
  if (m->tag == Tag::Suc && n->tag == Tag::Suc) return unify(d, m->sub, n->sub);
  return Clash{};  // zero against successor
}

// ---- matching --------------------------------------------------------------

struct Matched {
  IndexCtx ctx;     // variables of the pattern side left uninstantiated
  IndexSubst subst;
};
struct NoMatch {};
using MatchResult = std::variant<Matched, NoMatch>;

inline bool match_failed(const MatchResult& r) { return std::holds_alternative<NoMatch>(r); }

// One-sided matching: instantiate variables of M (which live in d) so that
// M becomes N. Variables are bound on first sight; repeated occurrences must
// already agree because earlier bindings get applied before comparison.
inline MatchResult match_term(const IndexCtx& d, const IdxPtr& m, const IdxPtr& n) {
  using Tag = IdxTerm::Tag;
  if (m->tag == Tag::Var) {
    Mgu elim = detail::eliminate_var(d, m->var, n);
    return Matched{std::move(elim.ctx), std::move(elim.subst)};
  }
  if (m->tag == Tag::Zero && n->tag == Tag::Zero) return Matched{d, id_subst(d)};
  if (m->tag == Tag::Suc && n->tag == Tag::Suc) return match_term(d, m->sub, n->sub);
  return NoMatch{};
}

// Entry-wise matching of substitutions with a shared domain context. d is the
// context the range terms of th1 live in; the result instantiates d so that
// th1 becomes th2.
inline MatchResult match_subst(const IndexCtx& d, const IndexSubst& th1, const IndexSubst& th2) {
  if (th1.entries.size() != th2.entries.size()) return NoMatch{};
  Matched acc{d, id_subst(d)};
  for (size_t i = 0; i < th1.entries.size(); ++i) {
    if (th1.entries[i].var != th2.entries[i].var) return NoMatch{};
    IdxPtr lhs = subst_apply(th1.entries[i].term, acc.subst);
    MatchResult step = match_term(acc.ctx, lhs, th2.entries[i].term);
    if (match_failed(step)) return NoMatch{};
    Matched& st = std::get<Matched>(step);
    acc.subst = subst_compose(acc.subst, st.subst);
    acc.ctx = std::move(st.ctx);
  }
  return acc;
}

// ---- debug rendering -------------------------------------------------------

inline std::string show_idx(const IdxPtr& m, bool parens = false) {
  switch (m->tag) {
    case IdxTerm::Tag::Zero: return "0";
    case IdxTerm::Tag::Suc: {
      std::string inner = "suc " + show_idx(m->sub, true);
      return parens ? "(" + inner + ")" : inner;
    }
    case IdxTerm::Tag::Var: return m->var;
  }
  return "?";
}

inline std::string show_ictx(const IndexCtx& d) {
  std::string out;
  for (size_t i = 0; i < d.items.size(); ++i) {
    if (i) out += ", ";
    out += d.items[i].name + ":" + show_sort(d.items[i].sort);
  }
  return out;
}

inline std::string show_subst(const IndexSubst& th) {
  std::string out = "[";
  for (size_t i = 0; i < th.entries.size(); ++i) {
    if (i) out += ", ";
    out += show_idx(th.entries[i].term) + "/" + th.entries[i].var;
  }
  return out + "]";
}

inline bool subst_eq(const IndexSubst& a, const IndexSubst& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (size_t i = 0; i < a.entries.size(); ++i)
    if (a.entries[i].var != b.entries[i].var || !idx_eq(a.entries[i].term, b.entries[i].term))
      return false;
  return true;
}

inline bool ictx_eq(const IndexCtx& a, const IndexCtx& b) {
  if (a.items.size() != b.items.size()) return false;
  for (size_t i = 0; i < a.items.size(); ++i)
    if (a.items[i].name != b.items[i].name || a.items[i].sort != b.items[i].sort) return false;
  return true;
}

}  // namespace tores
