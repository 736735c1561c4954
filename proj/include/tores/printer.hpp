#pragma once

// Source-form printers for kinds, types, terms, and whole programs.  Output
// reparses to an alpha-equal tree; parentheses are inserted from precedence
// levels rather than sprinkled everywhere.

#include <string>

#include "tores/parser.hpp"
#include "tores/syntax.hpp"

namespace tores {

inline std::string show_kind(const KindPtr& k) {
  if (kind_is_star(k)) return "*";
  const KPi& p = std::get<KPi>(k->node);
  return "Pi " + p.name + ":nat. " + show_kind(p.body);
}

namespace detail {

// Ground index terms print as numerals, everything else structurally.
inline bool idx_numeral(const IdxPtr& m, unsigned& out) {
  unsigned n = 0;
  const IdxTerm* cur = m.get();
  while (cur->tag == IdxTerm::Tag::Suc) {
    ++n;
    cur = cur->sub.get();
  }
  if (cur->tag != IdxTerm::Tag::Zero) return false;
  out = n;
  return true;
}

inline std::string show_idx_surface(const IdxPtr& m);

inline std::string show_idx_surface_atom(const IdxPtr& m) {
  unsigned n;
  if (idx_numeral(m, n)) return std::to_string(n);
  if (m->tag == IdxTerm::Tag::Var) return m->var;
  return "(" + show_idx_surface(m) + ")";
}

inline std::string show_idx_surface(const IdxPtr& m) {
  unsigned n;
  if (idx_numeral(m, n)) return std::to_string(n);
  if (m->tag == IdxTerm::Tag::Var) return m->var;
  return "suc " + show_idx_surface_atom(m->sub);
}

inline std::string show_ictx_surface(const IndexCtx& d) {
  std::string out;
  for (size_t i = 0; i < d.items.size(); ++i) {
    if (i) out += ", ";
    out += d.items[i].name + ":nat";
  }
  return out;
}

inline std::string show_isubst_surface(const IndexSubst& th) {
  std::string out = "[";
  for (size_t i = 0; i < th.entries.size(); ++i) {
    if (i) out += ", ";
    out += show_idx_surface(th.entries[i].term) + "/" + th.entries[i].var;
  }
  return out + "]";
}

// Type precedence: 0 arrow and binders, 1 sum, 2 product, 3 application, 4 atom.
inline std::string show_type_at(const TypePtr& t, int level);

inline std::string show_type_node(const TypePtr& t, int& own) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, TyUnit>) {
          own = 4;
          return "unit";
        } else if constexpr (std::is_same_v<N, TyVar>) {
          own = 4;
          return n.name;
        } else if constexpr (std::is_same_v<N, TyProd>) {
          own = 2;
          return show_type_at(n.left, 2) + " * " + show_type_at(n.right, 3);
        } else if constexpr (std::is_same_v<N, TySum>) {
          own = 1;
          return show_type_at(n.left, 1) + " + " + show_type_at(n.right, 2);
        } else if constexpr (std::is_same_v<N, TyArrow>) {
          own = 0;
          if (n.binders.items.empty())
            return show_type_at(n.domain, 1) + " -> " + show_type_at(n.codomain, 0);
          std::string out = "(";
          for (size_t i = 0; i < n.binders.items.size(); ++i) {
            if (i) out += ", ";
            out += n.binders.items[i].name + ":nat";
          }
          out += " | " + show_type_at(n.domain, 0) + ") -> " + show_type_at(n.codomain, 0);
          return out;
        } else if constexpr (std::is_same_v<N, TySigma>) {
          own = 0;
          return "Sig " + n.name + ":nat. " + show_type_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TyEq>) {
          own = 2;
          return show_idx_surface(n.lhs) + " == " + show_idx_surface(n.rhs);
        } else if constexpr (std::is_same_v<N, TyApp>) {
          own = 3;
          return show_type_at(n.head, 3) + " " + show_idx_surface_atom(n.arg);
        } else if constexpr (std::is_same_v<N, TyLam>) {
          own = 0;
          return "Lam " + n.name + ". " + show_type_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TyMu>) {
          own = 0;
          return "mu " + n.name + " : " + show_kind(n.kind) + ". " + show_type_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TyNu>) {
          own = 0;
          return "nu " + n.name + " : " + show_kind(n.kind) + ". " + show_type_at(n.body, 0);
        } else {
          static_assert(std::is_same_v<N, TyRec>);
          own = 4;
          std::string k = kind_is_star(n.kind) ? "*" : "(" + show_kind(n.kind) + ")";
          return "Rec " + k + " (0 => " + show_type_at(n.zero, 0) + " | suc " + n.suc_name + ", " +
                 n.tvar_name + " => " + show_type_at(n.suc_branch, 0) + ")";
        }
      },
      t->node);
}

inline std::string show_type_at(const TypePtr& t, int level) {
  int own = 0;
  std::string body = show_type_node(t, own);
  return own < level ? "(" + body + ")" : body;
}

// Term precedence: 0 open forms, 1 application, 2 prefix operators, 3 atom.
inline std::string show_term_at(const TermPtr& t, int level);

inline std::string show_term_node(const TermPtr& t, int& own) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, TmVar>) {
          own = 3;
          return n.name;
        } else if constexpr (std::is_same_v<N, TmUnit>) {
          own = 3;
          return "<>";
        } else if constexpr (std::is_same_v<N, TmRefl>) {
          own = 3;
          return "refl";
        } else if constexpr (std::is_same_v<N, TmPair>) {
          own = 3;
          return "<" + show_term_at(n.left, 0) + ", " + show_term_at(n.right, 0) + ">";
        } else if constexpr (std::is_same_v<N, TmAnnot>) {
          own = 3;
          return "(" + show_term_at(n.body, 0) + " : " + show_type_at(n.type, 0) + ")";
        } else if constexpr (std::is_same_v<N, TmInd>) {
          own = 3;
          return "ind (0 => " + show_term_at(n.zero, 0) + " | suc " + n.ivar + ", " + n.fvar +
                 " => " + show_term_at(n.suc_branch, 0) + ")";
        } else if constexpr (std::is_same_v<N, TmLam>) {
          own = 0;
          if (n.ivars.empty()) return "fn " + n.arg + " => " + show_term_at(n.body, 0);
          std::string out = "fn (";
          for (size_t i = 0; i < n.ivars.size(); ++i) {
            if (i) out += ", ";
            out += n.ivars[i];
          }
          return out + " | " + n.arg + ") => " + show_term_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TmApp>) {
          own = 1;
          std::string out = show_term_at(n.fn, 1);
          if (!n.spine.empty()) {
            out += " [";
            for (size_t i = 0; i < n.spine.size(); ++i) {
              if (i) out += ", ";
              out += show_idx_surface(n.spine[i]);
            }
            out += "]";
          }
          return out + " " + show_term_at(n.arg, 2);
        } else if constexpr (std::is_same_v<N, TmSplit>) {
          own = 0;
          return "split " + show_term_at(n.scrut, 1) + " as (" + n.x1 + ", " + n.x2 + ") in " +
                 show_term_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TmInj>) {
          own = 2;
          return (n.side == 1 ? "inl " : "inr ") + show_term_at(n.body, 2);
        } else if constexpr (std::is_same_v<N, TmCase>) {
          own = 0;
          return "case " + show_term_at(n.scrut, 1) + " of inl " + n.x1 + " => " +
                 show_term_at(n.left, 0) + " | inr " + n.x2 + " => " + show_term_at(n.right, 0);
        } else if constexpr (std::is_same_v<N, TmPack>) {
          own = 2;
          return "pack [" + show_idx_surface(n.witness) + "] " + show_term_at(n.body, 2);
        } else if constexpr (std::is_same_v<N, TmUnpack>) {
          own = 0;
          return "unpack " + show_term_at(n.scrut, 1) + " as (" + n.ivar + ", " + n.xvar +
                 ") in " + show_term_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TmEqElim>) {
          own = 0;
          std::string out = "eqelim " + show_term_at(n.scrut, 1);
          if (n.has_unifier)
            out += " with (" + show_ictx_surface(n.ctx) + " | " + show_isubst_surface(n.subst) + ")";
          return out + " in " + show_term_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TmEqAbort>) {
          own = 2;
          return "eqabort " + show_term_at(n.scrut, 2);
        } else if constexpr (std::is_same_v<N, TmFold>) {
          own = 2;
          return "fold " + show_term_at(n.body, 2);
        } else if constexpr (std::is_same_v<N, TmRec>) {
          own = 0;
          return "rec " + n.fvar + " => " + show_term_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TmCorec>) {
          own = 0;
          return "corec " + n.fvar + " => " + show_term_at(n.body, 0);
        } else if constexpr (std::is_same_v<N, TmOutNu>) {
          own = 2;
          return "out_nu " + show_term_at(n.body, 2);
        } else if constexpr (std::is_same_v<N, TmInjIdx>) {
          own = 2;
          return (n.suc ? "injs " : "inj0 ") + show_term_at(n.body, 2);
        } else {
          static_assert(std::is_same_v<N, TmOutIdx>);
          own = 2;
          return (n.suc ? "outs " : "out0 ") + show_term_at(n.body, 2);
        }
      },
      t->node);
}

inline std::string show_term_at(const TermPtr& t, int level) {
  int own = 0;
  std::string body = show_term_node(t, own);
  return own < level ? "(" + body + ")" : body;
}

}  // namespace detail

inline std::string show_type(const TypePtr& t) { return detail::show_type_at(t, 0); }
inline std::string show_term(const TermPtr& t) { return detail::show_term_at(t, 0); }
inline std::string show_index(const IdxPtr& m) { return detail::show_idx_surface(m); }

inline std::string show_decl(const Decl& d) {
  if (d.which == Decl::Which::Type)
    return "type " + d.name + " : " + show_kind(d.kind_annot) + " =\n  " + show_type(d.type_body) +
           "\n";
  return "def " + d.name + " : " + show_type(d.type_annot) + " =\n  " + show_term(d.term_body) +
         "\n";
}

inline std::string show_program(const Program& p) {
  std::string out;
  for (size_t i = 0; i < p.decls.size(); ++i) {
    if (i) out += "\n";
    out += show_decl(p.decls[i]);
  }
  return out;
}

}  // namespace tores
