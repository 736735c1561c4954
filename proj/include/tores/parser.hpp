#pragma once

// Lexer and recursive-descent parser for .tores source files.
//
// Conventions the grammar relies on:
//   - term variables and index variables are lowercase identifiers, type
//     names and type variables are capitalized;
//   - `--` starts a line comment;
//   - nonnegative integer literals abbreviate suc^k(0) in index positions;
//   - binder bodies extend as far to the right as possible.

#include <cctype>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tores/syntax.hpp"

namespace tores {

struct Diagnostic {
  std::string file;
  Span span;
  std::string code;
  std::string message;
  std::string expected;  // rendered type, when the error carries one
  std::string found;
};

struct Decl {
  enum class Which { Type, Def };
  Which which = Which::Def;
  std::string name;
  Span span;
  KindPtr kind_annot;  // type decls
  TypePtr type_body;   // type decls
  TypePtr type_annot;  // defs
  TermPtr term_body;   // defs
};

struct Program {
  std::string file;
  std::vector<Decl> decls;
};

using ParseResult = std::variant<Program, Diagnostic>;

namespace detail {

enum class Tok {
  End,
  Ident,
  TyIdent,
  Int,
  LParen,
  RParen,
  LBracket,
  RBracket,
  LAngle,
  RAngle,
  UnitVal,  // <>
  Comma,
  Bar,
  Colon,
  Dot,
  Slash,
  Star,
  Plus,
  Eq,
  EqEq,
  Arrow,
  FatArrow,
  KwType, KwDef, KwFn, KwSplit, KwAs, KwIn, KwInl, KwInr, KwCase, KwOf, KwPack, KwUnpack,
  KwRefl, KwEqElim, KwEqAbort, KwWith, KwFold, KwRec, KwCorec, KwOutNu, KwInj0, KwInjS,
  KwOut0, KwOutS, KwInd, KwSuc, KwNat, KwUnitTy, KwMu, KwNu, KwRecTy, KwSig, KwLam, KwPi,
};

struct Token {
  Tok tok;
  std::string text;
  uint64_t value = 0;  // Int payload
  Span span;
};

struct ParseError {
  Diagnostic diag;
};

inline const std::pair<const char*, Tok> kKeywords[] = {
    {"type", Tok::KwType},     {"def", Tok::KwDef},       {"fn", Tok::KwFn},
    {"split", Tok::KwSplit},   {"as", Tok::KwAs},         {"in", Tok::KwIn},
    {"inl", Tok::KwInl},       {"inr", Tok::KwInr},       {"case", Tok::KwCase},
    {"of", Tok::KwOf},         {"pack", Tok::KwPack},     {"unpack", Tok::KwUnpack},
    {"refl", Tok::KwRefl},     {"eqelim", Tok::KwEqElim}, {"eqabort", Tok::KwEqAbort},
    {"with", Tok::KwWith},     {"fold", Tok::KwFold},     {"rec", Tok::KwRec},
    {"corec", Tok::KwCorec},   {"out_nu", Tok::KwOutNu},  {"inj0", Tok::KwInj0},
    {"injs", Tok::KwInjS},     {"out0", Tok::KwOut0},     {"outs", Tok::KwOutS},
    {"ind", Tok::KwInd},       {"suc", Tok::KwSuc},       {"nat", Tok::KwNat},
    {"unit", Tok::KwUnitTy},   {"mu", Tok::KwMu},         {"nu", Tok::KwNu},
    {"Rec", Tok::KwRecTy},     {"Sig", Tok::KwSig},       {"Lam", Tok::KwLam},
    {"Pi", Tok::KwPi},
};

class Lexer {
 public:
  Lexer(std::string file, std::string src) : file_(std::move(file)), src_(std::move(src)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      Token t = next_token();
      out.push_back(t);
      if (t.tok == Tok::End) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(Span sp, const std::string& msg) {
    throw ParseError{Diagnostic{file_, sp, "P001", msg}};
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (isspace((unsigned char)c)) {
        ++col_;
        ++pos_;
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Span here(uint32_t len) const {
    return Span{(uint32_t)pos_, (uint32_t)(pos_ + len), line_, col_};
  }

  Token make(Tok t, uint32_t len) {
    Token out{t, src_.substr(pos_, len), 0, here(len)};
    pos_ += len;
    col_ += len;
    return out;
  }

  Token next_token() {
    if (pos_ >= src_.size()) return Token{Tok::End, "", 0, here(0)};
    char c = src_[pos_];
    char c1 = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
    if (isdigit((unsigned char)c)) {
      size_t len = 1;
      while (pos_ + len < src_.size() && isdigit((unsigned char)src_[pos_ + len])) ++len;
      Token t = make(Tok::Int, (uint32_t)len);
      t.value = std::stoull(t.text);
      return t;
    }
    if (isalpha((unsigned char)c) || c == '_') {
      size_t len = 1;
      while (pos_ + len < src_.size() &&
             (isalnum((unsigned char)src_[pos_ + len]) || src_[pos_ + len] == '_' ||
              src_[pos_ + len] == '\''))
        ++len;
      std::string word = src_.substr(pos_, len);
      for (const auto& [kw, tok] : kKeywords)
        if (word == kw) return make(tok, (uint32_t)len);
      return make(isupper((unsigned char)c) ? Tok::TyIdent : Tok::Ident, (uint32_t)len);
    }
    switch (c) {
      case '(': return make(Tok::LParen, 1);
      case ')': return make(Tok::RParen, 1);
      case '[': return make(Tok::LBracket, 1);
      case ']': return make(Tok::RBracket, 1);
      case '<': return c1 == '>' ? make(Tok::UnitVal, 2) : make(Tok::LAngle, 1);
      case '>': return make(Tok::RAngle, 1);
      case ',': return make(Tok::Comma, 1);
      case '|': return make(Tok::Bar, 1);
      case ':': return make(Tok::Colon, 1);
      case '.': return make(Tok::Dot, 1);
      case '/': return make(Tok::Slash, 1);
      case '*': return make(Tok::Star, 1);
      case '+': return make(Tok::Plus, 1);
      case '=':
        if (c1 == '=') return make(Tok::EqEq, 2);
        if (c1 == '>') return make(Tok::FatArrow, 2);
        return make(Tok::Eq, 1);
      case '-':
        if (c1 == '>') return make(Tok::Arrow, 2);
        break;
      default: break;
    }
    fail(here(1), std::string("unexpected character '") + c + "'");
  }

  std::string file_;
  std::string src_;
  size_t pos_ = 0;
  uint32_t line_ = 1;
  uint32_t col_ = 1;
};

class Parser {
 public:
  Parser(std::string file, std::vector<Token> toks)
      : file_(std::move(file)), toks_(std::move(toks)) {}

  Program run() {
    Program p;
    p.file = file_;
    while (!at(Tok::End)) p.decls.push_back(parse_decl());
    return p;
  }

  // Entry points reused by tests.
  TermPtr run_term() {
    TermPtr t = parse_term();
    expect(Tok::End, "end of input");
    return t;
  }
  TypePtr run_type() {
    TypePtr t = parse_type();
    expect(Tok::End, "end of input");
    return t;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok t, size_t ahead = 0) const { return peek(ahead).tok == t; }
  Token advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError{Diagnostic{file_, peek().span, "P001",
                                msg + " (found '" + (at(Tok::End) ? "end of file" : peek().text) +
                                    "')"}};
  }

  Token expect(Tok t, const char* what) {
    if (!at(t)) fail(std::string("expected ") + what);
    return advance();
  }

  std::string expect_ident() { return expect(Tok::Ident, "an identifier").text; }
  std::string expect_tyident() { return expect(Tok::TyIdent, "a capitalized identifier").text; }

  // ---- declarations ----

  Decl parse_decl() {
    Decl d;
    d.span = peek().span;
    if (at(Tok::KwType)) {
      advance();
      d.which = Decl::Which::Type;
      d.name = expect_tyident();
      expect(Tok::Colon, "':'");
      d.kind_annot = parse_kind();
      expect(Tok::Eq, "'='");
      d.type_body = parse_type();
      return d;
    }
    if (at(Tok::KwDef)) {
      advance();
      d.which = Decl::Which::Def;
      d.name = expect_ident();
      expect(Tok::Colon, "':'");
      d.type_annot = parse_type();
      expect(Tok::Eq, "'='");
      d.term_body = parse_term();
      return d;
    }
    fail("expected 'type' or 'def'");
  }

  // ---- kinds ----

  KindPtr parse_kind() {
    if (at(Tok::Star)) {
      advance();
      return kind_star();
    }
    if (at(Tok::KwPi)) {
      advance();
      std::string u = expect_ident();
      expect(Tok::Colon, "':'");
      expect(Tok::KwNat, "'nat'");
      expect(Tok::Dot, "'.'");
      return kind_pi(u, parse_kind());
    }
    if (at(Tok::LParen)) {
      advance();
      KindPtr k = parse_kind();
      expect(Tok::RParen, "')'");
      return k;
    }
    fail("expected a kind");
  }

  // ---- index terms ----

  IdxPtr parse_idx() {
    Token t = peek();
    if (at(Tok::Int)) {
      advance();
      return idx_nat((unsigned)t.value);
    }
    if (at(Tok::Ident)) {
      advance();
      return idx_var(t.text);
    }
    if (at(Tok::KwSuc)) {
      advance();
      return idx_suc(parse_idx());
    }
    if (at(Tok::LParen)) {
      advance();
      IdxPtr m = parse_idx();
      expect(Tok::RParen, "')'");
      return m;
    }
    fail("expected an index term");
  }

  bool starts_idx() const {
    return at(Tok::Int) || at(Tok::Ident) || at(Tok::KwSuc);
  }

  IndexCtx parse_ictx_items() {
    IndexCtx d;
    if (at(Tok::Bar)) return d;
    while (true) {
      std::string u = expect_ident();
      expect(Tok::Colon, "':'");
      expect(Tok::KwNat, "'nat'");
      d.items.push_back({u, Sort::Nat});
      if (!at(Tok::Comma)) break;
      advance();
    }
    return d;
  }

  IndexSubst parse_isubst() {
    expect(Tok::LBracket, "'['");
    IndexSubst th;
    if (!at(Tok::RBracket)) {
      while (true) {
        IdxPtr m = parse_idx();
        expect(Tok::Slash, "'/'");
        th.entries.push_back({m, expect_ident()});
        if (!at(Tok::Comma)) break;
        advance();
      }
    }
    expect(Tok::RBracket, "']'");
    return th;
  }

  // ---- types ----

  // '(' that opens a binder spine: "(u:nat" or "(|".
  bool at_spine_paren() const {
    if (!at(Tok::LParen)) return false;
    if (at(Tok::Bar, 1)) return true;
    return at(Tok::Ident, 1) && at(Tok::Colon, 2);
  }

  TypePtr parse_type() {
    Span sp = peek().span;
    if (at_spine_paren()) {
      advance();
      SortSpine binders;
      for (const IdxBinding& b : parse_ictx_items().items) binders.items.push_back(b);
      expect(Tok::Bar, "'|'");
      TypePtr dom = parse_type();
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      return ty_arrow(std::move(binders), std::move(dom), parse_type(), sp);
    }
    TypePtr t = parse_sum_type();
    if (at(Tok::Arrow)) {
      advance();
      return ty_fn(std::move(t), parse_type(), sp);
    }
    return t;
  }

  TypePtr parse_sum_type() {
    Span sp = peek().span;
    TypePtr t = parse_prod_type();
    while (at(Tok::Plus)) {
      advance();
      t = ty_sum(std::move(t), parse_prod_type(), sp);
    }
    return t;
  }

  TypePtr parse_prod_type() {
    Span sp = peek().span;
    TypePtr t = parse_app_type();
    while (at(Tok::Star)) {
      advance();
      t = ty_prod(std::move(t), parse_app_type(), sp);
    }
    return t;
  }

  TypePtr parse_app_type() {
    Span sp = peek().span;
    TypePtr t = parse_atom_type();
    while (starts_idx() || at(Tok::LParen)) {
      if (at(Tok::LParen) && !starts_idx_in_parens()) break;
      t = ty_app(std::move(t), parse_idx(), sp);
    }
    return t;
  }

  // In argument position a '(' must open an index term; peek one token in.
  bool starts_idx_in_parens() const {
    return at(Tok::LParen) &&
           (at(Tok::Int, 1) || at(Tok::Ident, 1) || at(Tok::KwSuc, 1) || at(Tok::LParen, 1));
  }

  TypePtr parse_atom_type() {
    Span sp = peek().span;
    if (at(Tok::KwUnitTy)) {
      advance();
      return ty_unit(sp);
    }
    if (starts_idx()) {
      IdxPtr lhs = parse_idx();
      expect(Tok::EqEq, "'=='");
      return ty_eq(std::move(lhs), parse_idx(), sp);
    }
    if (at(Tok::TyIdent)) return ty_var(advance().text, sp);
    if (at(Tok::KwSig)) {
      advance();
      std::string u = expect_ident();
      expect(Tok::Colon, "':'");
      expect(Tok::KwNat, "'nat'");
      expect(Tok::Dot, "'.'");
      return ty_sigma(u, parse_type(), sp);
    }
    if (at(Tok::KwLam)) {
      advance();
      std::string u = expect_ident();
      expect(Tok::Dot, "'.'");
      return ty_lam(u, parse_type(), sp);
    }
    if (at(Tok::KwMu) || at(Tok::KwNu)) {
      bool is_mu = at(Tok::KwMu);
      advance();
      std::string x = expect_tyident();
      expect(Tok::Colon, "':'");
      KindPtr k = parse_kind();
      expect(Tok::Dot, "'.'");
      TypePtr body = parse_type();
      return is_mu ? ty_mu(x, std::move(k), std::move(body), sp)
                   : ty_nu(x, std::move(k), std::move(body), sp);
    }
    if (at(Tok::KwRecTy)) {
      advance();
      KindPtr k = parse_kind();
      expect(Tok::LParen, "'('");
      Token zero = expect(Tok::Int, "'0'");
      if (zero.value != 0) fail("the first branch must be labeled 0");
      expect(Tok::FatArrow, "'=>'");
      TypePtr t0 = parse_type();
      expect(Tok::Bar, "'|'");
      expect(Tok::KwSuc, "'suc'");
      std::string u = expect_ident();
      expect(Tok::Comma, "','");
      std::string x = expect_tyident();
      expect(Tok::FatArrow, "'=>'");
      TypePtr ts = parse_type();
      expect(Tok::RParen, "')'");
      return ty_rec(std::move(k), std::move(t0), u, x, std::move(ts), sp);
    }
    if (at(Tok::LParen)) {
      if (at_spine_paren()) fail("parenthesize this function type");
      advance();
      TypePtr t = parse_type();
      expect(Tok::RParen, "')'");
      return t;
    }
    fail("expected a type");
  }

  // ---- terms ----

  TermPtr parse_term() {
    Span sp = peek().span;
    if (at(Tok::KwFn)) {
      advance();
      std::vector<std::string> ivars;
      std::string arg;
      if (at(Tok::Ident)) {
        arg = advance().text;
      } else {
        expect(Tok::LParen, "'('");
        if (!at(Tok::Bar)) {
          while (true) {
            ivars.push_back(expect_ident());
            if (!at(Tok::Comma)) break;
            advance();
          }
        }
        expect(Tok::Bar, "'|'");
        arg = expect_ident();
        expect(Tok::RParen, "')'");
      }
      expect(Tok::FatArrow, "'=>'");
      return tm_lam(std::move(ivars), std::move(arg), parse_term(), sp);
    }
    if (at(Tok::KwSplit)) {
      advance();
      TermPtr s = parse_app_term();
      expect(Tok::KwAs, "'as'");
      expect(Tok::LParen, "'('");
      std::string x1 = expect_ident();
      expect(Tok::Comma, "','");
      std::string x2 = expect_ident();
      expect(Tok::RParen, "')'");
      expect(Tok::KwIn, "'in'");
      return tm_split(std::move(s), x1, x2, parse_term(), sp);
    }
    if (at(Tok::KwCase)) {
      advance();
      TermPtr s = parse_app_term();
      expect(Tok::KwOf, "'of'");
      expect(Tok::KwInl, "'inl'");
      std::string x1 = expect_ident();
      expect(Tok::FatArrow, "'=>'");
      TermPtr l = parse_term();
      expect(Tok::Bar, "'|'");
      expect(Tok::KwInr, "'inr'");
      std::string x2 = expect_ident();
      expect(Tok::FatArrow, "'=>'");
      return tm_case(std::move(s), x1, std::move(l), x2, parse_term(), sp);
    }
    if (at(Tok::KwUnpack)) {
      advance();
      TermPtr s = parse_app_term();
      expect(Tok::KwAs, "'as'");
      expect(Tok::LParen, "'('");
      std::string u = expect_ident();
      expect(Tok::Comma, "','");
      std::string x = expect_ident();
      expect(Tok::RParen, "')'");
      expect(Tok::KwIn, "'in'");
      return tm_unpack(std::move(s), u, x, parse_term(), sp);
    }
    if (at(Tok::KwEqElim)) {
      advance();
      TermPtr s = parse_app_term();
      if (at(Tok::KwWith)) {
        advance();
        expect(Tok::LParen, "'('");
        IndexCtx d = parse_ictx_items();
        expect(Tok::Bar, "'|'");
        IndexSubst th = parse_isubst();
        expect(Tok::RParen, "')'");
        expect(Tok::KwIn, "'in'");
        return tm_eqelim_with(std::move(s), std::move(d), std::move(th), parse_term(), sp);
      }
      expect(Tok::KwIn, "'in'");
      return tm_eqelim(std::move(s), parse_term(), sp);
    }
    if (at(Tok::KwRec) || at(Tok::KwCorec)) {
      bool is_rec = at(Tok::KwRec);
      advance();
      std::string f = expect_ident();
      expect(Tok::FatArrow, "'=>'");
      TermPtr body = parse_term();
      return is_rec ? tm_rec(f, std::move(body), sp) : tm_corec(f, std::move(body), sp);
    }
    return parse_app_term();
  }

  TermPtr parse_app_term() {
    Span sp = peek().span;
    TermPtr t = parse_prefix_term();
    while (true) {
      if (at(Tok::LBracket)) {
        TermSpine spine;
        advance();
        if (!at(Tok::RBracket)) {
          while (true) {
            spine.push_back(parse_idx());
            if (!at(Tok::Comma)) break;
            advance();
          }
        }
        expect(Tok::RBracket, "']'");
        t = tm_app(std::move(t), std::move(spine), parse_prefix_term(), sp);
      } else if (starts_prefix_term()) {
        t = tm_app(std::move(t), {}, parse_prefix_term(), sp);
      } else {
        break;
      }
    }
    return t;
  }

  bool starts_prefix_term() const {
    switch (peek().tok) {
      case Tok::Ident:
      case Tok::UnitVal:
      case Tok::LAngle:
      case Tok::LParen:
      case Tok::KwRefl:
      case Tok::KwInl:
      case Tok::KwInr:
      case Tok::KwFold:
      case Tok::KwOutNu:
      case Tok::KwInj0:
      case Tok::KwInjS:
      case Tok::KwOut0:
      case Tok::KwOutS:
      case Tok::KwEqAbort:
      case Tok::KwPack:
      case Tok::KwInd:
        return true;
      default:
        return false;
    }
  }

  TermPtr parse_prefix_term() {
    Span sp = peek().span;
    switch (peek().tok) {
      case Tok::KwInl: advance(); return tm_inj(1, parse_prefix_term(), sp);
      case Tok::KwInr: advance(); return tm_inj(2, parse_prefix_term(), sp);
      case Tok::KwFold: advance(); return tm_fold(parse_prefix_term(), sp);
      case Tok::KwOutNu: advance(); return tm_out_nu(parse_prefix_term(), sp);
      case Tok::KwInj0: advance(); return tm_inj_idx(false, parse_prefix_term(), sp);
      case Tok::KwInjS: advance(); return tm_inj_idx(true, parse_prefix_term(), sp);
      case Tok::KwOut0: advance(); return tm_out_idx(false, parse_prefix_term(), sp);
      case Tok::KwOutS: advance(); return tm_out_idx(true, parse_prefix_term(), sp);
      case Tok::KwEqAbort: advance(); return tm_eqabort(parse_prefix_term(), sp);
      case Tok::KwPack: {
        advance();
        expect(Tok::LBracket, "'['");
        IdxPtr m = parse_idx();
        expect(Tok::RBracket, "']'");
        return tm_pack(std::move(m), parse_prefix_term(), sp);
      }
      default: return parse_atom_term();
    }
  }

  TermPtr parse_atom_term() {
    Span sp = peek().span;
    if (at(Tok::Ident)) return tm_var(advance().text, sp);
    if (at(Tok::UnitVal)) {
      advance();
      return tm_unit(sp);
    }
    if (at(Tok::KwRefl)) {
      advance();
      return tm_refl(sp);
    }
    if (at(Tok::LAngle)) {
      advance();
      TermPtr a = parse_term();
      expect(Tok::Comma, "','");
      TermPtr b = parse_term();
      expect(Tok::RAngle, "'>'");
      return tm_pair(std::move(a), std::move(b), sp);
    }
    if (at(Tok::KwInd)) {
      advance();
      expect(Tok::LParen, "'('");
      Token zero = expect(Tok::Int, "'0'");
      if (zero.value != 0) fail("the first branch must be labeled 0");
      expect(Tok::FatArrow, "'=>'");
      TermPtr t0 = parse_term();
      expect(Tok::Bar, "'|'");
      expect(Tok::KwSuc, "'suc'");
      std::string u = expect_ident();
      expect(Tok::Comma, "','");
      std::string f = expect_ident();
      expect(Tok::FatArrow, "'=>'");
      TermPtr ts = parse_term();
      expect(Tok::RParen, "')'");
      return tm_ind(std::move(t0), u, f, std::move(ts), sp);
    }
    if (at(Tok::LParen)) {
      advance();
      TermPtr t = parse_term();
      if (at(Tok::Colon)) {
        advance();
        TypePtr ty = parse_type();
        expect(Tok::RParen, "')'");
        return tm_annot(std::move(t), std::move(ty), sp);
      }
      expect(Tok::RParen, "')'");
      return t;
    }
    fail("expected a term");
  }

  std::string file_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace detail

inline ParseResult parse_program(const std::string& file, const std::string& src) {
  try {
    detail::Lexer lex(file, src);
    detail::Parser p(file, lex.run());
    return p.run();
  } catch (const detail::ParseError& e) {
    return e.diag;
  }
}

// Single-construct entry points; tests and tools use these for snippets.
inline std::variant<TermPtr, Diagnostic> parse_term_src(const std::string& src) {
  try {
    detail::Lexer lex("<term>", src);
    detail::Parser p("<term>", lex.run());
    return p.run_term();
  } catch (const detail::ParseError& e) {
    return e.diag;
  }
}

inline std::variant<TypePtr, Diagnostic> parse_type_src(const std::string& src) {
  try {
    detail::Lexer lex("<type>", src);
    detail::Parser p("<type>", lex.run());
    return p.run_type();
  } catch (const detail::ParseError& e) {
    return e.diag;
  }
}

}  // namespace tores
