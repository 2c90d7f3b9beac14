/* Copyright 2026 The Demandlyzer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cctype>
#include <functional>
#include <map>
#include <sstream>

#include "demand/kernel.hpp"

namespace demand {
namespace {

enum class Tok {
  LIdent, UIdent, Op, LParen, RParen, LBrack, RBrack, Comma, Semi,
  Newline, Equals, Bar, Arrow, DColon, Underscore, Data, End
};

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

const char* tok_name(Tok k) {
  switch (k) {
    case Tok::LIdent: return "identifier";
    case Tok::UIdent: return "constructor";
    case Tok::Op: return "operator";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Newline: return "newline";
    case Tok::Equals: return "'='";
    case Tok::Bar: return "'|'";
    case Tok::Arrow: return "'->'";
    case Tok::DColon: return "'::'";
    case Tok::Underscore: return "'_'";
    case Tok::Data: return "'data'";
    case Tok::End: return "end of input";
  }
  return "?";
}

bool is_op_char(char c) {
  return std::string_view("!#$%&*+./<=>?@\\^|-~:").find(c) !=
         std::string_view::npos;
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

struct SyntaxError {
  Diagnostic diag;
};

[[noreturn]] void syntax_error(SourceSpan at, const std::string& msg) {
  throw SyntaxError{Diagnostic{"SyntaxError", msg, at, ""}};
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> raw;
  int line = 1, col = 1;
  size_t i = 0;
  int depth = 0;
  auto adv = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    SourceSpan sp{line, col};
    if (c == '\n') {
      if (depth == 0) raw.push_back({Tok::Newline, "\n", sp});
      adv(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      size_t j = i;
      while (j < src.size() && src[j] == '-') ++j;
      if (j >= src.size() || !is_op_char(src[j])) {
        while (i < src.size() && src[i] != '\n') adv(1);
        continue;
      }
    }
    // UTF-8 bottom symbol.
    if (src.substr(i, 3) == "\xE2\x8A\xA5") {
      raw.push_back({Tok::LIdent, "bot", sp});
      adv(3);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      std::string w(src.substr(i, j - i));
      adv(j - i);
      if (w == "_") {
        raw.push_back({Tok::Underscore, w, sp});
      } else if (w == "data") {
        raw.push_back({Tok::Data, w, sp});
      } else if (std::isupper(static_cast<unsigned char>(w[0]))) {
        raw.push_back({Tok::UIdent, w, sp});
      } else {
        raw.push_back({Tok::LIdent, w, sp});
      }
      continue;
    }
    if (is_op_char(c)) {
      size_t j = i;
      while (j < src.size() && is_op_char(src[j])) ++j;
      std::string w(src.substr(i, j - i));
      adv(j - i);
      Tok k = Tok::Op;
      if (w == "=") k = Tok::Equals;
      else if (w == "|") k = Tok::Bar;
      else if (w == "->") k = Tok::Arrow;
      else if (w == "::") k = Tok::DColon;
      raw.push_back({k, w, sp});
      continue;
    }
    switch (c) {
      case '(': ++depth; raw.push_back({Tok::LParen, "(", sp}); break;
      case ')': depth = depth > 0 ? depth - 1 : 0;
                raw.push_back({Tok::RParen, ")", sp}); break;
      case '[': ++depth; raw.push_back({Tok::LBrack, "[", sp}); break;
      case ']': depth = depth > 0 ? depth - 1 : 0;
                raw.push_back({Tok::RBrack, "]", sp}); break;
      case ',': raw.push_back({Tok::Comma, ",", sp}); break;
      case ';': raw.push_back({Tok::Semi, ";", sp}); break;
      default:
        syntax_error(sp, std::string("unexpected character '") + c + "'");
    }
    adv(1);
  }
  raw.push_back({Tok::End, "", SourceSpan{line, col}});

  // Drop newlines that continue a declaration: before '|' or after a token
  // that cannot end one.
  std::vector<Token> out;
  for (size_t k = 0; k < raw.size(); ++k) {
    if (raw[k].kind == Tok::Newline) {
      size_t n = k + 1;
      while (n < raw.size() && raw[n].kind == Tok::Newline) ++n;
      bool cont = raw[n].kind == Tok::Bar || raw[n].kind == Tok::Arrow ||
                  raw[n].kind == Tok::Equals || raw[n].kind == Tok::Op;
      if (!out.empty()) {
        Tok pk = out.back().kind;
        if (pk == Tok::Op || pk == Tok::Equals || pk == Tok::Bar ||
            pk == Tok::Arrow || pk == Tok::Comma || pk == Tok::DColon ||
            pk == Tok::Newline || pk == Tok::Semi)
          cont = true;
      } else {
        cont = true;
      }
      if (!cont) out.push_back({Tok::Semi, ";", raw[k].span});
      k = n - 1;
      continue;
    }
    out.push_back(raw[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Surface syntax

struct SExpr;
using SExprPtr = std::shared_ptr<SExpr>;

struct SExpr {
  enum class K { Name, BinOp, Tuple, List, Wild };
  K kind = K::Name;
  std::string name;
  bool upper = false;
  std::vector<SExprPtr> args;
  SourceSpan span;
  int parens = 0;
};

struct SRule {
  SExprPtr lhs;
  SExprPtr guard;
  SExprPtr rhs;
  SourceSpan span;
};

struct SSig {
  std::string name;
  TypePtr type;
  SourceSpan span;
};

struct OpInfo {
  int prec;
  int assoc;  // -1 left, 0 none, 1 right
};

OpInfo op_info(const std::string& op) {
  if (op == "||") return {2, 1};
  if (op == "&&") return {3, 1};
  if (op == "==" || op == "/=" || op == "<" || op == "<=" || op == ">" ||
      op == ">=")
    return {4, 0};
  if (op == ":" || op == "++") return {5, 1};
  if (op == "+" || op == "-") return {6, -1};
  if (op == "*") return {7, -1};
  return {9, -1};
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(size_t k = 0) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return peek().kind == k; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  Token expect(Tok k, const char* what = nullptr) {
    if (!at(k)) {
      std::string msg = std::string("expected ") + (what ? what : tok_name(k)) +
                        ", found " + describe(peek());
      syntax_error(peek().span, msg);
    }
    return take();
  }
  static std::string describe(const Token& t) {
    if (t.kind == Tok::End || t.kind == Tok::Semi) return tok_name(t.kind);
    return std::string(tok_name(t.kind)) + " '" + t.text + "'";
  }
  void skip_to_decl_end() {
    while (!at(Tok::End) && !at(Tok::Semi)) take();
  }
  size_t pos() const { return pos_; }

  bool starts_atom() const {
    Tok k = peek().kind;
    return k == Tok::LIdent || k == Tok::UIdent || k == Tok::Underscore ||
           k == Tok::LParen || k == Tok::LBrack;
  }

  SExprPtr expr() { return op_expr(0); }

  SExprPtr op_expr(int min_prec) {
    SExprPtr lhs = app_expr();
    while (at(Tok::Op)) {
      std::string op = peek().text;
      OpInfo oi = op_info(op);
      if (oi.prec < min_prec) break;
      Token t = take();
      int next = oi.assoc == 1 ? oi.prec : oi.prec + 1;
      SExprPtr rhs = op_expr(next);
      auto b = std::make_shared<SExpr>();
      b->kind = SExpr::K::BinOp;
      b->name = op;
      b->upper = op[0] == ':';
      b->args = {lhs, rhs};
      b->span = t.span;
      lhs = b;
      if (oi.assoc == 0 && at(Tok::Op) && op_info(peek().text).prec == oi.prec)
        syntax_error(peek().span, "non-associative operator '" + op +
                                      "' cannot be chained");
    }
    return lhs;
  }

  SExprPtr app_expr() {
    SExprPtr head = atom();
    if (head->kind == SExpr::K::Name && head->parens == 0 && head->args.empty()) {
      while (starts_atom()) head->args.push_back(atom());
    }
    return head;
  }

  SExprPtr atom() {
    const Token& t = peek();
    auto e = std::make_shared<SExpr>();
    e->span = t.span;
    switch (t.kind) {
      case Tok::LIdent:
      case Tok::UIdent:
        e->kind = SExpr::K::Name;
        e->name = t.text;
        e->upper = t.kind == Tok::UIdent;
        take();
        return e;
      case Tok::Underscore:
        e->kind = SExpr::K::Wild;
        take();
        return e;
      case Tok::LBrack: {
        take();
        e->kind = SExpr::K::List;
        if (!at(Tok::RBrack)) {
          e->args.push_back(expr());
          while (at(Tok::Comma)) {
            take();
            e->args.push_back(expr());
          }
        }
        expect(Tok::RBrack, "',' or ']'");
        return e;
      }
      case Tok::LParen: {
        take();
        if (at(Tok::RParen)) {
          take();
          e->kind = SExpr::K::Tuple;
          return e;
        }
        if (at(Tok::Op) && peek(1).kind == Tok::RParen) {
          // Operator in prefix form: (>=) a b
          e->kind = SExpr::K::Name;
          e->name = take().text;
          e->upper = e->name[0] == ':';
          take();
          while (starts_atom()) e->args.push_back(atom());
          return e;
        }
        SExprPtr first = expr();
        if (at(Tok::Comma)) {
          e->kind = SExpr::K::Tuple;
          e->args.push_back(first);
          while (at(Tok::Comma)) {
            take();
            e->args.push_back(expr());
          }
          expect(Tok::RParen, "',' or ')'");
          return e;
        }
        expect(Tok::RParen, "')'");
        first->parens++;
        return first;
      }
      default:
        syntax_error(t.span, "expected expression, found " + describe(t));
    }
  }

  // Types -----------------------------------------------------------------
  TypePtr type() {
    std::vector<TypePtr> parts{btype()};
    while (at(Tok::Arrow)) {
      take();
      parts.push_back(btype());
    }
    if (parts.size() == 1) return parts[0];
    TypePtr res = parts.back();
    parts.pop_back();
    return Type::fun(parts, res);
  }

  TypePtr btype() {
    if (at(Tok::UIdent)) {
      std::string n = take().text;
      std::vector<TypePtr> args;
      while (at(Tok::UIdent) || at(Tok::LIdent) || at(Tok::LParen) ||
             at(Tok::LBrack))
        args.push_back(atype());
      if (n == "PP" && args.size() == 1)
        return Type::fun({args[0]}, Type::con("Bool"));
      return Type::con(n, args);
    }
    return atype();
  }

  TypePtr atype() {
    const Token& t = peek();
    if (t.kind == Tok::UIdent) return Type::con(take().text);
    if (t.kind == Tok::LIdent) return Type::var(take().text);
    if (t.kind == Tok::LBrack) {
      take();
      TypePtr el = type();
      expect(Tok::RBrack);
      return Type::list(el);
    }
    if (t.kind == Tok::LParen) {
      take();
      if (at(Tok::RParen)) {
        take();
        return Type::con("()");
      }
      std::vector<TypePtr> el{type()};
      while (at(Tok::Comma)) {
        take();
        el.push_back(type());
      }
      expect(Tok::RParen, "',' or ')'");
      if (el.size() == 1) return el[0];
      return Type::tuple(el);
    }
    syntax_error(t.span, "expected type, found " + describe(t));
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

bool is_op_name(const std::string& s) { return !s.empty() && is_op_char(s[0]); }

// ---------------------------------------------------------------------------
// Built-ins

void add_builtins(Program& p) {
  auto add = [&](DataDecl d) {
    d.builtin = true;
    int di = static_cast<int>(p.data.size());
    for (size_t i = 0; i < d.ctors.size(); ++i)
      p.ctors[d.ctors[i].name] =
          CtorInfo{d.name, di, static_cast<int>(i),
                   static_cast<int>(d.ctors[i].args.size())};
    p.data.push_back(std::move(d));
  };
  add(DataDecl{"Bool", {}, {{"True", {}}, {"False", {}}}, true, {}});
  TypePtr a = Type::var("a");
  add(DataDecl{"[]", {"a"}, {{"[]", {}}, {":", {a, Type::list(a)}}}, true, {}});
  add(DataDecl{"()", {}, {{"()", {}}}, true, {}});
  for (int n = 2; n <= 7; ++n) {
    DataDecl d;
    d.name = tuple_name(n);
    std::vector<TypePtr> args;
    for (int i = 1; i <= n; ++i) {
      d.params.push_back("a" + std::to_string(i));
      args.push_back(Type::var("a" + std::to_string(i)));
    }
    d.ctors.push_back({d.name, args});
    add(std::move(d));
  }
}

const char* kPrelude = R"(
True && x = x
False && x = False
True || x = True
x || True = True
False || False = False
)";

// ---------------------------------------------------------------------------
// Resolution from surface syntax to kernel expressions

class Resolver {
 public:
  Resolver(Program& p, std::vector<Diagnostic>& diags,
           const std::map<std::string, int>& arities)
      : p_(p), diags_(diags), arities_(arities) {}

  void error(const std::string& code, const std::string& msg, SourceSpan sp,
             const std::string& rule = "") {
    diags_.push_back(Diagnostic{code, msg, sp, rule});
  }

  // Flattens a surface argument list of a function head or call, spreading a
  // single bare tuple into the argument list when the arity asks for it.
  std::vector<SExprPtr> spread(const std::vector<SExprPtr>& args, int arity) {
    if (args.size() == 1 && arity != 1 && args[0]->kind == SExpr::K::Tuple &&
        args[0]->parens == 0 &&
        static_cast<int>(args[0]->args.size()) == arity)
      return args[0]->args;
    return args;
  }

  ExprPtr pattern(const SExprPtr& s, int& wild, const std::string& rule) {
    switch (s->kind) {
      case SExpr::K::Wild:
        return mk_var("_" + std::to_string(++wild), s->span);
      case SExpr::K::Tuple:
      case SExpr::K::List:
      case SExpr::K::BinOp:
      case SExpr::K::Name: {
        if (s->kind == SExpr::K::Name && !s->upper && !is_op_name(s->name)) {
          if (!s->args.empty()) {
            error("SyntaxError",
                  "function application '" + s->name + "' in pattern", s->span,
                  rule);
          }
          return mk_var(s->name, s->span);
        }
        return ctor_term(s, [&](const SExprPtr& a) { return pattern(a, wild, rule); },
                         rule);
      }
    }
    return nullptr;
  }

  template <typename F>
  ExprPtr ctor_term(const SExprPtr& s, F&& sub, const std::string& rule) {
    if (s->kind == SExpr::K::Tuple) {
      std::vector<ExprPtr> el;
      for (auto& a : s->args) el.push_back(sub(a));
      return mk_ctor(tuple_name(static_cast<int>(el.size())), el, s->span);
    }
    if (s->kind == SExpr::K::List) {
      ExprPtr acc = mk_ctor("[]", {}, s->span);
      for (auto it = s->args.rbegin(); it != s->args.rend(); ++it)
        acc = mk_ctor(":", {sub(*it), acc}, s->span);
      return acc;
    }
    const CtorInfo* ci = p_.find_ctor(s->name);
    if (!ci) {
      error("UnknownSymbol", "unknown constructor '" + s->name + "'", s->span,
            rule);
      return mk_ctor(s->name, {}, s->span);
    }
    std::vector<SExprPtr> args = s->args;
    if (args.size() == 1 && ci->arity > 1) args = spread(args, ci->arity);
    if (static_cast<int>(args.size()) != ci->arity) {
      error("SyntaxError",
            "constructor '" + s->name + "' expects " +
                std::to_string(ci->arity) + " arguments, got " +
                std::to_string(args.size()),
            s->span, rule);
    }
    std::vector<ExprPtr> el;
    for (auto& a : args) el.push_back(sub(a));
    return mk_ctor(s->name, el, s->span);
  }

  ExprPtr expr(const SExprPtr& s, const std::set<std::string>& scope,
               const std::string& rule, bool allow_free) {
    auto sub = [&](const SExprPtr& a) { return expr(a, scope, rule, allow_free); };
    switch (s->kind) {
      case SExpr::K::Wild:
        error("SyntaxError", "'_' is only allowed in patterns", s->span, rule);
        return mk_var("_", s->span);
      case SExpr::K::Tuple:
      case SExpr::K::List:
        return ctor_term(s, sub, rule);
      case SExpr::K::BinOp:
      case SExpr::K::Name: {
        if (s->upper) return ctor_term(s, sub, rule);
        const std::string& n = s->name;
        if (scope.count(n)) {
          if (s->args.empty()) return mk_var(n, s->span);
          auto e = std::make_shared<Expr>();
          e->kind = Expr::Kind::VarApp;
          e->name = n;
          e->span = s->span;
          for (auto& a : s->args) e->args.push_back(sub(a));
          return e;
        }
        auto ar = arities_.find(n);
        if (ar != arities_.end()) {
          std::vector<SExprPtr> args = spread(s->args, ar->second);
          if (static_cast<int>(args.size()) != ar->second) {
            error("SyntaxError",
                  "function '" + n + "' expects " + std::to_string(ar->second) +
                      " arguments, got " + std::to_string(args.size()),
                  s->span, rule);
          }
          std::vector<ExprPtr> el;
          for (auto& a : args) el.push_back(sub(a));
          return mk_app(n, el, s->span);
        }
        if (s->args.empty() && !is_op_name(n) && allow_free)
          return mk_var(n, s->span);
        error("UnknownSymbol", "unknown function '" + n + "'", s->span, rule);
        return mk_var(n, s->span);
      }
    }
    return nullptr;
  }

 private:
  Program& p_;
  std::vector<Diagnostic>& diags_;
  const std::map<std::string, int>& arities_;
};

struct RawDecls {
  std::vector<std::pair<DataDecl, std::vector<std::pair<std::string, std::vector<TypePtr>>>>> data;
  std::vector<SSig> sigs;
  std::vector<SRule> rules;
};

void parse_decls(Parser& ps, RawDecls& out, std::vector<Diagnostic>& diags) {
  while (true) {
    while (ps.at(Tok::Semi)) ps.take();
    if (ps.at(Tok::End)) break;
    try {
      if (ps.at(Tok::Data)) {
        Token kw = ps.take();
        DataDecl d;
        d.span = kw.span;
        d.name = ps.expect(Tok::UIdent, "type name").text;
        while (ps.at(Tok::LIdent)) d.params.push_back(ps.take().text);
        ps.expect(Tok::Equals);
        std::vector<std::pair<std::string, std::vector<TypePtr>>> cs;
        while (true) {
          std::string cn = ps.expect(Tok::UIdent, "constructor name").text;
          std::vector<TypePtr> args;
          while (ps.at(Tok::UIdent) || ps.at(Tok::LIdent) ||
                 ps.at(Tok::LParen) || ps.at(Tok::LBrack))
            args.push_back(ps.atype());
          cs.push_back({cn, args});
          if (!ps.at(Tok::Bar)) break;
          ps.take();
        }
        out.data.push_back({d, cs});
      } else if ((ps.at(Tok::LIdent) && ps.peek(1).kind == Tok::DColon) ||
                 (ps.at(Tok::LParen) && ps.peek(1).kind == Tok::Op &&
                  ps.peek(2).kind == Tok::RParen &&
                  ps.peek(3).kind == Tok::DColon)) {
        SSig sg;
        sg.span = ps.peek().span;
        if (ps.at(Tok::LParen)) {
          ps.take();
          sg.name = ps.take().text;
          ps.take();
        } else {
          sg.name = ps.take().text;
        }
        ps.expect(Tok::DColon);
        sg.type = ps.type();
        out.sigs.push_back(sg);
      } else {
        SourceSpan sp = ps.peek().span;
        SExprPtr lhs = ps.expr();
        if (ps.at(Tok::Equals)) {
          ps.take();
          SExprPtr e = ps.expr();
          if (ps.at(Tok::Arrow)) {
            ps.take();
            SExprPtr r = ps.expr();
            out.rules.push_back({lhs, e, r, sp});
          } else {
            out.rules.push_back({lhs, nullptr, e, sp});
          }
        } else if (ps.at(Tok::Bar)) {
          while (ps.at(Tok::Bar)) {
            ps.take();
            SExprPtr g = ps.expr();
            ps.expect(Tok::Equals);
            SExprPtr r = ps.expr();
            out.rules.push_back({lhs, g, r, sp});
          }
        } else {
          syntax_error(ps.peek().span, "expected '=' or '|', found " +
                                           Parser::describe(ps.peek()));
        }
      }
      if (!ps.at(Tok::Semi) && !ps.at(Tok::End))
        syntax_error(ps.peek().span, "expected end of declaration, found " +
                                         Parser::describe(ps.peek()));
    } catch (const SyntaxError& e) {
      diags.push_back(e.diag);
      ps.skip_to_decl_end();
    }
  }
}

// Head name and raw argument list of a rule lhs.
bool rule_head(const SExprPtr& lhs, std::string& name,
               std::vector<SExprPtr>& args) {
  if (lhs->kind == SExpr::K::Name && !lhs->upper) {
    name = lhs->name;
    args = lhs->args;
    return true;
  }
  if (lhs->kind == SExpr::K::BinOp && !lhs->upper && lhs->parens == 0) {
    name = lhs->name;
    args = lhs->args;
    return true;
  }
  return false;
}

void check_type_names(const Program& p, const TypePtr& t,
                      const std::set<std::string>* params,
                      std::vector<Diagnostic>& diags, SourceSpan sp) {
  if (!t) return;
  if (t->kind == Type::Kind::Var) {
    if (params && !params->count(t->name))
      diags.push_back({"UnknownSymbol",
                       "type variable '" + t->name + "' not bound by the declaration",
                       sp, ""});
    return;
  }
  if (t->kind == Type::Kind::Con) {
    const DataDecl* d = p.find_type(t->name);
    if (!d) {
      diags.push_back({"UnknownSymbol", "unknown type '" + t->name + "'", sp, ""});
    } else if (d->params.size() != t->args.size()) {
      diags.push_back({"SyntaxError",
                       "type '" + t->name + "' expects " +
                           std::to_string(d->params.size()) + " parameters",
                       sp, ""});
    }
  }
  for (auto& a : t->args) check_type_names(p, a, params, diags, sp);
}

std::string rule_label(const std::string& fn, int idx) {
  return "rule " + std::to_string(idx) + " of " + fn;
}

void build_program(const RawDecls& raw, const RawDecls& prelude, Program& p,
                   std::vector<Diagnostic>& diags) {
  add_builtins(p);
  // Data declarations.
  for (auto& [decl, cs] : raw.data) {
    if (p.find_type(decl.name)) {
      diags.push_back({"DuplicateCtor", "type '" + decl.name + "' declared twice",
                       decl.span, ""});
      continue;
    }
    DataDecl d = decl;
    int di = static_cast<int>(p.data.size());
    for (auto& [cn, args] : cs) {
      if (p.ctors.count(cn)) {
        diags.push_back({"DuplicateCtor",
                         "constructor '" + cn + "' declared twice", decl.span, ""});
        continue;
      }
      p.ctors[cn] = CtorInfo{d.name, di, static_cast<int>(d.ctors.size()),
                             static_cast<int>(args.size())};
      d.ctors.push_back({cn, args});
    }
    p.data.push_back(d);
  }
  for (auto& d : p.data) {
    if (d.builtin) continue;
    std::set<std::string> params(d.params.begin(), d.params.end());
    for (auto& c : d.ctors)
      for (auto& a : c.args) check_type_names(p, a, &params, diags, d.span);
  }

  // Function heads and arities.
  std::map<std::string, int> arities;
  std::map<std::string, SourceSpan> first_span;
  std::vector<std::string> order;
  std::set<std::string> user_fns;
  auto collect = [&](const RawDecls& r, bool builtin) {
    for (auto& sr : r.rules) {
      std::string n;
      std::vector<SExprPtr> args;
      if (!rule_head(sr.lhs, n, args)) {
        if (!builtin)
          diags.push_back({"SyntaxError", "rule head must be a function application",
                           sr.span, ""});
        continue;
      }
      if (builtin && user_fns.count(n)) continue;
      if (!builtin) user_fns.insert(n);
      int ar = static_cast<int>(args.size());
      if (ar == 1 && args[0]->kind == SExpr::K::Tuple && args[0]->parens == 0 &&
          args[0]->args.size() != 1)
        ar = static_cast<int>(args[0]->args.size());
      auto it = arities.find(n);
      if (it == arities.end()) {
        arities[n] = ar;
        first_span[n] = sr.span;
        order.push_back(n);
      } else if (it->second != ar) {
        diags.push_back({"SyntaxError",
                         "function '" + n + "' defined with " +
                             std::to_string(it->second) + " and " +
                             std::to_string(ar) + " arguments",
                         sr.span, ""});
      }
    }
  };
  collect(raw, false);
  collect(prelude, true);
  for (auto& sg : raw.sigs) {
    if (!arities.count(sg.name))
      diags.push_back({"UnknownSymbol",
                       "signature for undefined function '" + sg.name + "'",
                       sg.span, ""});
    check_type_names(p, sg.type, nullptr, diags, sg.span);
  }

  Resolver res(p, diags, arities);
  auto resolve_rules = [&](const RawDecls& r, bool builtin) {
    for (auto& sr : r.rules) {
      std::string n;
      std::vector<SExprPtr> args;
      if (!rule_head(sr.lhs, n, args)) continue;
      if (builtin && user_fns.count(n)) continue;
      FunctionDef* f = p.find_fn(n);
      if (!f) {
        FunctionDef nf;
        nf.name = n;
        nf.arity = arities[n];
        nf.builtin = builtin;
        nf.is_operator = is_op_name(n);
        p.add_function(nf);
        f = p.find_fn(n);
      }
      Rule rule;
      rule.fn = n;
      rule.span = sr.span;
      rule.index = static_cast<int>(f->rules.size()) + 1;
      std::string label = rule_label(n, rule.index);
      int wild = 0;
      for (auto& a : res.spread(args, f->arity))
        rule.lhs.push_back(res.pattern(a, wild, label));
      std::set<std::string> scope;
      for (auto& l : rule.lhs)
        for (auto& v : var_set(l)) scope.insert(v);
      if (sr.guard) {
        rule.guard = res.expr(sr.guard, scope, label, true);
        for (auto& v : var_set(rule.guard)) scope.insert(v);
      }
      rule.rhs = res.expr(sr.rhs, scope, label, true);
      f->rules.push_back(rule);
    }
  };
  resolve_rules(raw, false);
  resolve_rules(prelude, true);
  // Keep user functions first, in order of appearance.
  std::vector<std::string> fo;
  for (auto& n : order)
    if (p.fns.count(n) && !p.fns[n].builtin) fo.push_back(n);
  for (auto& n : order)
    if (p.fns.count(n) && p.fns[n].builtin) fo.push_back(n);
  p.fn_order = fo;
  for (auto& sg : raw.sigs) {
    FunctionDef* f = p.find_fn(sg.name);
    if (f) f->declared = sg.type;
  }
}

}  // namespace

ParseResult parse_program(std::string_view text) {
  ParseResult out;
  std::vector<Token> toks;
  try {
    toks = lex(text);
  } catch (const SyntaxError& e) {
    out.diagnostics.push_back(e.diag);
    return out;
  }
  Parser ps(std::move(toks));
  RawDecls raw;
  parse_decls(ps, raw, out.diagnostics);
  if (!out.diagnostics.empty()) return out;

  RawDecls prelude;
  {
    Parser pp(lex(kPrelude));
    std::vector<Diagnostic> ignore;
    parse_decls(pp, prelude, ignore);
  }
  Program p;
  build_program(raw, prelude, p, out.diagnostics);
  if (!out.diagnostics.empty()) return out;
  p.type_diagnostics = infer_types(p);
  out.program = std::move(p);
  return out;
}

Program parse_program_or_throw(std::string_view text) {
  ParseResult r = parse_program(text);
  if (!r.ok()) {
    std::string msg = "parse failed";
    for (auto& d : r.diagnostics) msg += "\n  " + to_string(d);
    throw std::runtime_error(msg);
  }
  return *r.program;
}

GoalExpr parse_expr(const Program& p, std::string_view text) {
  std::vector<Token> toks;
  try {
    toks = lex(text);
  } catch (const SyntaxError& e) {
    throw std::runtime_error(to_string(e.diag));
  }
  Parser ps(std::move(toks));
  SExprPtr s;
  try {
    while (ps.at(Tok::Semi)) ps.take();
    s = ps.expr();
    while (ps.at(Tok::Semi)) ps.take();
    if (!ps.at(Tok::End))
      syntax_error(ps.peek().span, "unexpected " + Parser::describe(ps.peek()));
  } catch (const SyntaxError& e) {
    throw std::runtime_error(to_string(e.diag));
  }
  std::map<std::string, int> arities;
  for (auto& [n, f] : p.fns) arities[n] = f.arity;
  std::vector<Diagnostic> diags;
  Program scratch = p;
  Resolver res(scratch, diags, arities);
  GoalExpr g;
  g.expr = res.expr(s, {}, "goal", true);
  if (!diags.empty()) throw std::runtime_error(to_string(diags.front()));
  collect_vars(g.expr, g.vars);
  g.type = infer_expr_type(p, g.expr, g.var_types);
  return g;
}

}  // namespace demand
