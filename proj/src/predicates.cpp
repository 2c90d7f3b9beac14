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

#include "demand/predicates.hpp"

#include <cctype>
#include <sstream>

namespace demand {

namespace {

std::shared_ptr<Pred> make(Pred::Kind k) {
  auto p = std::make_shared<Pred>();
  p->kind = k;
  return p;
}

// Surface names for constructors whose kernel names are symbolic.
std::string ctor_alias(const std::string& c) {
  if (c == ":") return "Cons";
  if (c == "[]") return "Nil";
  if (c == "()") return "Unit";
  int n = tuple_arity(c);
  if (n > 0) return "Tup" + std::to_string(n);
  return c;
}

std::string ctor_from_alias(const std::string& c) {
  if (c == "Cons") return ":";
  if (c == "Nil") return "[]";
  if (c == "Unit") return "()";
  if (c.rfind("Tup", 0) == 0 && c.size() > 3 &&
      std::all_of(c.begin() + 3, c.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
    return tuple_name(std::stoi(c.substr(3)));
  return c;
}

TypePtr bool_type() { return Type::con("Bool"); }

bool compatible(const TypePtr& a, const TypePtr& b) {
  if (!a || !b) return true;
  if (a->kind == Type::Kind::Var || b->kind == Type::Kind::Var) return true;
  if (a->kind != b->kind || a->name != b->name || a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!compatible(a->args[i], b->args[i])) return false;
  return true;
}

void match_type(const TypePtr& pat, const TypePtr& t, std::map<std::string, TypePtr>& s) {
  if (!pat || !t) return;
  if (pat->kind == Type::Kind::Var) {
    if (t->kind != Type::Kind::Var && !s.count(pat->name)) s[pat->name] = t;
    return;
  }
  if (pat->kind != t->kind || pat->name != t->name || pat->args.size() != t->args.size())
    return;
  for (size_t i = 0; i < pat->args.size(); ++i) match_type(pat->args[i], t->args[i], s);
}

std::string type_text(const TypePtr& t) {
  if (t && t->kind == Type::Kind::Con && t->name == "[]" && t->args.empty()) return "[]";
  return to_string(t);
}

}  // namespace

PredPtr pp_any() { return make(Pred::Kind::Any); }
PredPtr pp_nothing() { return make(Pred::Kind::Nothing); }
PredPtr pp_ctor(std::string ctor, std::vector<PredPtr> args) {
  auto p = make(Pred::Kind::Ctor);
  p->name = std::move(ctor);
  p->args = std::move(args);
  return p;
}
PredPtr pp_is(std::string ctor) {
  auto p = make(Pred::Kind::IsCtor);
  p->name = std::move(ctor);
  return p;
}
PredPtr pp_hnf(std::string type_name) {
  auto p = make(Pred::Kind::Hnf);
  p->name = std::move(type_name);
  return p;
}
PredPtr pp_nf(TypePtr type) {
  auto p = make(Pred::Kind::Nf);
  p->type = std::move(type);
  return p;
}
PredPtr pp_spine(TypePtr elem) {
  auto p = make(Pred::Kind::Spine);
  p->type = std::move(elem);
  return p;
}
PredPtr pp_meet(PredPtr a, PredPtr b) {
  auto p = make(Pred::Kind::Meet);
  p->args = {std::move(a), std::move(b)};
  return p;
}
PredPtr pp_join(PredPtr a, PredPtr b) {
  auto p = make(Pred::Kind::Join);
  p->args = {std::move(a), std::move(b)};
  return p;
}
PredPtr pp_product(std::vector<PredPtr> ps) {
  auto p = make(Pred::Kind::Product);
  p->args = std::move(ps);
  return p;
}
PredPtr pp_proj(std::string ctor, int k, PredPtr inner) {
  auto p = make(Pred::Kind::Proj);
  p->name = std::move(ctor);
  p->k = k;
  p->args = {std::move(inner)};
  return p;
}
PredPtr pp_user(std::string fn) {
  auto p = make(Pred::Kind::User);
  p->name = std::move(fn);
  return p;
}
PredPtr pp_fold(int combiner, bool base_true) {
  auto p = make(Pred::Kind::Fold);
  p->k = combiner;
  p->base_true = base_true;
  return p;
}
PredPtr pp_named(std::string name) {
  auto p = make(Pred::Kind::Named);
  p->name = std::move(name);
  return p;
}

std::string pred_name(const PredPtr& p) {
  switch (p->kind) {
    case Pred::Kind::Any:
      return "any";
    case Pred::Kind::Nothing:
      return "nothing";
    case Pred::Kind::Ctor: {
      std::string s = ctor_alias(p->name);
      if (p->args.empty()) return s;
      s += "(";
      for (size_t i = 0; i < p->args.size(); ++i)
        s += (i ? ", " : "") + pred_name(p->args[i]);
      return s + ")";
    }
    case Pred::Kind::IsCtor:
      return "is@" + ctor_alias(p->name);
    case Pred::Kind::Hnf:
      return "hnf@" + p->name;
    case Pred::Kind::Nf:
      return "nf@" + type_text(p->type);
    case Pred::Kind::Spine:
      return p->type ? "spine@" + type_text(p->type) : "spine";
    case Pred::Kind::Meet:
      return "(" + pred_name(p->args[0]) + " /\\ " + pred_name(p->args[1]) + ")";
    case Pred::Kind::Join:
      return "(" + pred_name(p->args[0]) + " \\/ " + pred_name(p->args[1]) + ")";
    case Pred::Kind::Product: {
      std::string s = "(";
      for (size_t i = 0; i < p->args.size(); ++i)
        s += (i ? " x " : "") + pred_name(p->args[i]);
      return s + ")";
    }
    case Pred::Kind::Proj:
      return "prj" + std::to_string(p->k) + "@" + ctor_alias(p->name) + "(" +
             pred_name(p->args[0]) + ")";
    case Pred::Kind::User:
      return "user:" + p->name;
    case Pred::Kind::Fold:
      return "fold@c" + std::to_string(p->k) + (p->base_true ? "@True" : "@bot");
    case Pred::Kind::Named:
      return "~" + p->name;
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class PredParser {
 public:
  PredParser(const Program& p, const std::string& s) : prog_(p), s_(s) {}

  PredPtr parse() {
    PredPtr r = join();
    ws();
    if (i_ != s_.size()) error("unexpected '" + s_.substr(i_) + "'");
    return r;
  }

 private:
  [[noreturn]] void error(const std::string& m) {
    throw PredError("predicate syntax: " + m + " in '" + s_ + "'");
  }
  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(const std::string& t) {
    ws();
    if (s_.compare(i_, t.size(), t) == 0) {
      i_ += t.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& t) {
    if (!eat(t)) error("expected '" + t + "'");
  }
  std::string ident() {
    ws();
    size_t j = i_;
    while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_' ||
                             s_[j] == '\'' || s_[j] == '.'))
      ++j;
    if (j == i_) error("expected a name");
    std::string r = s_.substr(i_, j - i_);
    i_ = j;
    return r;
  }
  // Operator-named functions are allowed after "user:".
  std::string fn_name() {
    ws();
    size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != ')' &&
           s_[j] != ',')
      ++j;
    if (j == i_) error("expected a function name");
    std::string r = s_.substr(i_, j - i_);
    i_ = j;
    return r;
  }

  TypePtr type_atom() {
    ws();
    if (eat("[")) {
      if (eat("]")) return Type::con("[]");
      TypePtr e = type();
      expect("]");
      return Type::list(e);
    }
    if (eat("(")) {
      std::vector<TypePtr> ts;
      if (!eat(")")) {
        ts.push_back(type());
        while (eat(",")) ts.push_back(type());
        expect(")");
      }
      if (ts.size() == 1) return ts[0];
      return Type::tuple(ts);
    }
    std::string n = ident();
    if (std::islower(static_cast<unsigned char>(n[0]))) return Type::var(n);
    if (n == "List") return Type::con("[]");
    return Type::con(n);
  }
  TypePtr type() {
    TypePtr head = type_atom();
    if (head->kind != Type::Kind::Con || !head->args.empty() || head->name == "[]") return head;
    const DataDecl* d = prog_.find_type(head->name);
    if (!d || d->params.empty()) return head;
    std::vector<TypePtr> args;
    for (size_t k = 0; k < d->params.size(); ++k) args.push_back(type_atom());
    return Type::con(head->name, args);
  }

  PredPtr join() {
    PredPtr l = meet();
    while (eat("\\/")) l = pp_join(l, meet());
    return l;
  }
  PredPtr meet() {
    PredPtr l = atom();
    while (eat("/\\")) l = pp_meet(l, atom());
    return l;
  }
  bool product_sep() {
    ws();
    if (eat("×")) return true;
    if (i_ < s_.size() && s_[i_] == 'x' && i_ + 1 < s_.size() &&
        (std::isspace(static_cast<unsigned char>(s_[i_ + 1])) || s_[i_ + 1] == '(')) {
      ++i_;
      return true;
    }
    return false;
  }
  std::vector<PredPtr> arg_list() {
    std::vector<PredPtr> args;
    if (eat("(")) {
      if (!eat(")")) {
        args.push_back(join());
        while (eat(",")) args.push_back(join());
        expect(")");
      }
    }
    return args;
  }
  std::string ctor_name() {
    ws();
    if (eat("[]")) return "[]";
    if (eat("(:)")) return ":";
    std::string c = ctor_from_alias(ident());
    if (!prog_.find_ctor(c)) error("unknown constructor " + c);
    return c;
  }

  PredPtr atom() {
    ws();
    if (eat("(")) {
      std::vector<PredPtr> ps{join()};
      while (product_sep()) ps.push_back(join());
      expect(")");
      return ps.size() == 1 ? ps[0] : pp_product(ps);
    }
    if (eat("~")) return pp_named(fn_name());
    if (eat("user:")) {
      std::string f = fn_name();
      if (!prog_.find_fn(f)) error("unknown function " + f);
      return pp_user(f);
    }
    if (eat("[]")) return pp_ctor("[]", {});
    std::string w = ident();
    if (w == "any") return pp_any();
    if (w == "nothing") return pp_nothing();
    if (w == "spine") {
      if (eat("@")) return pp_spine(type());
      return pp_spine();
    }
    if (w == "hnf") {
      expect("@");
      TypePtr t = type();
      if (t->kind != Type::Kind::Con || !prog_.find_type(t->name))
        error("hnf needs a declared data type");
      return pp_hnf(t->name);
    }
    if (w == "nf") {
      expect("@");
      return nf_pred(prog_, type());
    }
    if (w == "is") {
      expect("@");
      return pp_is(ctor_name());
    }
    if (w == "fold") {
      expect("@");
      std::string c = ident();
      if (c.size() != 2 || c[0] != 'c' || c[1] < '0' || c[1] > '5') error("bad combiner " + c);
      expect("@");
      bool base;
      if (eat("True")) base = true;
      else if (eat("bot") || eat("_|_") || eat("⊥")) base = false;
      else error("fold base must be True or bot");
      return pp_fold(c[1] - '0', base);
    }
    if (w.rfind("prj", 0) == 0 && w.size() > 3) {
      int k = std::stoi(w.substr(3));
      expect("@");
      std::string c = ctor_name();
      expect("(");
      PredPtr inner = join();
      expect(")");
      int ar = prog_.find_ctor(c)->arity;
      if (k < 1 || k > ar) error("projection index out of range");
      return pp_proj(c, k, inner);
    }
    std::string c = ctor_from_alias(w);
    if (std::isupper(static_cast<unsigned char>(w[0])) && prog_.find_ctor(c)) {
      std::vector<PredPtr> args = arg_list();
      int ar = prog_.find_ctor(c)->arity;
      if (static_cast<int>(args.size()) != ar)
        error("constructor " + w + " expects " + std::to_string(ar) + " predicates");
      return pp_ctor(c, args);
    }
    if (prog_.find_fn(w)) return pp_user(w);
    error("unknown predicate " + w);
  }

  const Program& prog_;
  std::string s_;
  size_t i_ = 0;
};

}  // namespace

PredPtr parse_pred(const Program& p, const std::string& text) {
  return PredParser(p, text).parse();
}

PredPtr hnf_as_join(const Program& p, const std::string& type_name) {
  const DataDecl* d = p.find_type(type_name);
  if (!d) throw PredError("unknown type " + type_name);
  PredPtr r;
  for (auto& c : d->ctors) r = r ? pp_join(r, pp_is(c.name)) : pp_is(c.name);
  return r ? r : pp_nothing();
}

PredPtr nf_pred(const Program& p, const TypePtr& t) {
  if (!t || t->kind == Type::Kind::Fun) throw PredError("nf is defined on data types only");
  if (type_has_vars(t))
    throw PredError("nf needs a monotype, got " + to_string(t));
  if (!p.find_type(t->name)) throw PredError("unknown type " + to_string(t));
  return pp_nf(t);
}

// ---------------------------------------------------------------------------
// Typing

TypePtr pred_domain(const Program& prog, const PredPtr& p) {
  switch (p->kind) {
    case Pred::Kind::Any:
    case Pred::Kind::Nothing:
    case Pred::Kind::Named:
      return nullptr;
    case Pred::Kind::Ctor: {
      TypePtr res = prog.ctor_result_type(p->name);
      const CtorInfo* ci = prog.find_ctor(p->name);
      const auto& decl = prog.data[ci->data_index].ctors[ci->index];
      std::map<std::string, TypePtr> s;
      for (size_t i = 0; i < p->args.size(); ++i)
        match_type(decl.args[i], pred_domain(prog, p->args[i]), s);
      return subst_type(res, s);
    }
    case Pred::Kind::IsCtor:
      return prog.ctor_result_type(p->name);
    case Pred::Kind::Hnf: {
      const DataDecl* d = prog.find_type(p->name);
      std::vector<TypePtr> ps;
      for (auto& v : d->params) ps.push_back(Type::var(v));
      return Type::con(p->name, ps);
    }
    case Pred::Kind::Nf:
      return p->type;
    case Pred::Kind::Spine:
      return Type::list(p->type ? p->type : Type::var("a"));
    case Pred::Kind::Meet:
    case Pred::Kind::Join: {
      TypePtr a = pred_domain(prog, p->args[0]), b = pred_domain(prog, p->args[1]);
      if (!a) return b;
      if (!b) return a;
      return type_has_vars(a) && !type_has_vars(b) ? b : a;
    }
    case Pred::Kind::Product: {
      std::vector<TypePtr> ts;
      for (size_t i = 0; i < p->args.size(); ++i) {
        TypePtr t = pred_domain(prog, p->args[i]);
        ts.push_back(t ? t : Type::var("t" + std::to_string(i + 1)));
      }
      return Type::tuple(ts);
    }
    case Pred::Kind::Proj: {
      TypePtr d = pred_domain(prog, p->args[0]);
      if (!d) return nullptr;
      return prog.ctor_arg_types(p->name, d).at(p->k - 1);
    }
    case Pred::Kind::User: {
      const FunctionDef* f = prog.find_fn(p->name);
      if (!f) throw PredError("unknown function " + p->name);
      if (f->arity == 1) return f->arg_types.at(0);
      return Type::tuple(f->arg_types);
    }
    case Pred::Kind::Fold:
      return Type::list(Type::con("Nat"));
  }
  return nullptr;
}

void check_pred_type(const Program& prog, const PredPtr& p, const TypePtr& t) {
  auto fail = [&]() {
    throw PredError("predicate " + pred_name(p) + " cannot apply to type " + to_string(t));
  };
  if (!t || t->kind == Type::Kind::Var) return;
  if (t->kind == Type::Kind::Fun) fail();
  switch (p->kind) {
    case Pred::Kind::Any:
    case Pred::Kind::Nothing:
    case Pred::Kind::Named:
      return;
    case Pred::Kind::Ctor: {
      const CtorInfo* ci = prog.find_ctor(p->name);
      if (!ci || ci->type != t->name) fail();
      auto ats = prog.ctor_arg_types(p->name, t);
      for (size_t i = 0; i < p->args.size(); ++i) check_pred_type(prog, p->args[i], ats[i]);
      return;
    }
    case Pred::Kind::IsCtor: {
      const CtorInfo* ci = prog.find_ctor(p->name);
      if (!ci || ci->type != t->name) fail();
      return;
    }
    case Pred::Kind::Hnf:
      if (p->name != t->name) fail();
      return;
    case Pred::Kind::Meet:
    case Pred::Kind::Join:
      check_pred_type(prog, p->args[0], t);
      check_pred_type(prog, p->args[1], t);
      return;
    case Pred::Kind::Product:
      if (tuple_arity(t->name) != static_cast<int>(p->args.size())) fail();
      for (size_t i = 0; i < p->args.size(); ++i) check_pred_type(prog, p->args[i], t->args[i]);
      return;
    default:
      if (!compatible(pred_domain(prog, p), t)) fail();
  }
}

// ---------------------------------------------------------------------------
// Compilation to kernel rules

namespace {

ExprPtr conj(std::vector<ExprPtr> es) {
  if (es.empty()) return mk_ctor("True");
  ExprPtr r = es.back();
  for (size_t i = es.size() - 1; i-- > 0;) r = mk_app("&&", {es[i], r});
  return r;
}

Rule make_rule(const std::string& fn, std::vector<ExprPtr> lhs, ExprPtr rhs, int index) {
  Rule r;
  r.fn = fn;
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  r.index = index;
  return r;
}

std::vector<ExprPtr> fresh_vars(int n, const std::string& base) {
  std::vector<ExprPtr> vs;
  for (int i = 1; i <= n; ++i) vs.push_back(mk_var(base + std::to_string(i)));
  return vs;
}

}  // namespace

PredContext::PredContext(const Program& p, EvalOptions opts) : prog_(p), opts_(opts) {}
PredContext::~PredContext() = default;

Evaluator& PredContext::evaluator() {
  if (dirty_ || !ev_) {
    ev_ = std::make_unique<Evaluator>(prog_, opts_);
    dirty_ = false;
  }
  ev_->set_fuel(opts_.fuel);
  return *ev_;
}

std::string PredContext::define(const std::string& name, const TypePtr& t,
                                std::vector<Rule> rules) {
  FunctionDef f;
  f.name = name;
  f.arity = 1;
  f.rules = std::move(rules);
  for (size_t i = 0; i < f.rules.size(); ++i) {
    f.rules[i].index = static_cast<int>(i) + 1;
    f.rules[i].fn = name;
  }
  f.arg_types = {t ? t : Type::var("a")};
  f.result_type = bool_type();
  f.builtin = true;
  prog_.add_function(std::move(f));
  dirty_ = true;
  return name;
}

std::string PredContext::compile(const PredPtr& p, const TypePtr& t0) {
  TypePtr t = t0 ? t0 : pred_domain(prog_, p);
  check_pred_type(prog_, p, t);
  if (p->kind == Pred::Kind::User && prog_.find_fn(p->name)->arity == 1) return p->name;
  std::string key = "pp:" + pred_name(p) + (t ? "::" + to_string(t) : "");
  auto it = compiled_.find(key);
  if (it != compiled_.end()) return it->second;
  compiled_[key] = key;
  // Reserve the name so recursive predicates can refer to themselves.
  define(key, t, {});
  compile_rules(p, t);
  return key;
}

std::string PredContext::compile_rules(const PredPtr& p, const TypePtr& t) {
  std::string self = "pp:" + pred_name(p) + (t ? "::" + to_string(t) : "");
  std::vector<Rule> rules;
  auto x = mk_var("x");
  auto truth = mk_ctor("True");
  auto data_of = [&](const std::string& ctor) {
    if (t && t->kind == Type::Kind::Con) return t;
    return prog_.ctor_result_type(ctor);
  };
  auto call = [&](const PredPtr& q, const TypePtr& qt, ExprPtr arg) {
    if (q->kind == Pred::Kind::Any) return ExprPtr();
    return mk_app(compile(q, qt), {std::move(arg)});
  };
  switch (p->kind) {
    case Pred::Kind::Any:
      rules.push_back(make_rule(self, {x}, truth, 1));
      break;
    case Pred::Kind::Nothing:
      break;
    case Pred::Kind::Ctor: {
      TypePtr dt = data_of(p->name);
      auto ats = prog_.ctor_arg_types(p->name, dt);
      auto vs = fresh_vars(static_cast<int>(p->args.size()), "x");
      std::vector<ExprPtr> cs;
      for (size_t i = 0; i < vs.size(); ++i)
        if (auto c = call(p->args[i], ats[i], vs[i])) cs.push_back(c);
      rules.push_back(make_rule(self, {mk_ctor(p->name, vs)}, conj(cs), 1));
      break;
    }
    case Pred::Kind::IsCtor: {
      int ar = prog_.find_ctor(p->name)->arity;
      rules.push_back(make_rule(self, {mk_ctor(p->name, fresh_vars(ar, "_"))}, truth, 1));
      break;
    }
    case Pred::Kind::Hnf: {
      const DataDecl* d = prog_.find_type(p->name);
      for (auto& c : d->ctors)
        rules.push_back(make_rule(
            self, {mk_ctor(c.name, fresh_vars(static_cast<int>(c.args.size()), "_"))}, truth, 0));
      break;
    }
    case Pred::Kind::Nf: {
      const DataDecl* d = prog_.find_type(p->type->name);
      for (auto& c : d->ctors) {
        auto ats = prog_.ctor_arg_types(c.name, p->type);
        auto vs = fresh_vars(static_cast<int>(ats.size()), "x");
        std::vector<ExprPtr> cs;
        for (size_t i = 0; i < vs.size(); ++i)
          cs.push_back(mk_app(compile(nf_pred(prog_, ats[i]), ats[i]), {vs[i]}));
        rules.push_back(make_rule(self, {mk_ctor(c.name, vs)}, conj(cs), 0));
      }
      break;
    }
    case Pred::Kind::Spine:
      rules.push_back(make_rule(self, {mk_ctor("[]")}, truth, 0));
      rules.push_back(make_rule(self, {mk_ctor(":", {mk_var("_1"), mk_var("xs")})},
                                mk_app(self, {mk_var("xs")}), 0));
      break;
    case Pred::Kind::Meet:
    case Pred::Kind::Join: {
      auto a = mk_app(compile(p->args[0], t), {x});
      auto b = mk_app(compile(p->args[1], t), {x});
      rules.push_back(make_rule(self, {x}, mk_app(p->kind == Pred::Kind::Meet ? "&&" : "||", {a, b}), 0));
      break;
    }
    case Pred::Kind::Product: {
      int n = static_cast<int>(p->args.size());
      auto vs = fresh_vars(n, "x");
      std::vector<ExprPtr> cs;
      for (int i = 0; i < n; ++i) {
        TypePtr at = t && tuple_arity(t->name) == n ? t->args[i] : nullptr;
        if (auto c = call(p->args[i], at, vs[i])) cs.push_back(c);
      }
      rules.push_back(make_rule(self, {mk_ctor(tuple_name(n), vs)}, conj(cs), 0));
      break;
    }
    case Pred::Kind::Proj: {
      TypePtr inner_t = pred_domain(prog_, p->args[0]);
      if (!inner_t) inner_t = prog_.ctor_result_type(p->name);
      int ar = prog_.find_ctor(p->name)->arity;
      auto ats = prog_.ctor_arg_types(p->name, inner_t);
      std::vector<ExprPtr> args;
      Rule r = make_rule(self, {x}, truth, 0);
      for (int i = 1; i <= ar; ++i) {
        if (i == p->k) {
          args.push_back(x);
        } else {
          std::string y = "y" + std::to_string(i);
          args.push_back(mk_var(y));
          r.var_types[y] = ats[i - 1];
        }
      }
      r.var_types["x"] = ats[p->k - 1];
      r.guard = mk_app(compile(p->args[0], inner_t), {mk_ctor(p->name, args)});
      rules.push_back(r);
      break;
    }
    case Pred::Kind::User: {
      const FunctionDef* f = prog_.find_fn(p->name);
      auto vs = fresh_vars(f->arity, "x");
      rules.push_back(make_rule(self, {mk_ctor(tuple_name(f->arity), vs)}, mk_app(p->name, vs), 0));
      break;
    }
    case Pred::Kind::Fold: {
      TypePtr nat = Type::con("Nat");
      if (!prog_.find_type("Nat")) throw PredError("fold predicates need the Nat type");
      std::string e = compile(pp_nf(nat), nat);
      if (p->base_true) rules.push_back(make_rule(self, {mk_ctor("[]")}, truth, 0));
      auto hd = mk_var("y"), tl = mk_var("ys");
      auto lhs = mk_ctor(":", {hd, tl});
      auto ex = mk_app(e, {hd});
      auto rec = mk_app(self, {tl});
      ExprPtr body;
      switch (p->k) {
        case 1: body = ex; break;
        case 2: body = mk_app("&&", {ex, rec}); break;
        case 3: body = truth; break;
        case 4: body = rec; break;
        case 5: body = mk_app("||", {ex, rec}); break;
        default: break;
      }
      if (body) rules.push_back(make_rule(self, {lhs}, body, 0));
      break;
    }
    case Pred::Kind::Named:
      throw PredError("predicate " + pred_name(p) + " has no kernel definition");
  }
  FunctionDef* f = prog_.find_fn(self);
  TypePtr at = f->arg_types[0];
  for (auto& r : rules) {
    r.var_types.emplace("x", at);
  }
  define(self, at, std::move(rules));
  return self;
}

bool PredContext::apply(const PredPtr& p, const PTermPtr& t, const TypePtr& ty) {
  std::string fn = compile(p, ty);
  PTermPtr r = evaluator().apply(fn, {t});
  return !r->bot && r->ctor == "True";
}

bool PredContext::apply_composed(const PredPtr& d, const std::string& f, const PTermPtr& args) {
  const FunctionDef* fd = prog_.find_fn(f);
  if (!fd) throw PredError("unknown function " + f);
  std::string fn = compile(d, fd->result_type);
  PTermPtr r = evaluator().apply_composed(fn, f, args);
  return !r->bot && r->ctor == "True";
}

bool apply_predicate(const Program& p, const PredPtr& pp, const PTermPtr& t, long fuel) {
  EvalOptions o;
  o.fuel = fuel;
  PredContext ctx(p, o);
  return ctx.apply(pp, t);
}

std::optional<PTermPtr> refute_typing(PredContext& ctx, const std::string& f,
                                      const PredPtr& pi1, const PredPtr& pi2, int depth) {
  const FunctionDef* fd = ctx.program().find_fn(f);
  if (!fd) throw PredError("unknown function " + f);
  TypePtr at = fd->arity == 1 ? fd->arg_types.at(0) : Type::tuple(fd->arg_types);
  check_pred_type(ctx.program(), pi1, at);
  check_pred_type(ctx.program(), pi2, fd->result_type);
  Enumerator en(ctx.program());
  for (auto& t : en.arg_tuples(*fd, depth)) {
    try {
      if (ctx.apply_composed(pi2, f, t) && !ctx.apply(pi1, t, at)) return t;
    } catch (const InconsistentOverlap&) {
    }
  }
  return std::nullopt;
}

std::optional<PTermPtr> refute_typing(const Program& p, const std::string& f,
                                      const PredPtr& pi1, const PredPtr& pi2, int depth,
                                      long fuel) {
  EvalOptions o;
  o.fuel = fuel;
  PredContext ctx(p, o);
  return refute_typing(ctx, f, pi1, pi2, depth);
}

std::optional<PTermPtr> pred_not_leq(PredContext& ctx, const PredPtr& a, const PredPtr& b,
                                     const TypePtr& t, int depth) {
  Enumerator en(ctx.program());
  for (auto& x : en.terms(t, depth))
    if (ctx.apply(a, x, t) && !ctx.apply(b, x, t)) return x;
  return std::nullopt;
}

bool pred_equal_on_slice(PredContext& ctx, const PredPtr& a, const PredPtr& b,
                         const TypePtr& t, int depth) {
  return !pred_not_leq(ctx, a, b, t, depth) && !pred_not_leq(ctx, b, a, t, depth);
}

std::vector<FoldClass> fold_domain(PredContext& ctx, int depth) {
  TypePtr lt = Type::list(Type::con("Nat"));
  std::vector<PredPtr> all{pp_any()};
  for (int c = 0; c <= 5; ++c)
    for (bool base : {false, true}) all.push_back(pp_fold(c, base));
  Enumerator en(ctx.program());
  const auto& slice = en.terms(lt, depth);
  std::vector<std::vector<bool>> sig;
  std::vector<FoldClass> out;
  for (auto& p : all) {
    std::vector<bool> s;
    for (auto& t : slice) s.push_back(ctx.apply(p, t, lt));
    bool placed = false;
    for (size_t i = 0; i < out.size() && !placed; ++i) {
      if (sig[i] == s) {
        out[i].members.push_back(p);
        placed = true;
      }
    }
    if (!placed) {
      out.push_back({p, {p}});
      sig.push_back(s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grammars

namespace {

struct GrammarBuilder {
  Grammar& g;
  const Program& prog;
  const PredResolver& resolve;
  std::map<std::string, int> nf_memo;

  int nf(const TypePtr& t) {
    std::string key = to_string(t);
    auto it = nf_memo.find(key);
    if (it != nf_memo.end()) return it->second;
    const DataDecl* d = prog.find_type(t->name);
    if (!d) throw PredError("unknown type " + key);
    int x = g.add_nt("nf@" + key);
    nf_memo[key] = x;
    for (auto& c : d->ctors) {
      std::vector<int> kids;
      for (auto& a : prog.ctor_arg_types(c.name, t)) kids.push_back(nf(a));
      g.add_prod(x, c.name, kids);
    }
    return x;
  }

  int build(const PredPtr& p, const TypePtr& t) {
    switch (p->kind) {
      case Pred::Kind::Any:
        return Grammar::kAny;
      case Pred::Kind::Nothing:
        return Grammar::kNothing;
      case Pred::Kind::Ctor: {
        TypePtr dt = t && t->kind == Type::Kind::Con ? t : pred_domain(prog, p);
        auto ats = prog.ctor_arg_types(p->name, dt);
        std::vector<int> kids;
        for (size_t i = 0; i < p->args.size(); ++i) kids.push_back(build(p->args[i], ats[i]));
        int x = g.add_nt(pred_name(p));
        g.add_prod(x, p->name, kids);
        return x;
      }
      case Pred::Kind::IsCtor: {
        int x = g.add_nt(pred_name(p));
        g.add_prod(x, p->name, std::vector<int>(prog.find_ctor(p->name)->arity, Grammar::kAny));
        return x;
      }
      case Pred::Kind::Hnf: {
        int x = g.add_nt(pred_name(p));
        for (auto& c : prog.find_type(p->name)->ctors)
          g.add_prod(x, c.name, std::vector<int>(c.args.size(), Grammar::kAny));
        return x;
      }
      case Pred::Kind::Nf:
        return nf(p->type);
      case Pred::Kind::Spine: {
        int x = g.add_nt(pred_name(p));
        g.add_prod(x, "[]", {});
        g.add_prod(x, ":", {Grammar::kAny, x});
        return x;
      }
      case Pred::Kind::Meet:
        return g.intersect(build(p->args[0], t), build(p->args[1], t));
      case Pred::Kind::Join:
        return g.unite(build(p->args[0], t), build(p->args[1], t));
      case Pred::Kind::Product: {
        int n = static_cast<int>(p->args.size());
        std::vector<int> kids;
        for (int i = 0; i < n; ++i)
          kids.push_back(build(p->args[i], t && tuple_arity(t->name) == n ? t->args[i] : nullptr));
        int x = g.add_nt(pred_name(p));
        g.add_prod(x, tuple_name(n), kids);
        return x;
      }
      case Pred::Kind::Proj: {
        int inner = build(p->args[0], pred_domain(prog, p->args[0]));
        g.sig().intern(p->name, prog.find_ctor(p->name)->arity);
        return g.inv_proj(p->name, p->k, inner);
      }
      case Pred::Kind::Fold: {
        int e = nf(Type::con("Nat"));
        int x = g.add_nt(pred_name(p));
        if (p->base_true) g.add_prod(x, "[]", {});
        switch (p->k) {
          case 1: g.add_prod(x, ":", {e, Grammar::kAny}); break;
          case 2: g.add_prod(x, ":", {e, x}); break;
          case 3: g.add_prod(x, ":", {Grammar::kAny, Grammar::kAny}); break;
          case 4: g.add_prod(x, ":", {Grammar::kAny, x}); break;
          case 5:
            g.add_prod(x, ":", {e, Grammar::kAny});
            g.add_prod(x, ":", {Grammar::kAny, x});
            break;
          default: break;
        }
        return x;
      }
      case Pred::Kind::User:
      case Pred::Kind::Named: {
        int r = resolve ? resolve(g, p) : -1;
        if (r < 0) throw PredError("no grammar known for " + pred_name(p));
        return r;
      }
    }
    return Grammar::kNothing;
  }
};

}  // namespace

int pred_grammar(Grammar& g, const Program& prog, const PredPtr& p, const TypePtr& t,
                 const PredResolver& resolve) {
  GrammarBuilder b{g, prog, resolve, {}};
  return b.build(p, t ? t : pred_domain(prog, p));
}

}  // namespace demand
