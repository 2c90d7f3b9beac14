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

#include <algorithm>
#include <sstream>

#include "demand/kernel.hpp"

namespace demand {

TypePtr Type::var(std::string n) {
  auto t = std::make_shared<Type>();
  t->kind = Kind::Var;
  t->name = std::move(n);
  return t;
}

TypePtr Type::con(std::string n, std::vector<TypePtr> a) {
  auto t = std::make_shared<Type>();
  t->kind = Kind::Con;
  t->name = std::move(n);
  t->args = std::move(a);
  return t;
}

TypePtr Type::fun(std::vector<TypePtr> params, TypePtr result) {
  auto t = std::make_shared<Type>();
  t->kind = Kind::Fun;
  t->name = "->";
  t->args = std::move(params);
  t->args.push_back(std::move(result));
  return t;
}

TypePtr Type::list(TypePtr elem) { return con("[]", {std::move(elem)}); }

TypePtr Type::tuple(std::vector<TypePtr> elems) {
  std::string n = tuple_name(static_cast<int>(elems.size()));
  return con(n, std::move(elems));
}

std::string tuple_name(int arity) {
  if (arity == 0) return "()";
  return "(" + std::string(arity - 1, ',') + ")";
}

int tuple_arity(std::string_view name) {
  if (name == "()") return 0;
  if (name.size() < 3 || name.front() != '(' || name.back() != ')') return -1;
  for (size_t i = 1; i + 1 < name.size(); ++i)
    if (name[i] != ',') return -1;
  return static_cast<int>(name.size()) - 1;
}

namespace {

void print_type(std::ostream& os, const TypePtr& t, int prec) {
  if (!t) {
    os << "?";
    return;
  }
  switch (t->kind) {
    case Type::Kind::Var:
      os << t->name;
      return;
    case Type::Kind::Fun: {
      if (prec > 0) os << "(";
      for (size_t i = 0; i + 1 < t->args.size(); ++i) {
        print_type(os, t->args[i], 1);
        os << " -> ";
      }
      print_type(os, t->args.back(), 0);
      if (prec > 0) os << ")";
      return;
    }
    case Type::Kind::Con: {
      if (t->name == "[]" && t->args.size() == 1) {
        os << "[";
        print_type(os, t->args[0], 0);
        os << "]";
        return;
      }
      if (tuple_arity(t->name) >= 0) {
        os << "(";
        for (size_t i = 0; i < t->args.size(); ++i) {
          if (i) os << ", ";
          print_type(os, t->args[i], 0);
        }
        os << ")";
        return;
      }
      if (t->args.empty()) {
        os << t->name;
        return;
      }
      if (prec > 1) os << "(";
      os << t->name;
      for (auto& a : t->args) {
        os << " ";
        print_type(os, a, 2);
      }
      if (prec > 1) os << ")";
      return;
    }
  }
}

}  // namespace

std::string to_string(const TypePtr& t) {
  std::ostringstream os;
  print_type(os, t, 0);
  return os.str();
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name ||
      a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!type_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool type_has_vars(const TypePtr& t) {
  if (!t) return false;
  if (t->kind == Type::Kind::Var) return true;
  for (auto& a : t->args)
    if (type_has_vars(a)) return true;
  return false;
}

TypePtr subst_type(const TypePtr& t, const std::map<std::string, TypePtr>& s) {
  if (!t) return t;
  if (t->kind == Type::Kind::Var) {
    auto it = s.find(t->name);
    return it == s.end() ? t : it->second;
  }
  if (t->args.empty()) return t;
  auto r = std::make_shared<Type>(*t);
  for (auto& a : r->args) a = subst_type(a, s);
  return r;
}

TypePtr ground_type(const TypePtr& t, const TypePtr& fill) {
  if (!t) return fill;
  if (t->kind == Type::Kind::Var) return fill;
  if (t->args.empty()) return t;
  auto r = std::make_shared<Type>(*t);
  for (auto& a : r->args) a = ground_type(a, fill);
  return r;
}

// ---------------------------------------------------------------------------

ExprPtr mk_var(std::string name, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = std::move(name);
  e->span = span;
  return e;
}

ExprPtr mk_ctor(std::string name, std::vector<ExprPtr> args, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Ctor;
  e->name = std::move(name);
  e->args = std::move(args);
  e->span = span;
  return e;
}

ExprPtr mk_app(std::string name, std::vector<ExprPtr> args, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::App;
  e->name = std::move(name);
  e->args = std::move(args);
  e->span = span;
  return e;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name ||
      a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!expr_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool is_ground(const ExprPtr& e) {
  if (e->kind != Expr::Kind::Ctor) return false;
  for (auto& a : e->args)
    if (!is_ground(a)) return false;
  return true;
}

bool is_pattern(const ExprPtr& e) {
  if (e->kind == Expr::Kind::Var) return true;
  if (e->kind != Expr::Kind::Ctor) return false;
  for (auto& a : e->args)
    if (!is_pattern(a)) return false;
  return true;
}

void collect_vars(const ExprPtr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::Var || e->kind == Expr::Kind::VarApp) {
    if (std::find(out.begin(), out.end(), e->name) == out.end())
      out.push_back(e->name);
  }
  for (auto& a : e->args) collect_vars(a, out);
}

std::set<std::string> var_set(const ExprPtr& e) {
  std::vector<std::string> v;
  collect_vars(e, v);
  return {v.begin(), v.end()};
}

ExprPtr subst_expr(const ExprPtr& e, const std::map<std::string, ExprPtr>& s) {
  if (e->kind == Expr::Kind::Var) {
    auto it = s.find(e->name);
    return it == s.end() ? e : it->second;
  }
  if (e->args.empty()) return e;
  auto r = std::make_shared<Expr>(*e);
  for (auto& a : r->args) a = subst_expr(a, s);
  return r;
}

std::string position_string(const Position& p) {
  if (p.empty()) return "e";
  std::string s;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) s += ".";
    s += std::to_string(p[i]);
  }
  return s;
}

ExprPtr subterm_at(const ExprPtr& t, const Position& p) {
  ExprPtr cur = t;
  for (int i : p) {
    if (i < 1 || i > static_cast<int>(cur->args.size()))
      throw InvalidPosition("invalid position " + position_string(p));
    cur = cur->args[i - 1];
  }
  return cur;
}

namespace {

ExprPtr replace_rec(const ExprPtr& t, const Position& p, size_t k, ExprPtr s) {
  if (k == p.size()) return s;
  int i = p[k];
  if (i < 1 || i > static_cast<int>(t->args.size()))
    throw InvalidPosition("invalid position " + position_string(p));
  auto r = std::make_shared<Expr>(*t);
  r->args[i - 1] = replace_rec(t->args[i - 1], p, k + 1, std::move(s));
  return r;
}

void positions_rec(const ExprPtr& t, Position& cur, std::vector<Position>& out) {
  out.push_back(cur);
  for (size_t i = 0; i < t->args.size(); ++i) {
    cur.push_back(static_cast<int>(i) + 1);
    positions_rec(t->args[i], cur, out);
    cur.pop_back();
  }
}

}  // namespace

ExprPtr replace_at(const ExprPtr& t, const Position& p, ExprPtr s) {
  return replace_rec(t, p, 0, std::move(s));
}

std::string root(const ExprPtr& t) { return t->name; }

std::vector<Position> positions(const ExprPtr& t) {
  std::vector<Position> out;
  Position cur;
  positions_rec(t, cur, out);
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(const Diagnostic& d) {
  std::ostringstream os;
  os << d.code << " at " << d.span.line << ":" << d.span.col;
  if (!d.rule.empty()) os << " (" << d.rule << ")";
  os << ": " << d.message;
  return os.str();
}

const DataDecl* Program::find_type(const std::string& name) const {
  for (auto& d : data)
    if (d.name == name) return &d;
  return nullptr;
}

const CtorInfo* Program::find_ctor(const std::string& name) const {
  auto it = ctors.find(name);
  return it == ctors.end() ? nullptr : &it->second;
}

const FunctionDef* Program::find_fn(const std::string& name) const {
  auto it = fns.find(name);
  return it == fns.end() ? nullptr : &it->second;
}

FunctionDef* Program::find_fn(const std::string& name) {
  auto it = fns.find(name);
  return it == fns.end() ? nullptr : &it->second;
}

const CtorDecl& Program::ctor_decl(const std::string& name) const {
  const CtorInfo* ci = find_ctor(name);
  if (!ci) throw std::runtime_error("unknown constructor " + name);
  return data[ci->data_index].ctors[ci->index];
}

std::vector<TypePtr> Program::ctor_arg_types(const std::string& ctor,
                                             const TypePtr& data_type) const {
  const CtorInfo* ci = find_ctor(ctor);
  if (!ci) throw std::runtime_error("unknown constructor " + ctor);
  const DataDecl& d = data[ci->data_index];
  std::map<std::string, TypePtr> s;
  for (size_t i = 0; i < d.params.size(); ++i) {
    TypePtr a = (data_type && i < data_type->args.size()) ? data_type->args[i]
                                                          : Type::var(d.params[i]);
    s[d.params[i]] = a;
  }
  std::vector<TypePtr> out;
  for (auto& a : d.ctors[ci->index].args) out.push_back(subst_type(a, s));
  return out;
}

TypePtr Program::ctor_result_type(const std::string& ctor) const {
  const CtorInfo* ci = find_ctor(ctor);
  if (!ci) throw std::runtime_error("unknown constructor " + ctor);
  const DataDecl& d = data[ci->data_index];
  std::vector<TypePtr> ps;
  for (auto& p : d.params) ps.push_back(Type::var(p));
  return Type::con(d.name, ps);
}

std::vector<std::string> Program::user_functions() const {
  std::vector<std::string> out;
  for (auto& n : fn_order) {
    auto* f = find_fn(n);
    if (f && !f->builtin) out.push_back(n);
  }
  return out;
}

void Program::add_function(FunctionDef f) {
  std::string n = f.name;
  if (!fns.count(n)) fn_order.push_back(n);
  fns[n] = std::move(f);
}

}  // namespace demand
