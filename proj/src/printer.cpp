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
#include <sstream>

#include "demand/kernel.hpp"
#include "json.hpp"

namespace demand {
namespace {

bool is_op_name(const std::string& s) {
  return !s.empty() && std::string_view("!#$%&*+./<=>?@\\^|-~:").find(s[0]) !=
                           std::string_view::npos;
}

std::string var_name(const std::string& n) {
  if (n.size() < 2 || n[0] != '_') return n;
  for (size_t i = 1; i < n.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(n[i]))) return n;
  return "_";
}

// atom: the result must be safe as an application argument or operand.
void print(std::ostream& os, const Program& p, const ExprPtr& e, bool atom) {
  const auto& a = e->args;
  if (e->kind == Expr::Kind::Var) {
    os << var_name(e->name);
    return;
  }
  if (e->kind == Expr::Kind::Ctor && tuple_arity(e->name) >= 0) {
    os << "(";
    for (size_t i = 0; i < a.size(); ++i) {
      if (i) os << ", ";
      print(os, p, a[i], false);
    }
    os << ")";
    return;
  }
  if (a.empty()) {
    if (is_op_name(e->name)) os << "(" << e->name << ")";
    else os << e->name;
    return;
  }
  if (is_op_name(e->name) && a.size() == 2 && e->kind != Expr::Kind::VarApp) {
    if (atom) os << "(";
    print(os, p, a[0], true);
    os << " " << e->name << " ";
    print(os, p, a[1], true);
    if (atom) os << ")";
    return;
  }
  if (atom) os << "(";
  if (is_op_name(e->name)) os << "(" << e->name << ")";
  else os << e->name;
  for (auto& x : a) {
    os << " ";
    print(os, p, x, true);
  }
  if (atom) os << ")";
}

std::string type_atom(const TypePtr& t) {
  std::string s = to_string(t);
  if (t->kind == Type::Kind::Fun ||
      (t->kind == Type::Kind::Con && !t->args.empty() && t->name != "[]" &&
       tuple_arity(t->name) < 0))
    return "(" + s + ")";
  return s;
}

nlohmann::json expr_json(const ExprPtr& e) {
  nlohmann::json j;
  switch (e->kind) {
    case Expr::Kind::Var: j["var"] = e->name; return j;
    case Expr::Kind::Ctor: j["ctor"] = e->name; break;
    case Expr::Kind::App: j["app"] = e->name; break;
    case Expr::Kind::VarApp: j["varapp"] = e->name; break;
  }
  j["args"] = nlohmann::json::array();
  for (auto& a : e->args) j["args"].push_back(expr_json(a));
  return j;
}

}  // namespace

std::string print_expr(const Program& p, const ExprPtr& e) {
  std::ostringstream os;
  print(os, p, e, false);
  return os.str();
}

std::string print_rule(const Program& p, const Rule& r) {
  std::ostringstream os;
  const FunctionDef* f = p.find_fn(r.fn);
  bool infix = is_op_name(r.fn) && r.lhs.size() == 2;
  if (infix) {
    print(os, p, r.lhs[0], true);
    os << " " << r.fn << " ";
    print(os, p, r.lhs[1], true);
  } else {
    if (is_op_name(r.fn)) os << "(" << r.fn << ")";
    else os << r.fn;
    for (auto& l : r.lhs) {
      os << " ";
      print(os, p, l, true);
    }
  }
  (void)f;
  os << " = ";
  if (r.guard) {
    print(os, p, r.guard, false);
    os << " -> ";
  }
  print(os, p, r.rhs, false);
  return os.str();
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  for (auto& d : p.data) {
    if (d.builtin) continue;
    os << "data " << d.name;
    for (auto& v : d.params) os << " " << v;
    os << " =";
    for (size_t i = 0; i < d.ctors.size(); ++i) {
      os << (i ? " | " : " ") << d.ctors[i].name;
      for (auto& a : d.ctors[i].args) os << " " << type_atom(a);
    }
    os << "\n";
  }
  for (auto& n : p.fn_order) {
    const FunctionDef& f = p.fns.at(n);
    if (f.builtin) continue;
    if (f.declared) {
      if (is_op_name(n)) os << "(" << n << ")";
      else os << n;
      os << " :: " << to_string(f.declared) << "\n";
    }
    for (auto& r : f.rules) os << print_rule(p, r) << "\n";
  }
  return os.str();
}

std::string program_to_json(const Program& p) {
  nlohmann::json j;
  j["data"] = nlohmann::json::array();
  for (auto& d : p.data) {
    if (d.builtin) continue;
    nlohmann::json dj;
    dj["name"] = d.name;
    dj["params"] = d.params;
    dj["ctors"] = nlohmann::json::array();
    for (auto& c : d.ctors) {
      nlohmann::json cj;
      cj["name"] = c.name;
      cj["args"] = nlohmann::json::array();
      for (auto& a : c.args) cj["args"].push_back(to_string(a));
      dj["ctors"].push_back(cj);
    }
    j["data"].push_back(dj);
  }
  j["functions"] = nlohmann::json::array();
  for (auto& n : p.fn_order) {
    const FunctionDef& f = p.fns.at(n);
    nlohmann::json fj;
    fj["name"] = n;
    fj["arity"] = f.arity;
    fj["builtin"] = f.builtin;
    std::vector<TypePtr> args = f.arg_types;
    fj["type"] = f.result_type
                     ? to_string(args.empty() ? f.result_type
                                              : Type::fun(args, f.result_type))
                     : "";
    if (!f.join_of.empty()) fj["join_of"] = f.join_of;
    fj["rules"] = nlohmann::json::array();
    for (auto& r : f.rules) {
      nlohmann::json rj;
      rj["index"] = r.index;
      rj["line"] = r.span.line;
      rj["lhs"] = nlohmann::json::array();
      for (auto& l : r.lhs) rj["lhs"].push_back(expr_json(l));
      rj["guard"] = r.guard ? expr_json(r.guard) : nlohmann::json(nullptr);
      rj["rhs"] = expr_json(r.rhs);
      fj["rules"].push_back(rj);
    }
    j["functions"].push_back(fj);
  }
  return j.dump(2);
}

bool program_equal(const Program& a, const Program& b) {
  std::vector<const DataDecl*> da, db;
  for (auto& d : a.data)
    if (!d.builtin) da.push_back(&d);
  for (auto& d : b.data)
    if (!d.builtin) db.push_back(&d);
  if (da.size() != db.size()) return false;
  for (size_t i = 0; i < da.size(); ++i) {
    if (da[i]->name != db[i]->name || da[i]->params != db[i]->params ||
        da[i]->ctors.size() != db[i]->ctors.size())
      return false;
    for (size_t k = 0; k < da[i]->ctors.size(); ++k) {
      auto& ca = da[i]->ctors[k];
      auto& cb = db[i]->ctors[k];
      if (ca.name != cb.name || ca.args.size() != cb.args.size()) return false;
      for (size_t m = 0; m < ca.args.size(); ++m)
        if (!type_equal(ca.args[m], cb.args[m])) return false;
    }
  }
  auto ua = a.user_functions(), ub = b.user_functions();
  if (ua != ub) return false;
  for (auto& n : ua) {
    const FunctionDef& fa = a.fns.at(n);
    const FunctionDef& fb = b.fns.at(n);
    if (fa.arity != fb.arity || fa.rules.size() != fb.rules.size()) return false;
    if ((fa.declared == nullptr) != (fb.declared == nullptr)) return false;
    if (fa.declared && !type_equal(fa.declared, fb.declared)) return false;
    for (size_t i = 0; i < fa.rules.size(); ++i) {
      const Rule& ra = fa.rules[i];
      const Rule& rb = fb.rules[i];
      for (size_t k = 0; k < ra.lhs.size(); ++k)
        if (!expr_equal(ra.lhs[k], rb.lhs[k])) return false;
      if ((ra.guard == nullptr) != (rb.guard == nullptr)) return false;
      if (ra.guard && !expr_equal(ra.guard, rb.guard)) return false;
      if (!expr_equal(ra.rhs, rb.rhs)) return false;
    }
  }
  return true;
}

}  // namespace demand
