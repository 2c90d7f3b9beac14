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

#include "demand/kernel.hpp"

namespace demand {
namespace {

bool simple_arg(const ExprPtr& e) {
  if (e->kind == Expr::Kind::Var || is_ground(e)) return true;
  for (auto& a : e->args)
    if (!is_pattern(a) && !is_ground(a)) return false;
  return true;
}

class Normalizer {
 public:
  explicit Normalizer(Program& q) : q_(q) {}

  std::string cond_name() {
    if (!cond_.empty()) return cond_;
    std::string n = "cond";
    while (true) {
      const FunctionDef* f = q_.find_fn(n);
      if (!f) break;
      if (f->builtin && f->rules.size() == 1 && f->arity == 2) {
        cond_ = n;
        return n;
      }
      n += "'";
    }
    FunctionDef c;
    c.name = n;
    c.arity = 2;
    c.builtin = true;
    Rule r;
    r.fn = n;
    r.index = 1;
    r.lhs = {mk_ctor("True"), mk_var("x")};
    r.rhs = mk_var("x");
    r.var_types["x"] = Type::var("a");
    c.rules.push_back(r);
    c.arg_types = {Type::con("Bool"), Type::var("a")};
    c.result_type = Type::var("a");
    q_.add_function(c);
    cond_ = n;
    return n;
  }

  // Flattens the single rule of function g; aux functions are named
  // prefix.j for the j-th offending argument.
  void flatten(const std::string& g, const std::string& prefix,
               std::vector<std::string>& order) {
    Rule r = q_.fns.at(g).rules[0];
    const ExprPtr& e = r.rhs;
    if (e->kind == Expr::Kind::Var || is_ground(e)) return;
    std::vector<std::string> lhs_vars;
    for (auto& l : r.lhs) collect_vars(l, lhs_vars);
    auto ne = std::make_shared<Expr>(*e);
    bool changed = false;
    for (size_t j = 0; j < ne->args.size(); ++j) {
      const ExprPtr& a = ne->args[j];
      if (simple_arg(a)) continue;
      changed = true;
      std::string aux = prefix + "." + std::to_string(j + 1);
      std::set<std::string> used = var_set(a);
      FunctionDef fd;
      fd.name = aux;
      fd.builtin = q_.fns.at(g).builtin;
      Rule ar;
      ar.fn = aux;
      ar.index = 1;
      ar.span = r.span;
      std::vector<ExprPtr> call_args;
      std::map<std::string, TypePtr> env;
      for (auto& v : lhs_vars) {
        if (!used.count(v)) continue;
        ar.lhs.push_back(mk_var(v));
        call_args.push_back(mk_var(v));
        auto it = r.var_types.find(v);
        TypePtr t = it != r.var_types.end() ? it->second : Type::var("a");
        fd.arg_types.push_back(t);
        env[v] = t;
      }
      ar.rhs = a;
      for (auto& v : used) {
        auto it = r.var_types.find(v);
        if (it != r.var_types.end()) ar.var_types[v] = it->second;
      }
      fd.arity = static_cast<int>(ar.lhs.size());
      fd.rules.push_back(ar);
      try {
        std::map<std::string, TypePtr> env2 = env;
        fd.result_type = infer_expr_type(q_, a, env2);
      } catch (const std::exception&) {
        fd.result_type = Type::var("a");
      }
      q_.add_function(fd);
      order.push_back(aux);
      flatten(aux, aux, order);
      ne->args[j] = mk_app(aux, call_args);
    }
    if (changed) q_.fns.at(g).rules[0].rhs = ne;
  }

  void run() {
    std::vector<std::string> original = q_.fn_order;
    bool any_guard = false;
    for (auto& n : original)
      for (auto& r : q_.fns.at(n).rules)
        if (r.guard) any_guard = true;
    if (any_guard) cond_name();

    std::vector<std::string> order;
    for (auto& n : original) {
      order.push_back(n);
      FunctionDef& f = q_.fns.at(n);
      if (!f.join_of.empty()) continue;
      for (auto& r : f.rules) {
        if (!r.guard) continue;
        r.rhs = mk_app(cond_, {r.guard, r.rhs});
        r.guard = nullptr;
      }
      if (f.rules.size() <= 1) {
        if (!f.rules.empty()) flatten(n, n + ".1", order);
        continue;
      }
      std::vector<Rule> rules = f.rules;
      std::vector<ExprPtr> params;
      for (int i = 1; i <= f.arity; ++i) params.push_back(mk_var("x" + std::to_string(i)));
      f.rules.clear();
      for (size_t i = 0; i < rules.size(); ++i) {
        std::string sub = n + "." + std::to_string(i + 1);
        Rule d;
        d.fn = n;
        d.index = static_cast<int>(i) + 1;
        d.span = rules[i].span;
        d.lhs = params;
        d.rhs = mk_app(sub, params);
        for (int k = 0; k < f.arity; ++k)
          d.var_types["x" + std::to_string(k + 1)] =
              k < static_cast<int>(f.arg_types.size()) ? f.arg_types[k]
                                                       : Type::var("a");
        f.rules.push_back(d);
        f.join_of.push_back(sub);
      }
      FunctionDef fcopy = f;
      for (size_t i = 0; i < rules.size(); ++i) {
        std::string sub = n + "." + std::to_string(i + 1);
        FunctionDef sf;
        sf.name = sub;
        sf.arity = fcopy.arity;
        sf.arg_types = fcopy.arg_types;
        sf.result_type = fcopy.result_type;
        sf.builtin = fcopy.builtin;
        sf.is_operator = fcopy.is_operator;
        Rule r = rules[i];
        r.fn = sub;
        r.index = 1;
        sf.rules.push_back(r);
        q_.add_function(sf);
        order.push_back(sub);
        flatten(sub, sub, order);
      }
    }
    for (auto& n : q_.fn_order)
      if (std::find(order.begin(), order.end(), n) == order.end()) order.push_back(n);
    q_.fn_order = order;
  }

 private:
  Program& q_;
  std::string cond_;
};

}  // namespace

Program normalize(const Program& p) {
  Program q = p;
  Normalizer(q).run();
  return q;
}

}  // namespace demand
