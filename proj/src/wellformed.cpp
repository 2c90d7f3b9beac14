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
#include <functional>

#include "demand/kernel.hpp"

namespace demand {
namespace {

using Subst = std::map<std::string, ExprPtr>;

ExprPtr walk(const ExprPtr& e, const Subst& s) {
  ExprPtr cur = e;
  while (cur->kind == Expr::Kind::Var) {
    auto it = s.find(cur->name);
    if (it == s.end()) break;
    cur = it->second;
  }
  return cur;
}

bool occurs(const std::string& v, const ExprPtr& e0, const Subst& s) {
  ExprPtr e = walk(e0, s);
  if (e->kind == Expr::Kind::Var) return e->name == v;
  for (auto& a : e->args)
    if (occurs(v, a, s)) return true;
  return false;
}

bool unify(const ExprPtr& a0, const ExprPtr& b0, Subst& s) {
  ExprPtr a = walk(a0, s), b = walk(b0, s);
  if (a->kind == Expr::Kind::Var && b->kind == Expr::Kind::Var &&
      a->name == b->name)
    return true;
  if (a->kind == Expr::Kind::Var) {
    if (occurs(a->name, b, s)) return false;
    s[a->name] = b;
    return true;
  }
  if (b->kind == Expr::Kind::Var) return unify(b, a, s);
  if (a->name != b->name || a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!unify(a->args[i], b->args[i], s)) return false;
  return true;
}

ExprPtr resolve(const ExprPtr& e, const Subst& s) {
  ExprPtr w = walk(e, s);
  if (w->args.empty()) return w;
  auto r = std::make_shared<Expr>(*w);
  for (auto& a : r->args) a = resolve(a, s);
  return r;
}

ExprPtr rename(const ExprPtr& e, const std::string& suffix) {
  if (e->kind == Expr::Kind::Var) return mk_var(e->name + suffix, e->span);
  if (e->args.empty()) return e;
  auto r = std::make_shared<Expr>(*e);
  if (r->kind == Expr::Kind::VarApp) r->name += suffix;
  for (auto& a : r->args) a = rename(a, suffix);
  return r;
}

bool is_function_type(const TypePtr& t) {
  return t && t->kind == Type::Kind::Fun;
}

}  // namespace

std::vector<Diagnostic> check_wellformed(const Program& p) {
  std::vector<Diagnostic> out = p.type_diagnostics;
  for (auto& n : p.fn_order) {
    const FunctionDef& f = p.fns.at(n);
    if (f.builtin) continue;
    for (auto& r : f.rules) {
      std::string label = "rule " + std::to_string(r.index) + " of " + n;
      // (i) linear left-hand side
      std::vector<std::string> seen;
      std::function<void(const ExprPtr&)> scan = [&](const ExprPtr& e) {
        if (e->kind == Expr::Kind::Var) {
          if (std::find(seen.begin(), seen.end(), e->name) != seen.end()) {
            out.push_back({"NonLinearLhs",
                           "restriction (i): variable '" + e->name +
                               "' occurs more than once in the left-hand side",
                           r.span, label});
          }
          seen.push_back(e->name);
        }
        for (auto& a : e->args) scan(a);
      };
      for (auto& l : r.lhs) scan(l);
      // (iv) free variables only in the guard, and first-order
      std::set<std::string> lhs_vars(seen.begin(), seen.end());
      std::set<std::string> guard_vars = r.guard ? var_set(r.guard)
                                                 : std::set<std::string>{};
      for (auto& v : var_set(r.rhs)) {
        if (!lhs_vars.count(v) && !guard_vars.count(v))
          out.push_back({"FreeVarNotInGuard",
                         "restriction (iv): free variable '" + v +
                             "' occurs in the right-hand side outside the guard",
                         r.span, label});
      }
      for (auto& v : guard_vars) {
        if (lhs_vars.count(v)) continue;
        auto it = r.var_types.find(v);
        if (it != r.var_types.end() && is_function_type(it->second))
          out.push_back({"HigherOrderFreeVar",
                         "restriction (iv): free guard variable '" + v +
                             "' has a function type",
                         r.span, label});
      }
    }
    // (iii) overlapping rules agree on their instantiated bodies
    for (size_t i = 0; i < f.rules.size(); ++i) {
      for (size_t j = i + 1; j < f.rules.size(); ++j) {
        const Rule& a = f.rules[i];
        const Rule& b = f.rules[j];
        if (a.guard && b.guard) continue;
        Subst s;
        bool ok = true;
        for (size_t k = 0; k < a.lhs.size() && ok; ++k)
          ok = unify(rename(a.lhs[k], "#1"), rename(b.lhs[k], "#2"), s);
        if (!ok) continue;
        auto body = [&](const Rule& r, const std::string& sfx) {
          ExprPtr e = rename(r.rhs, sfx);
          if (r.guard) e = mk_app("->", {rename(r.guard, sfx), e});
          return resolve(e, s);
        };
        if (!expr_equal(body(a, "#1"), body(b, "#2"))) {
          out.push_back({"OverlapInconsistent",
                         "restriction (iii): rules " + std::to_string(a.index) +
                             " and " + std::to_string(b.index) + " of " + n +
                             " overlap with different instantiated right-hand sides",
                         b.span, "rule " + std::to_string(b.index) + " of " + n});
        }
      }
    }
  }
  return out;
}

}  // namespace demand
