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

struct TypeError {
  std::string msg;
};

class Unifier {
 public:
  TypePtr fresh() {
    binds_.push_back(nullptr);
    return Type::var("?" + std::to_string(binds_.size() - 1));
  }

  static int meta_id(const TypePtr& t) {
    if (t->kind != Type::Kind::Var || t->name.empty() || t->name[0] != '?')
      return -1;
    return std::stoi(t->name.substr(1));
  }

  TypePtr resolve(TypePtr t) const {
    while (true) {
      int id = meta_id(t);
      if (id < 0 || !binds_[id]) return t;
      t = binds_[id];
    }
  }

  TypePtr zonk(const TypePtr& t0) const {
    TypePtr t = resolve(t0);
    if (t->args.empty()) return t;
    auto r = std::make_shared<Type>(*t);
    for (auto& a : r->args) a = zonk(a);
    return r;
  }

  bool occurs(int id, const TypePtr& t0) const {
    TypePtr t = resolve(t0);
    if (meta_id(t) == id) return true;
    for (auto& a : t->args)
      if (occurs(id, a)) return true;
    return false;
  }

  void unify(const TypePtr& a0, const TypePtr& b0) {
    TypePtr a = resolve(a0), b = resolve(b0);
    int ia = meta_id(a), ib = meta_id(b);
    if (ia >= 0 && ia == ib) return;
    if (ia >= 0) {
      if (occurs(ia, b)) fail(a, b);
      binds_[ia] = b;
      return;
    }
    if (ib >= 0) {
      if (occurs(ib, a)) fail(a, b);
      binds_[ib] = a;
      return;
    }
    if (a->kind != b->kind || a->name != b->name ||
        a->args.size() != b->args.size())
      fail(a, b);
    for (size_t i = 0; i < a->args.size(); ++i) unify(a->args[i], b->args[i]);
  }

  [[noreturn]] void fail(const TypePtr& a, const TypePtr& b) const {
    throw TypeError{"cannot unify " + to_string(zonk(a)) + " with " +
                    to_string(zonk(b))};
  }

  // Replaces the non-meta type variables of t by fresh metas.
  TypePtr instantiate(const TypePtr& t, std::map<std::string, TypePtr>& m) {
    if (!t) return fresh();
    if (t->kind == Type::Kind::Var && meta_id(t) < 0) {
      auto it = m.find(t->name);
      if (it != m.end()) return it->second;
      return m[t->name] = fresh();
    }
    if (t->args.empty()) return t;
    auto r = std::make_shared<Type>(*t);
    for (auto& a : r->args) a = instantiate(a, m);
    return r;
  }

 private:
  std::vector<TypePtr> binds_;
};

struct MonoSig {
  std::vector<TypePtr> args;
  TypePtr result;
};

class Inferencer {
 public:
  explicit Inferencer(const Program& p) : p_(p) {}

  Unifier u;
  std::map<std::string, MonoSig> mono;  // functions of the current SCC

  MonoSig scheme_instance(const std::string& f) {
    auto it = mono.find(f);
    if (it != mono.end()) return it->second;
    const FunctionDef* fd = p_.find_fn(f);
    if (!fd) throw TypeError{"unknown function '" + f + "'"};
    std::map<std::string, TypePtr> m;
    MonoSig s;
    for (auto& a : fd->arg_types) s.args.push_back(u.instantiate(a, m));
    s.result = u.instantiate(fd->result_type, m);
    while (static_cast<int>(s.args.size()) < fd->arity) s.args.push_back(u.fresh());
    return s;
  }

  TypePtr expr(const ExprPtr& e, std::map<std::string, TypePtr>& env) {
    switch (e->kind) {
      case Expr::Kind::Var: {
        auto it = env.find(e->name);
        if (it != env.end()) return it->second;
        return env[e->name] = u.fresh();
      }
      case Expr::Kind::Ctor: {
        const CtorInfo* ci = p_.find_ctor(e->name);
        if (!ci) throw TypeError{"unknown constructor '" + e->name + "'"};
        std::map<std::string, TypePtr> m;
        TypePtr res = u.instantiate(p_.ctor_result_type(e->name), m);
        const CtorDecl& cd = p_.ctor_decl(e->name);
        if (cd.args.size() != e->args.size())
          throw TypeError{"constructor '" + e->name + "' arity mismatch"};
        for (size_t i = 0; i < e->args.size(); ++i)
          u.unify(expr(e->args[i], env), u.instantiate(cd.args[i], m));
        return res;
      }
      case Expr::Kind::App: {
        MonoSig s = scheme_instance(e->name);
        if (s.args.size() != e->args.size())
          throw TypeError{"function '" + e->name + "' arity mismatch"};
        for (size_t i = 0; i < e->args.size(); ++i)
          u.unify(expr(e->args[i], env), s.args[i]);
        return s.result;
      }
      case Expr::Kind::VarApp: {
        TypePtr ft;
        auto it = env.find(e->name);
        if (it != env.end()) ft = it->second;
        else ft = env[e->name] = u.fresh();
        std::vector<TypePtr> as;
        for (auto& a : e->args) as.push_back(expr(a, env));
        TypePtr res = u.fresh();
        u.unify(ft, Type::fun(as, res));
        return res;
      }
    }
    return u.fresh();
  }

 private:
  const Program& p_;
};

// Renames remaining metas to a, b, c, ... in order of appearance.
class Generalizer {
 public:
  TypePtr operator()(const TypePtr& t) {
    if (t->kind == Type::Kind::Var && Unifier::meta_id(t) >= 0) {
      auto it = names_.find(t->name);
      if (it != names_.end()) return it->second;
      std::string n;
      int k = static_cast<int>(names_.size());
      do {
        n = std::string(1, static_cast<char>('a' + k % 26));
        if (k >= 26) n += std::to_string(k / 26);
        ++k;
      } while (taken_.count(n));
      taken_.insert(n);
      return names_[t->name] = Type::var(n);
    }
    if (t->args.empty()) return t;
    auto r = std::make_shared<Type>(*t);
    for (auto& a : r->args) a = (*this)(a);
    return r;
  }
  void reserve(const TypePtr& t) {
    if (!t) return;
    if (t->kind == Type::Kind::Var && Unifier::meta_id(t) < 0) taken_.insert(t->name);
    for (auto& a : t->args) reserve(a);
  }

 private:
  std::map<std::string, TypePtr> names_;
  std::set<std::string> taken_;
};

void calls_of(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::App) out.insert(e->name);
  for (auto& a : e->args) calls_of(a, out);
}

std::vector<std::vector<std::string>> sccs(const Program& p) {
  std::map<std::string, std::set<std::string>> g;
  for (auto& n : p.fn_order) {
    auto& s = g[n];
    for (auto& r : p.fns.at(n).rules) {
      calls_of(r.guard, s);
      calls_of(r.rhs, s);
      for (auto& l : r.lhs) calls_of(l, s);
    }
  }
  std::map<std::string, int> index, low;
  std::set<std::string> on;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;
  std::function<void(const std::string&)> strong = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on.insert(v);
    for (auto& w : g[v]) {
      if (!g.count(w)) continue;
      if (!index.count(w)) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on.erase(w);
        comp.push_back(w);
      } while (w != v);
      out.push_back(comp);
    }
  };
  for (auto& n : p.fn_order)
    if (!index.count(n)) strong(n);
  return out;  // callees before callers
}

// Splits a declared signature into argument types and result.
bool split_signature(const TypePtr& sig, int arity, std::vector<TypePtr>& args,
                     TypePtr& res) {
  if (arity == 0) {
    if (sig->kind == Type::Kind::Fun) return false;
    res = sig;
    return true;
  }
  if (sig->kind != Type::Kind::Fun) return false;
  std::vector<TypePtr> ps(sig->args.begin(), sig->args.end() - 1);
  res = sig->args.back();
  if (static_cast<int>(ps.size()) == arity) {
    args = ps;
    return true;
  }
  if (ps.size() == 1 && tuple_arity(ps[0]->name) == arity &&
      ps[0]->kind == Type::Kind::Con) {
    args = ps[0]->args;
    return true;
  }
  return false;
}

}  // namespace

std::vector<Diagnostic> infer_types(Program& p) {
  std::vector<Diagnostic> diags;
  for (auto& comp : sccs(p)) {
    Inferencer inf(p);
    std::map<std::string, std::vector<std::map<std::string, TypePtr>>> envs;
    bool failed = false;
    for (auto& n : comp) {
      FunctionDef& f = p.fns.at(n);
      MonoSig s;
      for (int i = 0; i < f.arity; ++i) s.args.push_back(inf.u.fresh());
      s.result = inf.u.fresh();
      if (f.declared) {
        std::vector<TypePtr> da;
        TypePtr dr;
        if (!split_signature(f.declared, f.arity, da, dr)) {
          diags.push_back({"IllTyped",
                           "signature of '" + n + "' does not match its arity " +
                               std::to_string(f.arity),
                           f.rules.empty() ? SourceSpan{} : f.rules[0].span,
                           "(ii) rule 1 of " + n});
          failed = true;
        } else {
          std::map<std::string, TypePtr> m;
          try {
            for (int i = 0; i < f.arity; ++i)
              inf.u.unify(s.args[i], inf.u.instantiate(da[i], m));
            inf.u.unify(s.result, inf.u.instantiate(dr, m));
          } catch (const TypeError&) {
          }
        }
      }
      inf.mono[n] = s;
    }
    for (auto& n : comp) {
      FunctionDef& f = p.fns.at(n);
      for (auto& r : f.rules) {
        std::map<std::string, TypePtr> env;
        try {
          const MonoSig& s = inf.mono[n];
          for (size_t i = 0; i < r.lhs.size(); ++i)
            inf.u.unify(inf.expr(r.lhs[i], env), s.args[i]);
          if (r.guard) inf.u.unify(inf.expr(r.guard, env), Type::con("Bool"));
          inf.u.unify(inf.expr(r.rhs, env), s.result);
        } catch (const TypeError& e) {
          diags.push_back({"IllTyped", "restriction (ii): " + e.msg, r.span,
                           "rule " + std::to_string(r.index) + " of " + n});
          failed = true;
        }
        envs[n].push_back(env);
      }
    }
    for (auto& n : comp) {
      FunctionDef& f = p.fns.at(n);
      Generalizer gen;
      if (f.declared && !failed) {
        std::vector<TypePtr> da;
        TypePtr dr;
        split_signature(f.declared, f.arity, da, dr);
      }
      const MonoSig& s = inf.mono[n];
      f.arg_types.clear();
      for (auto& a : s.args) f.arg_types.push_back(gen(inf.u.zonk(a)));
      f.result_type = gen(inf.u.zonk(s.result));
      for (size_t i = 0; i < f.rules.size(); ++i) {
        f.rules[i].var_types.clear();
        for (auto& [v, t] : envs[n][i]) f.rules[i].var_types[v] = gen(inf.u.zonk(t));
      }
    }
  }
  return diags;
}

TypePtr infer_expr_type(const Program& p, const ExprPtr& e,
                        std::map<std::string, TypePtr>& env) {
  Inferencer inf(p);
  std::map<std::string, TypePtr> local;
  std::map<std::string, TypePtr> inst;
  for (auto& [v, t] : env) local[v] = inf.u.instantiate(t, inst);
  TypePtr t;
  try {
    t = inf.expr(e, local);
  } catch (const TypeError& err) {
    throw std::runtime_error("ill-typed expression: " + err.msg);
  }
  Generalizer gen;
  TypePtr res = gen(inf.u.zonk(t));
  for (auto& [v, ty] : local) env[v] = gen(inf.u.zonk(ty));
  return res;
}

}  // namespace demand
