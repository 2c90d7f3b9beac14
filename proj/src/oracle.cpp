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

#include "demand/oracle.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

namespace demand {

PTermPtr PTerm::bottom() {
  static const PTermPtr b = std::make_shared<PTerm>();
  return b;
}

PTermPtr PTerm::node(std::string ctor, std::vector<PTermPtr> args) {
  auto t = std::make_shared<PTerm>();
  t->bot = false;
  t->ctor = std::move(ctor);
  t->args = std::move(args);
  return t;
}

namespace {

void print_pterm(std::ostream& os, const PTermPtr& t, bool atom) {
  if (t->bot) {
    os << "_|_";
    return;
  }
  if (tuple_arity(t->ctor) >= 0) {
    os << "(";
    for (size_t i = 0; i < t->args.size(); ++i) {
      if (i) os << ", ";
      print_pterm(os, t->args[i], false);
    }
    os << ")";
    return;
  }
  if (t->ctor == ":" && t->args.size() == 2) {
    // Proper lists print as literals.
    std::vector<PTermPtr> els;
    PTermPtr cur = t;
    while (!cur->bot && cur->ctor == ":") {
      els.push_back(cur->args[0]);
      cur = cur->args[1];
    }
    if (!cur->bot && cur->ctor == "[]") {
      os << "[";
      for (size_t i = 0; i < els.size(); ++i) {
        if (i) os << ", ";
        print_pterm(os, els[i], false);
      }
      os << "]";
      return;
    }
    if (atom) os << "(";
    print_pterm(os, t->args[0], true);
    os << " : ";
    print_pterm(os, t->args[1], false);
    if (atom) os << ")";
    return;
  }
  if (t->args.empty()) {
    os << t->ctor;
    return;
  }
  if (atom) os << "(";
  os << t->ctor;
  for (auto& a : t->args) {
    os << " ";
    print_pterm(os, a, true);
  }
  if (atom) os << ")";
}

}  // namespace

std::string to_string(const PTermPtr& t) {
  std::ostringstream os;
  print_pterm(os, t, false);
  return os.str();
}

bool pterm_equal(const PTermPtr& a, const PTermPtr& b) {
  if (a == b) return true;
  if (a->bot || b->bot) return a->bot == b->bot;
  if (a->ctor != b->ctor || a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!pterm_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool pterm_leq(const PTermPtr& a, const PTermPtr& b) {
  if (a->bot) return true;
  if (b->bot) return false;
  if (a->ctor != b->ctor || a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!pterm_leq(a->args[i], b->args[i])) return false;
  return true;
}

std::optional<PTermPtr> pterm_lub(const PTermPtr& a, const PTermPtr& b) {
  if (a->bot) return b;
  if (b->bot) return a;
  if (a->ctor != b->ctor || a->args.size() != b->args.size()) return std::nullopt;
  std::vector<PTermPtr> args;
  for (size_t i = 0; i < a->args.size(); ++i) {
    auto l = pterm_lub(a->args[i], b->args[i]);
    if (!l) return std::nullopt;
    args.push_back(*l);
  }
  return PTerm::node(a->ctor, args);
}

int height(const PTermPtr& t) {
  if (t->bot) return 0;
  int h = 0;
  for (auto& a : t->args) h = std::max(h, height(a));
  return h + 1;
}

PTermPtr pterm_from_expr(const ExprPtr& e) {
  if (e->kind == Expr::Kind::Var) return PTerm::bottom();
  if (e->kind != Expr::Kind::Ctor)
    throw std::runtime_error("not a constructor term: " + e->name);
  std::vector<PTermPtr> args;
  for (auto& a : e->args) args.push_back(pterm_from_expr(a));
  return PTerm::node(e->name, args);
}

PTermPtr parse_pterm(const Program& p, const std::string& text) {
  std::string s = std::regex_replace(text, std::regex("_\\|_"), " bot ");
  s = std::regex_replace(s, std::regex("(^|[^A-Za-z0-9_'])_(?![A-Za-z0-9_'])"),
                         "$1bot");
  // Every bottom gets its own variable so that the goal stays well typed.
  std::regex bot("\\bbot\\b");
  std::string renamed;
  int k = 0;
  auto begin = std::sregex_iterator(s.begin(), s.end(), bot);
  size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    renamed += s.substr(last, it->position() - last);
    renamed += "bot" + std::to_string(++k);
    last = it->position() + it->length();
  }
  renamed += s.substr(last);
  return pterm_from_expr(parse_expr(p, renamed).expr);
}

TypePtr default_instance_type(const Program& p) {
  if (p.find_type("Nat")) return Type::con("Nat");
  return Type::con("Bool");
}

// ---------------------------------------------------------------------------

Enumerator::Enumerator(const Program& p) : p_(p), fill_(default_instance_type(p)) {}

const std::vector<PTermPtr>& Enumerator::terms(const TypePtr& t0, int depth) {
  TypePtr t = ground_type(t0, fill_);
  std::string key = to_string(t) + "#" + std::to_string(depth);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  std::vector<PTermPtr> out{PTerm::bottom()};
  if (t->kind != Type::Kind::Con)
    throw UnknownType("cannot enumerate values of type " + to_string(t));
  const DataDecl* d = p_.find_type(t->name);
  if (!d) throw UnknownType("unknown type " + to_string(t));
  if (depth > 0) {
    for (auto& c : d->ctors) {
      std::vector<TypePtr> ats = p_.ctor_arg_types(c.name, t);
      std::vector<const std::vector<PTermPtr>*> pools;
      for (auto& at : ats) pools.push_back(&terms(at, depth - 1));
      std::vector<size_t> idx(ats.size(), 0);
      while (true) {
        std::vector<PTermPtr> args;
        for (size_t k = 0; k < ats.size(); ++k) args.push_back((*pools[k])[idx[k]]);
        out.push_back(PTerm::node(c.name, args));
        int k = static_cast<int>(ats.size()) - 1;
        while (k >= 0 && ++idx[k] == pools[k]->size()) idx[k--] = 0;
        if (k < 0) break;
      }
    }
  }
  return memo_[key] = out;
}

std::vector<PTermPtr> Enumerator::arg_tuples(const FunctionDef& f, int depth) {
  if (f.arity == 1) return terms(f.arg_types.at(0), depth);
  std::vector<const std::vector<PTermPtr>*> pools;
  for (auto& at : f.arg_types) pools.push_back(&terms(at, depth));
  std::vector<PTermPtr> out;
  std::vector<size_t> idx(pools.size(), 0);
  std::string tn = tuple_name(f.arity);
  while (true) {
    std::vector<PTermPtr> args;
    for (size_t k = 0; k < pools.size(); ++k) args.push_back((*pools[k])[idx[k]]);
    out.push_back(PTerm::node(tn, args));
    int k = static_cast<int>(pools.size()) - 1;
    while (k >= 0 && ++idx[k] == pools[k]->size()) idx[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

std::vector<PTermPtr> enumerate_partial_terms(const Program& p,
                                              const TypePtr& t, int depth) {
  Enumerator e(p);
  return e.terms(t, depth);
}

std::vector<PTermPtr> spread_args(const FunctionDef& f, const PTermPtr& t) {
  if (f.arity == 1) return {t};
  if (t->bot) return std::vector<PTermPtr>(f.arity, PTerm::bottom());
  return t->args;
}

// ---------------------------------------------------------------------------
// Lazy evaluation with memoized thunks, fuel and lub over overlapping rules.

namespace {

struct Thunk;
using ThunkP = std::shared_ptr<Thunk>;

struct Env {
  std::vector<std::pair<std::string, ThunkP>> binds;
  const ThunkP* find(const std::string& n) const {
    for (auto& b : binds)
      if (b.first == n) return &b.second;
    return nullptr;
  }
};
using EnvP = std::shared_ptr<Env>;

struct WV {
  bool bot = true;
  std::string ctor;
  std::vector<ThunkP> args;
};

struct Thunk {
  enum class K { Expr, Lub, Lit, Call };
  K kind;
  ExprPtr expr;
  EnvP env;
  std::vector<ThunkP> parts;  // Lub parts or Call arguments
  std::string fn;
  PTermPtr lit;
  bool done = false;
  WV value;
};

ThunkP expr_thunk(const ExprPtr& e, const EnvP& env) {
  auto t = std::make_shared<Thunk>();
  t->kind = Thunk::K::Expr;
  t->expr = e;
  t->env = env;
  return t;
}

ThunkP lit_thunk(const PTermPtr& p) {
  auto t = std::make_shared<Thunk>();
  t->kind = Thunk::K::Lit;
  t->lit = p;
  return t;
}

ThunkP call_thunk(const std::string& fn, std::vector<ThunkP> args) {
  auto t = std::make_shared<Thunk>();
  t->kind = Thunk::K::Call;
  t->fn = fn;
  t->parts = std::move(args);
  return t;
}

enum class Match { Ok, Fail, Bot };

}  // namespace

struct Evaluator::Impl {
  const Program& p;
  EvalOptions opts;
  long fuel = 0;
  long exhaust = 0;
  Enumerator enumr;

  Impl(const Program& prog, EvalOptions o) : p(prog), opts(o), enumr(prog) {}

  WV whnf(const ThunkP& t) {
    if (t->done) return t->value;
    long ex0 = exhaust;
    WV v = compute(*t);
    if (exhaust == ex0) {
      t->done = true;
      t->value = v;
      t->expr = nullptr;
      t->env = nullptr;
      t->parts.clear();
    }
    return v;
  }

  WV compute(Thunk& t) {
    switch (t.kind) {
      case Thunk::K::Lit: {
        WV v;
        if (t.lit->bot) return v;
        v.bot = false;
        v.ctor = t.lit->ctor;
        for (auto& a : t.lit->args) v.args.push_back(lit_thunk(a));
        return v;
      }
      case Thunk::K::Lub: {
        std::vector<WV> vs;
        for (auto& part : t.parts) vs.push_back(whnf(part));
        return lub(vs);
      }
      case Thunk::K::Call:
        return apply(t.fn, t.parts);
      case Thunk::K::Expr:
        return eval_expr(t.expr, t.env);
    }
    return {};
  }

  WV eval_expr(const ExprPtr& e, const EnvP& env) {
    switch (e->kind) {
      case Expr::Kind::Var: {
        const ThunkP* b = env ? env->find(e->name) : nullptr;
        if (!b) throw std::runtime_error("unbound variable " + e->name);
        return whnf(*b);
      }
      case Expr::Kind::Ctor: {
        WV v;
        v.bot = false;
        v.ctor = e->name;
        for (auto& a : e->args) v.args.push_back(arg_thunk(a, env));
        return v;
      }
      case Expr::Kind::App: {
        std::vector<ThunkP> args;
        for (auto& a : e->args) args.push_back(arg_thunk(a, env));
        return apply(e->name, args);
      }
      case Expr::Kind::VarApp:
        throw Unsupported("application of variable '" + e->name +
                          "' is outside the first-order fragment");
    }
    return {};
  }

  ThunkP arg_thunk(const ExprPtr& e, const EnvP& env) {
    if (e->kind == Expr::Kind::Var && env) {
      const ThunkP* b = env->find(e->name);
      if (b) return *b;
    }
    return expr_thunk(e, env);
  }

  WV lub(std::vector<WV>& vs) {
    std::vector<WV*> live;
    for (auto& v : vs)
      if (!v.bot) live.push_back(&v);
    if (live.empty()) return {};
    if (live.size() == 1) return *live[0];
    WV out;
    out.bot = false;
    out.ctor = live[0]->ctor;
    for (auto* v : live)
      if (v->ctor != out.ctor)
        throw InconsistentOverlap("overlapping rules produce " + out.ctor +
                                  " and " + v->ctor);
    for (size_t k = 0; k < live[0]->args.size(); ++k) {
      auto t = std::make_shared<Thunk>();
      t->kind = Thunk::K::Lub;
      for (auto* v : live) t->parts.push_back(v->args[k]);
      out.args.push_back(t);
    }
    return out;
  }

  Match match(const ExprPtr& pat, const ThunkP& arg, Env& env) {
    if (pat->kind == Expr::Kind::Var) {
      env.binds.push_back({pat->name, arg});
      return Match::Ok;
    }
    WV v = whnf(arg);
    if (v.bot) return Match::Bot;
    if (v.ctor != pat->name) return Match::Fail;
    for (size_t k = 0; k < pat->args.size(); ++k) {
      Match m = match(pat->args[k], v.args[k], env);
      if (m != Match::Ok) return m;
    }
    return Match::Ok;
  }

  struct RuleResult {
    bool applicable = false;
    WV value;
  };

  RuleResult body(const Rule& r, const EnvP& env) {
    if (r.guard) {
      WV g = whnf(expr_thunk(r.guard, env));
      if (g.bot) return {true, {}};
      if (g.ctor != "True") return {false, {}};
    }
    return {true, whnf(expr_thunk(r.rhs, env))};
  }

  RuleResult try_rule(const Rule& r, const std::vector<ThunkP>& args) {
    auto env = std::make_shared<Env>();
    for (size_t k = 0; k < r.lhs.size(); ++k) {
      Match m = match(r.lhs[k], args[k], *env);
      if (m == Match::Fail) return {false, {}};
      if (m == Match::Bot) return {true, {}};
    }
    std::vector<std::string> free;
    std::vector<std::string> used;
    if (r.guard) collect_vars(r.guard, used);
    collect_vars(r.rhs, used);
    for (auto& v : used)
      if (!env->find(v)) free.push_back(v);
    if (free.empty()) return body(r, env);

    // Existential search over instantiations of the free variables.
    std::vector<const std::vector<PTermPtr>*> pools;
    for (auto& v : free) {
      auto it = r.var_types.find(v);
      TypePtr t = it != r.var_types.end() ? it->second : Type::var("a");
      pools.push_back(&enumr.terms(t, opts.search_depth));
    }
    std::vector<size_t> idx(free.size(), 0);
    RuleResult acc;
    std::vector<WV> results;
    long f0 = fuel, left = fuel;
    while (true) {
      auto e2 = std::make_shared<Env>(*env);
      for (size_t k = 0; k < free.size(); ++k)
        e2->binds.push_back({free[k], lit_thunk((*pools[k])[idx[k]])});
      fuel = f0;
      RuleResult rr = body(r, e2);
      left = std::min(left, fuel);
      if (rr.applicable) {
        acc.applicable = true;
        if (!rr.value.bot) {
          results.push_back(rr.value);
          // A total Two-valued answer cannot grow further.
          if (rr.value.ctor == "True" && rr.value.args.empty()) break;
        }
      }
      int k = static_cast<int>(free.size()) - 1;
      while (k >= 0 && ++idx[k] == pools[k]->size()) idx[k--] = 0;
      if (k < 0) break;
    }
    fuel = left;
    acc.value = lub(results);
    return acc;
  }

  WV apply(const std::string& fn, const std::vector<ThunkP>& args) {
    if (fuel <= 0) {
      ++exhaust;
      return {};
    }
    --fuel;
    const FunctionDef* f = p.find_fn(fn);
    if (!f) throw std::runtime_error("unknown function " + fn);
    if (f->rules.size() == 1) {
      RuleResult r = try_rule(f->rules[0], args);
      return r.applicable ? r.value : WV{};
    }
    std::vector<WV> results;
    long f0 = fuel, left = fuel;
    for (auto& rule : f->rules) {
      fuel = f0;
      RuleResult r = try_rule(rule, args);
      left = std::min(left, fuel);
      if (r.applicable && !r.value.bot) results.push_back(r.value);
    }
    fuel = left;
    return lub(results);
  }

  PTermPtr deep(const ThunkP& t) {
    WV v = whnf(t);
    if (v.bot) return PTerm::bottom();
    std::vector<PTermPtr> args;
    for (auto& a : v.args) args.push_back(deep(a));
    return PTerm::node(v.ctor, args);
  }
};

Evaluator::Evaluator(const Program& p, EvalOptions opts)
    : impl_(std::make_unique<Impl>(p, opts)) {}

Evaluator::~Evaluator() = default;

PTermPtr Evaluator::eval(const ExprPtr& e,
                         const std::map<std::string, PTermPtr>& env) {
  impl_->fuel = impl_->opts.fuel;
  impl_->exhaust = 0;
  auto en = std::make_shared<Env>();
  for (auto& [k, v] : env) en->binds.push_back({k, lit_thunk(v)});
  return impl_->deep(expr_thunk(e, en));
}

PTermPtr Evaluator::apply(const std::string& fn,
                          const std::vector<PTermPtr>& args) {
  impl_->fuel = impl_->opts.fuel;
  impl_->exhaust = 0;
  std::vector<ThunkP> ts;
  for (auto& a : args) ts.push_back(lit_thunk(a));
  return impl_->deep(call_thunk(fn, ts));
}

PTermPtr Evaluator::apply_tuple(const std::string& fn, const PTermPtr& args) {
  const FunctionDef* f = impl_->p.find_fn(fn);
  if (!f) throw std::runtime_error("unknown function " + fn);
  return apply(fn, spread_args(*f, args));
}

PTermPtr Evaluator::apply_composed(const std::string& d, const std::string& fn,
                                   const PTermPtr& args) {
  const FunctionDef* f = impl_->p.find_fn(fn);
  if (!f) throw std::runtime_error("unknown function " + fn);
  impl_->fuel = impl_->opts.fuel;
  impl_->exhaust = 0;
  std::vector<ThunkP> ts;
  for (auto& a : spread_args(*f, args)) ts.push_back(lit_thunk(a));
  ThunkP inner = call_thunk(fn, ts);
  return impl_->deep(call_thunk(d, {inner}));
}

bool Evaluator::exhausted() const { return impl_->exhaust > 0; }

void Evaluator::set_fuel(long fuel) { impl_->opts.fuel = fuel; }

const Program& Evaluator::program() const { return impl_->p; }

PTermPtr eval(const Program& p, const ExprPtr& e,
              const std::map<std::string, PTermPtr>& env, long fuel) {
  EvalOptions o;
  o.fuel = fuel;
  Evaluator ev(p, o);
  return ev.eval(e, env);
}

}  // namespace demand
