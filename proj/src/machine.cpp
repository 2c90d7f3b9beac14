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

#include "demand/machine.hpp"

#include <pthread.h>

#include <algorithm>
#include <exception>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "demand/dtree.hpp"
#include "json.hpp"

namespace demand {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Eager: return "eager";
    case Strategy::NaiveLazy: return "lazy";
    case Strategy::DemandDriven: return "demand";
  }
  return "?";
}

std::string Answer::text() const {
  std::string s;
  for (auto& [v, t] : bindings) s += (s.empty() ? "" : ", ") + v + "=" + t;
  return "{" + s + "} -> " + value;
}

bool Answer::operator<(const Answer& o) const { return std::tie(bindings, value) < std::tie(o.bindings, o.value); }
bool Answer::operator==(const Answer& o) const { return bindings == o.bindings && value == o.value; }

namespace {

using K = std::function<void()>;

struct Node {
  enum class Kind { Ctor, App, Var, Ind };
  Kind kind = Kind::Var;
  std::string name;
  std::vector<int> args;
  int ident = -1;  // redex identity, App nodes only
  int depth = 0;   // Var: constructor nesting above it
  int target = -1; // Ind
};

class Machine {
 public:
  Machine(const Program& p, Strategy s, const EvalLimits& lim, Analyzer* a)
      : p_(p), s_(s), lim_(lim), a_(a) {}

  EvalStats run(const std::string& goal_text) {
    GoalExpr goal = parse_expr(p_, goal_text);
    std::map<std::string, int> env;
    for (auto& v : goal.vars) env[v] = fresh_var(0);
    int root = build(goal.expr, env, 0, -1, {}, true);
    nf(root, [&] { record(goal, env, root); });
    std::sort(stats_.answers.begin(), stats_.answers.end());
    return stats_;
  }

 private:
  // -- heap ----------------------------------------------------------------

  int push(Node n) {
    heap_.push_back(std::move(n));
    return static_cast<int>(heap_.size()) - 1;
  }

  int fresh_var(int depth) {
    Node n;
    n.kind = Node::Kind::Var;
    n.depth = depth;
    return push(n);
  }

  int deref(int n) const {
    while (heap_[n].kind == Node::Kind::Ind) n = heap_[n].target;
    return n;
  }

  // Overwrites node n for the duration of k.
  void with_update(int n, Node nv, const K& k) {
    Node old = heap_[n];
    heap_[n] = std::move(nv);
    k();
    heap_[n] = std::move(old);
  }

  int identity(int parent, int rule, const std::string& pos) {
    auto key = std::make_tuple(parent, rule, pos);
    auto it = idents_.find(key);
    if (it != idents_.end()) return it->second;
    int id = static_cast<int>(idents_.size()) + 1;
    idents_.emplace(key, id);
    return id;
  }

  int build(const ExprPtr& e, const std::map<std::string, int>& env, int parent, int rule, Position pos,
            bool goal) {
    switch (e->kind) {
      case Expr::Kind::Var: return env.at(e->name);
      case Expr::Kind::VarApp: throw std::runtime_error("higher-order application is not supported by the machine");
      case Expr::Kind::Ctor:
      case Expr::Kind::App: {
        Node n;
        n.kind = e->kind == Expr::Kind::Ctor ? Node::Kind::Ctor : Node::Kind::App;
        n.name = e->name;
        for (size_t i = 0; i < e->args.size(); ++i) {
          Position q = pos;
          q.push_back(static_cast<int>(i) + 1);
          n.args.push_back(build(e->args[i], env, parent, rule, q, goal));
        }
        if (n.kind == Node::Kind::App) {
          n.ident = identity(parent, rule, position_string(pos));
          if (goal) goal_pos_[n.ident] = position_string(pos);
        }
        return push(n);
      }
    }
    return -1;
  }

  ExprPtr readback(int n) const {
    n = deref(n);
    const Node& x = heap_[n];
    if (x.kind == Node::Kind::Var) return mk_var("_");
    std::vector<ExprPtr> args;
    for (int a : x.args) args.push_back(readback(a));
    return x.kind == Node::Kind::Ctor ? mk_ctor(x.name, args) : mk_app(x.name, args);
  }

  void record(const GoalExpr& goal, const std::map<std::string, int>& env, int root) {
    Answer a;
    for (auto& v : goal.vars) a.bindings.emplace_back(v, print_expr(p_, readback(env.at(v))));
    a.value = print_expr(p_, readback(root));
    stats_.answers.push_back(a);
    if (stats_.answers.size() >= lim_.max_answers) throw LimitExceeded("answer limit reached", stats_);
  }

  // -- trees and demand ----------------------------------------------------

  const DefTreePtr& tree(const std::string& fn) {
    auto it = trees_.find(fn);
    if (it != trees_.end()) return it->second;
    DefTreePtr t;
    if (s_ == Strategy::DemandDriven) {
      try {
        t = build_with_demand(*a_, fn);
      } catch (const std::exception&) {
        t = build_lhs_tree(p_, fn);
      }
    } else {
      t = build_lhs_tree(p_, fn);
    }
    return trees_.emplace(fn, t).first->second;
  }

  int rule_key(const Rule& r) {
    auto it = rule_keys_.find(&r);
    if (it != rule_keys_.end()) return it->second;
    std::string text = print_rule(p_, r);
    auto jt = rule_text_keys_.find(text);
    int k = jt != rule_text_keys_.end() ? jt->second : static_cast<int>(rule_text_keys_.size());
    rule_text_keys_.emplace(text, k);
    rule_keys_.emplace(&r, k);
    return k;
  }

  using Shape = std::vector<int>;  // union of nonterminals

  // Per argument demand of fn for a head normal (or normal) result;
  // empty when the analysis gives nothing usable.
  const std::vector<Shape>& demand(const std::string& fn, bool normal) {
    auto key = std::make_pair(fn, normal);
    auto it = demand_.find(key);
    if (it != demand_.end()) return it->second;
    std::vector<Shape> out;
    try {
      const FunctionDef* f = a_->program().find_fn(fn);
      TypePtr t = ground_type(f->result_type, default_instance_type(a_->program()));
      PredPtr pr;
      if (t->kind == Type::Kind::Con && a_->program().find_type(t->name))
        pr = normal ? pp_nf(t) : pp_hnf(t->name);
      if (pr) {
        DemandReport r = a_->infer(fn, pr);
        if (static_cast<int>(r.args.size()) == f->arity)
          for (int nt : r.args) out.push_back({nt});
      }
    } catch (const std::exception&) {
      out.clear();
    }
    return demand_.emplace(key, out).first->second;
  }

  bool nullable(const Shape& s) const {
    const Grammar& g = a_->ctx().grammar();
    for (int nt : s)
      if (g.nullable(nt)) return true;
    return s.empty();
  }

  // A shape without bottom anywhere only holds normal forms.
  bool total(const Shape& s) {
    for (int nt : s) {
      auto it = total_.find(nt);
      if (it == total_.end()) {
        const Grammar& g = a_->ctx().grammar();
        bool t = true;
        for (int r : g.reachable(nt))
          if (g.nullable(r)) t = false;
        it = total_.emplace(nt, t).first;
      }
      if (!it->second) return false;
    }
    return true;
  }

  // Evaluates n far enough to fit the shape. Forcing gives up at the
  // first step that would bind a variable and leaves the rest delayed.
  void force(int n, Shape s, const K& k) {
    if (nullable(s)) return k();
    bail_.push_back(&k);
    hnf(n, total(s), [&, s] {
      const K* saved = bail_.back();
      bail_.pop_back();
      force_shape(n, s, k);
      bail_.push_back(saved);
    });
    bail_.pop_back();
  }

  void force_shape(int n, const Shape& s, const K& k) {
    {
      int m = deref(n);
      if (heap_[m].kind != Node::Kind::Ctor) return k();
      const Grammar& g = a_->ctx().grammar();
      size_t ar = heap_[m].args.size();
      std::vector<Shape> kids(ar);
      bool found = false;
      for (int nt : s)
        for (auto& pr : g.nt(nt).prods)
          if (g.sig().at(pr.ctor).name == heap_[m].name && pr.args.size() == ar) {
            found = true;
            for (size_t i = 0; i < ar; ++i) kids[i].push_back(pr.args[i]);
          }
      if (!found) return k();
      force_kids(m, kids, 0, k);
    }
  }

  void force_kids(int m, const std::vector<Shape>& kids, size_t i, const K& k) {
    if (i == kids.size()) return k();
    force(heap_[m].args[i], kids[i], [&, i] { force_kids(m, kids, i + 1, k); });
  }

  void force_args(int n, const std::vector<Shape>& d, size_t i, const K& k) {
    if (i == d.size()) return k();
    force(heap_[n].args[i], d[i], [&, i] { force_args(n, d, i + 1, k); });
  }

  // -- evaluation ----------------------------------------------------------

  void nf(int n, const K& k) {
    hnf(n, true, [&] {
      int m = deref(n);
      if (heap_[m].kind == Node::Kind::Ctor) return nf_args(m, 0, k);
      k();
    });
  }

  void nf_args(int m, size_t i, const K& k) {
    if (i == heap_[m].args.size()) return k();
    nf(heap_[m].args[i], [&, i] { nf_args(m, i + 1, k); });
  }

  void hnf(int n, bool normal, const K& k) {
    int m = deref(n);
    if (heap_[m].kind != Node::Kind::App) return k();
    const DefTreePtr& t = tree(heap_[m].name);
    auto go = [&, m] { dispatch(m, t, normal, k); };
    if (s_ == Strategy::Eager) return nf_args(m, 0, go);
    if (s_ == Strategy::DemandDriven) {
      const auto& d = demand(heap_[m].name, normal);
      if (!d.empty()) return force_args(m, d, 0, go);
    }
    go();
  }

  int node_at(int call, const Position& q) {
    int cur = call;
    for (int i : q) cur = deref(heap_[cur].args.at(i - 1));
    return cur;
  }

  void dispatch(int n, const DefTreePtr& t, bool normal, const K& k) {
    switch (t->kind) {
      case DefTree::Kind::Or:
        for (auto& c : t->children) {
          ++stats_.search_nodes;
          size_t hs = heap_.size();
          dispatch(n, c, normal, k);
          heap_.resize(hs);
        }
        return;
      case DefTree::Kind::Rule:
        for (auto& r : t->rules) {
          if (t->rules.size() > 1) ++stats_.search_nodes;
          size_t hs = heap_.size();
          fire(n, r, normal, k);
          heap_.resize(hs);
        }
        return;
      case DefTree::Kind::Branch: {
        Position q = t->pos;
        hnf(node_at(n, q), false, [&, q] {
          int m = node_at(n, q);
          if (heap_[m].kind == Node::Kind::Var) return narrow(n, m, t, q, normal, k);
          if (heap_[m].kind != Node::Kind::Ctor) return;
          for (auto& c : t->children)
            if (subterm_at(c->pattern, q)->name == heap_[m].name) return dispatch(n, c, normal, k);
        });
        return;
      }
    }
  }

  void narrow(int n, int var, const DefTreePtr& t, const Position& q, bool normal, const K& k) {
    if (!bail_.empty()) {
      const K* b = bail_.back();
      bail_.pop_back();
      (*b)();
      bail_.push_back(b);
      return;
    }
    int depth = heap_[var].depth;
    if (depth + 1 > lim_.max_inst_depth) {
      stats_.truncated = true;
      return;
    }
    for (auto& c : t->children) {
      ExprPtr pat = subterm_at(c->pattern, q);
      size_t hs = heap_.size();
      Node b;
      b.kind = Node::Kind::Ctor;
      b.name = pat->name;
      for (size_t i = 0; i < pat->args.size(); ++i) b.args.push_back(fresh_var(depth + 1));
      ++stats_.search_nodes;
      with_update(var, b, [&] { dispatch(n, c, normal, k); });
      heap_.resize(hs);
    }
  }

  bool match(const ExprPtr& pat, int n, std::map<std::string, int>& env) {
    if (pat->kind == Expr::Kind::Var) {
      env[pat->name] = n;
      return true;
    }
    int m = deref(n);
    if (heap_[m].kind != Node::Kind::Ctor || heap_[m].name != pat->name) return false;
    for (size_t i = 0; i < pat->args.size(); ++i)
      if (!match(pat->args[i], heap_[m].args[i], env)) return false;
    return true;
  }

  void fire(int n, const Rule& r, bool normal, const K& k) {
    std::map<std::string, int> env;
    for (size_t i = 0; i < r.lhs.size(); ++i)
      if (!match(r.lhs[i], heap_[n].args[i], env)) return;
    int rk = rule_key(r);
    int id = heap_[n].ident;
    auto rewrite = [&, rk, id] {
      if (++stats_.reduction_steps > lim_.max_steps) throw LimitExceeded("step limit reached", stats_);
      if (!reduced_.insert({id, rk}).second) {
        ++stats_.reevaluations;
        ++stats_.reevaluations_by_function[r.fn];
      }
      auto gp = goal_pos_.find(id);
      if (gp != goal_pos_.end()) ++stats_.goal_redex_reductions[gp->second];
      int body = build(r.rhs, env, id, rk, {}, false);
      Node ind;
      ind.kind = Node::Kind::Ind;
      ind.target = body;
      with_update(n, ind, [&] { hnf(n, normal, k); });
    };
    if (!r.guard) return rewrite();
    int g = build(r.guard, env, id, rk, {0}, false);
    hnf(g, false, [&] {
      int m = deref(g);
      if (heap_[m].kind == Node::Kind::Ctor && heap_[m].name == "True") rewrite();
    });
  }

  const Program& p_;
  Strategy s_;
  EvalLimits lim_;
  Analyzer* a_;
  std::vector<Node> heap_;
  std::map<std::tuple<int, int, std::string>, int> idents_;
  std::map<int, std::string> goal_pos_;
  std::map<std::string, DefTreePtr> trees_;
  std::map<const Rule*, int> rule_keys_;
  std::map<std::string, int> rule_text_keys_;
  std::map<std::pair<std::string, bool>, std::vector<Shape>> demand_;
  std::set<std::pair<int, int>> reduced_;
  std::vector<const K*> bail_;
  std::map<int, bool> total_;
  EvalStats stats_;
};

// Deep backtracking recursion; run it on a thread with a large stack.
template <typename F>
void on_big_stack(F f) {
  struct Ctx {
    F* f;
    std::exception_ptr err;
  } ctx{&f, nullptr};
  auto tramp = [](void* p) -> void* {
    auto* c = static_cast<Ctx*>(p);
    try {
      (*c->f)();
    } catch (...) {
      c->err = std::current_exception();
    }
    return nullptr;
  };
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, size_t{1} << 30);
  pthread_t th;
  if (pthread_create(&th, &attr, tramp, &ctx) != 0) {
    pthread_attr_destroy(&attr);
    f();
    return;
  }
  pthread_join(th, nullptr);
  pthread_attr_destroy(&attr);
  if (ctx.err) std::rethrow_exception(ctx.err);
}

}  // namespace

EvalStats evaluate_goal(const Program& p, const std::string& goal, Strategy s, const EvalLimits& limits,
                        Analyzer* analyzer) {
  std::unique_ptr<Analyzer> own;
  if (s == Strategy::DemandDriven && !analyzer) {
    own = std::make_unique<Analyzer>(p);
    analyzer = own.get();
  }
  EvalStats out;
  on_big_stack([&] { out = Machine(p, s, limits, analyzer).run(goal); });
  return out;
}

double BenchRow::lazy_over_demand() const {
  if (!lazy.ok || !demand.ok || demand.stats.reduction_steps == 0) return 0;
  return static_cast<double>(lazy.stats.reduction_steps) / static_cast<double>(demand.stats.reduction_steps);
}

std::vector<std::string> bench_suites() { return {"sublists_reverse", "nqueens"}; }

namespace {

std::string numeral(int k) {
  std::string s = "Zero";
  for (int i = 0; i < k; ++i) s = "(Succ " + s + ")";
  return s;
}

}  // namespace

std::string bench_goal(const std::string& suite, int n) {
  if (suite == "sublists_reverse") {
    std::string xs;
    for (int i = 0; i < n; ++i) xs += (i ? ", " : "") + numeral(i);
    return "subl (reverse [" + xs + "]) bs";
  }
  if (suite == "nqueens") return "queens " + numeral(n) + " cs";
  throw std::invalid_argument("unknown suite " + suite);
}

std::vector<BenchRow> bench(const Program& p, const std::string& suite, const std::vector<int>& sizes,
                            const EvalLimits& limits) {
  Analyzer a(p);
  std::vector<BenchRow> rows;
  for (int n : sizes) {
    BenchRow r;
    r.suite = suite;
    r.size = n;
    r.goal = bench_goal(suite, n);
    auto cell = [&](Strategy s) {
      BenchCell c;
      try {
        c.stats = evaluate_goal(p, r.goal, s, limits, &a);
      } catch (const LimitExceeded& e) {
        c.ok = false;
        c.error = e.what();
        c.stats = e.stats;
      }
      return c;
    };
    r.eager = cell(Strategy::Eager);
    r.lazy = cell(Strategy::NaiveLazy);
    r.demand = cell(Strategy::DemandDriven);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string bench_text(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "suite" << std::right << std::setw(4) << "n" << std::setw(10) << "eager"
     << std::setw(10) << "lazy" << std::setw(10) << "demand" << std::setw(9) << "reev-l" << std::setw(9)
     << "reev-d" << std::setw(9) << "answers" << std::setw(12) << "lazy/dem" << "\n";
  for (auto& r : rows) {
    auto steps = [](const BenchCell& c) { return c.ok ? std::to_string(c.stats.reduction_steps) : "limit"; };
    os << std::left << std::setw(18) << r.suite << std::right << std::setw(4) << r.size << std::setw(10)
       << steps(r.eager) << std::setw(10) << steps(r.lazy) << std::setw(10) << steps(r.demand) << std::setw(9)
       << r.lazy.stats.reevaluations << std::setw(9) << r.demand.stats.reevaluations << std::setw(9)
       << r.demand.stats.answers.size() << std::setw(12) << std::fixed << std::setprecision(3)
       << r.lazy_over_demand() << "\n";
  }
  return os.str();
}

std::string bench_json(const std::vector<BenchRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  auto cell = [](const BenchCell& c) {
    nlohmann::json o = {{"ok", c.ok},
                        {"reduction_steps", c.stats.reduction_steps},
                        {"reevaluations", c.stats.reevaluations},
                        {"search_nodes", c.stats.search_nodes},
                        {"answers", c.stats.answers.size()}};
    if (!c.ok) o["error"] = c.error;
    return o;
  };
  for (auto& r : rows)
    j.push_back({{"suite", r.suite},
                 {"n", r.size},
                 {"goal", r.goal},
                 {"eager", cell(r.eager)},
                 {"lazy", cell(r.lazy)},
                 {"demand", cell(r.demand)},
                 {"lazy_over_demand", r.lazy_over_demand()}});
  return j.dump(2);
}

}  // namespace demand
