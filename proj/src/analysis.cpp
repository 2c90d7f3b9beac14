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

#include "demand/analysis.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace demand {

std::string to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Proved:
      return "Proved";
    case Verdict::Kind::Refuted:
      return "Refuted";
    case Verdict::Kind::Unknown:
      return "Unknown";
  }
  return "?";
}

Analyzer::Analyzer(const Program& p) : ctx_(std::make_unique<DemandContext>(p)) {
  // A user predicate is a function into Bool; its grammar is the solved
  // demand for a True result, an over-approximation of its True-set.
  ctx_->user_grammar = [this](DemandContext& c, const PredPtr& q) -> std::optional<std::pair<int, bool>> {
    if (q->kind != Pred::Kind::User || !c.program().find_fn(q->name)) return std::nullopt;
    auto it = user_nt_.find(q->name);
    if (it != user_nt_.end()) return std::make_pair(it->second, false);
    user_nt_[q->name] = Grammar::kAny;
    int t = c.intern_pred(pp_is("True"));
    int nt = c.grammar().minimize(sigma(t, q->name));
    user_nt_[q->name] = nt;
    return std::make_pair(nt, false);
  };
}

Analyzer::~Analyzer() = default;

int Analyzer::pred(const std::string& text) { return ctx_->intern_pred(parse_pred(ctx_->program(), text)); }

int Analyzer::pred(const PredPtr& p, const TypePtr& t) { return ctx_->intern_pred(p, t); }

Analyzer::Solved& Analyzer::solve(int pred, const std::string& fn) {
  auto key = std::make_pair(pred, fn);
  auto it = solved_.find(key);
  if (it != solved_.end()) return it->second;
  DemandContext& c = *ctx_;
  Grammar& g = c.grammar();
  Solved s;
  for (size_t round = 0;; ++round) {
    s.sys = weaken(simplify(gen_system(c, {{pred, fn}})));
    SolveResult r = solve_greatest(s.sys);
    if (!r.ok()) throw AnalysisUnsat(*r.unsat);
    s.val = *r.valuation;
    s.states = r.states;
    if (round >= max_refinements) break;
    // Demands on nested calls left at any are replaced by the solved
    // demand of the position holding the call.
    bool changed = false;
    for (auto& [v, res] : s.sys.nested) {
      if (res >= 0) continue;
      int inner = c.var_info(v).inner;
      int nt = s.val.of(inner);
      if (g.nullable(nt)) continue;
      int q = c.intern_language(g.minimize(nt), "~" + c.var_name(inner));
      if (q == 0) continue;
      c.nested_override[v] = q;
      changed = true;
    }
    if (!changed) break;
    ++s.refinements;
  }
  return solved_.emplace(key, std::move(s)).first->second;
}

const ConstraintSystem& Analyzer::system(int pred, const std::string& fn) { return solve(pred, fn).sys; }

const Valuation& Analyzer::solution(int pred, const std::string& fn) { return solve(pred, fn).val; }

int Analyzer::sigma(int pred, const std::string& fn) {
  return solve(pred, fn).val.of(ctx_->pf(pred, fn));
}

std::vector<int> Analyzer::split_args(const std::string& fn, int sigma) {
  Grammar& g = ctx_->grammar();
  const FunctionDef* f = ctx_->program().find_fn(fn);
  if (!f) throw std::runtime_error("unknown function " + fn);
  auto proj = [&](const std::string& c, int k) {
    if (g.is_any(sigma)) return static_cast<int>(Grammar::kAny);
    if (g.sig().find(c) < 0) return static_cast<int>(Grammar::kNothing);
    return g.minimize(g.inv_proj(c, k, sigma));
  };
  std::vector<int> out;
  int n = f->arity;
  if (n == 1 && f->arg_types.size() == 1 && f->arg_types[0]->kind == Type::Kind::Con &&
      tuple_arity(f->arg_types[0]->name) >= 2)
    n = tuple_arity(f->arg_types[0]->name);
  else if (n == 1)
    return {g.minimize(sigma)};
  for (int k = 1; k <= n; ++k) out.push_back(proj(tuple_name(n), k));
  return out;
}

std::string Analyzer::pattern(int nt, const TypePtr& t) {
  Grammar& g = ctx_->grammar();
  if (g.is_any(nt)) return "any";
  if (g.is_empty(nt)) return "nothing";
  std::vector<PredPtr> cands;
  if (t && t->kind == Type::Kind::Con && tuple_arity(t->name) < 0 && ctx_->program().find_type(t->name))
    cands.push_back(pp_hnf(t->name));
  if (t && !type_has_vars(t)) {
    try {
      cands.push_back(nf_pred(ctx_->program(), t));
    } catch (const PredError&) {
    }
  }
  if (t && t->kind == Type::Kind::Con && t->name == "[]") cands.push_back(pp_spine());
  for (auto& p : cands) {
    try {
      int id = ctx_->intern_pred(p, t);
      if (g.equivalent(ctx_->pred(id).nt, nt)) return ctx_->pred(id).name;
    } catch (const std::exception&) {
    }
  }
  std::string d = g.dump(g.minimize(nt));
  while (!d.empty() && d.back() == '\n') d.pop_back();
  std::replace(d.begin(), d.end(), '\n', ';');
  std::string out;
  for (size_t i = 0; i < d.size(); ++i) {
    out += d[i];
    if (d[i] == ';') out += ' ';
  }
  return out;
}

DemandReport Analyzer::infer(const std::string& fn, const PredPtr& result) {
  const FunctionDef* f = program().find_fn(fn);
  if (!f) throw std::runtime_error("unknown function " + fn);
  if (result->kind != Pred::Kind::Any && result->kind != Pred::Kind::User)
    check_pred_type(ctx_->program(), result, f->result_type);
  int pid = ctx_->intern_pred(result, f->result_type);
  Solved& s = solve(pid, fn);
  DemandReport r;
  r.function = fn;
  r.result_pred = ctx_->pred(pid).name;
  r.sigma = ctx_->grammar().minimize(s.val.of(ctx_->pf(pid, fn)));
  r.args = split_args(fn, r.sigma);
  std::vector<TypePtr> types = f->arg_types;
  if (types.size() == 1 && types[0]->kind == Type::Kind::Con && tuple_arity(types[0]->name) >= 2 &&
      r.args.size() > 1)
    types = types[0]->args;
  for (size_t k = 0; k < r.args.size(); ++k)
    r.patterns.push_back(pattern(r.args[k], k < types.size() ? types[k] : nullptr));
  r.constraints = s.sys.cs.size();
  r.variables = s.val.nt.size();
  r.states = s.states;
  r.refinements = s.refinements;
  return r;
}

Verdict Analyzer::check_typing(const std::string& fn, const PredPtr& pi1, const PredPtr& pi2,
                               CheckBounds b) {
  const FunctionDef* f = program().find_fn(fn);
  if (!f) throw std::runtime_error("unknown function " + fn);
  Verdict v;
  if (pi1->kind == Pred::Kind::Any) {
    v.kind = Verdict::Kind::Proved;
    v.detail = "any holds everywhere";
    return v;
  }
  TypePtr at = f->arity == 1 ? f->arg_types.at(0) : Type::tuple(f->arg_types);
  int p2 = ctx_->intern_pred(pi2, f->result_type);
  int p1 = ctx_->intern_pred(pi1, at);
  Grammar& g = ctx_->grammar();
  int s = sigma(p2, fn);
  InclusionResult inc = g.included(s, ctx_->pred(p1).nt);
  if (inc.holds && ctx_->pred(p1).exact) {
    v.kind = Verdict::Kind::Proved;
    v.detail = "σ(" + ctx_->pred(p2).name + "•" + fn + ") is included in " + ctx_->pred(p1).name;
    return v;
  }
  PredContext pc(program(), EvalOptions{b.fuel});
  if (auto cex = refute_typing(pc, fn, pi1, pi2, b.depth)) {
    v.kind = Verdict::Kind::Refuted;
    v.counterexample = *cex;
    v.detail = "counterexample " + to_string(*cex);
    return v;
  }
  v.detail = inc.holds ? "grammar of " + ctx_->pred(p1).name + " is an over-approximation"
                       : "inclusion fails on " + to_string(inc.witness) + "; no counterexample up to depth " +
                             std::to_string(b.depth);
  return v;
}

std::vector<std::pair<int, std::string>> Analyzer::pairs(
    const std::vector<std::pair<int, std::string>>& seeds) {
  std::vector<std::pair<int, std::string>> out;
  std::set<std::pair<int, std::string>> seen;
  for (auto& sd : seeds)
    for (auto& p : system(sd.first, sd.second).pairs)
      if (seen.insert(p).second) out.push_back(p);
  return out;
}

bool Analyzer::oracle(int pred, const std::string& fn, const PTermPtr& args, long fuel) {
  if (!oracle_ || oracle_->options().fuel != fuel)
    oracle_ = std::make_unique<PredContext>(ctx_->program(), EvalOptions{fuel});
  const PredEntry& e = ctx_->pred(pred);
  if (e.pred->kind == Pred::Kind::Named) {
    Evaluator& ev = oracle_->evaluator();
    ev.set_fuel(fuel);
    PTermPtr r = ev.apply_tuple(fn, args);
    return ctx_->grammar().member(e.nt, r);
  }
  return oracle_->apply_composed(e.pred, fn, args);
}

SoundnessReport Analyzer::soundness(const std::vector<std::pair<int, std::string>>& ps, HarnessOptions o,
                                    const std::map<std::pair<int, std::string>, int>* replace) {
  SoundnessReport rep;
  Enumerator en(ctx_->program());
  Grammar& g = ctx_->grammar();
  for (auto& [p, fn] : ps) {
    ++rep.pairs;
    if (ctx_->pred_nullable(p)) continue;  // any•f is everything
    int nt = -1;
    if (replace) {
      auto it = replace->find({p, fn});
      if (it != replace->end()) nt = it->second;
    }
    if (nt < 0) nt = sigma(p, fn);
    const FunctionDef& f = *ctx_->program().find_fn(fn);
    std::vector<const std::vector<PTermPtr>*> pools;
    double total = 1;
    for (auto& t : f.arg_types) {
      pools.push_back(&en.terms(t, o.depth));
      total *= static_cast<double>(pools.back()->size());
    }
    auto build = [&](const std::vector<size_t>& idx) {
      std::vector<PTermPtr> args;
      for (size_t k = 0; k < pools.size(); ++k) args.push_back((*pools[k])[idx[k]]);
      return f.arity == 1 ? args[0] : PTerm::node(tuple_name(f.arity), args);
    };
    auto check = [&](const PTermPtr& t) {
      ++rep.checked;
      bool truth;
      try {
        truth = oracle(p, fn, t, o.fuel);
      } catch (const InconsistentOverlap&) {
        ++rep.undefined;
        return;
      }
      if (!truth) return;
      ++rep.accepted;
      if (!g.member(nt, t)) rep.violations.push_back({ctx_->pred(p).name, fn, t});
    };
    std::vector<size_t> idx(pools.size(), 0);
    if (total <= static_cast<double>(o.max_tuples)) {
      while (true) {
        check(build(idx));
        int k = static_cast<int>(pools.size()) - 1;
        while (k >= 0 && ++idx[k] == pools[k]->size()) idx[k--] = 0;
        if (k < 0) break;
      }
    } else {
      ++rep.sampled_pairs;
      std::mt19937 rng(o.seed);
      for (size_t i = 0; i < o.max_tuples; ++i) {
        for (size_t k = 0; k < pools.size(); ++k)
          idx[k] = std::uniform_int_distribution<size_t>(0, pools[k]->size() - 1)(rng);
        check(build(idx));
      }
    }
  }
  return rep;
}

std::vector<std::pair<int, std::string>> default_seeds(Analyzer& a) {
  std::vector<std::pair<int, std::string>> out;
  const Program& prog = a.ctx().program();
  TypePtr fill = default_instance_type(prog);
  for (auto& name : a.program().user_functions()) {
    const FunctionDef* f = prog.find_fn(name);
    if (!f || !f->result_type) continue;
    TypePtr t = ground_type(f->result_type, fill);
    std::vector<PredPtr> ps;
    if (t->kind == Type::Kind::Con && tuple_arity(t->name) < 0 && prog.find_type(t->name)) ps.push_back(pp_hnf(t->name));
    try {
      ps.push_back(nf_pred(prog, t));
    } catch (const PredError&) {
    }
    if (t->kind == Type::Kind::Con && t->name == "[]") ps.push_back(pp_spine());
    if (t->kind == Type::Kind::Con && t->name == "Bool") ps.push_back(pp_is("True"));
    for (auto& p : ps) {
      int id = a.pred(p, t);
      if (std::find(out.begin(), out.end(), std::make_pair(id, name)) == out.end()) out.push_back({id, name});
    }
  }
  return out;
}

DependencyDemo dependency_loss_demo(Analyzer& a, const std::vector<std::string>& terms) {
  DependencyDemo d;
  PredPtr sl = pp_user("samelength");
  int id = a.pred(sl);
  const PredEntry& e = a.ctx().pred(id);
  Grammar& g = a.ctx().grammar();
  d.pred = e.name;
  d.grammar = g.dump(e.nt);
  for (auto& s : terms) {
    PTermPtr t = parse_pterm(a.program(), s);
    d.rows.push_back({to_string(t), g.member(e.nt, t), apply_predicate(a.program(), sl, t)});
  }
  return d;
}

}  // namespace demand
