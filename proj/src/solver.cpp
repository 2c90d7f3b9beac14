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

#include "demand/solver.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace demand {
namespace {

std::string se_key(const SetExprPtr& e) {
  std::string s = std::to_string(static_cast<int>(e->kind)) + ":" + std::to_string(e->id) + ":" +
                  e->ctor + ":" + std::to_string(e->k) + "(";
  for (auto& a : e->args) s += se_key(a) + ",";
  return s + ")";
}

// Lhs forms the solver accepts directly: variables and ground terms.
void project(const SetExprPtr& l, const SetExprPtr& r, const Constraint& c, std::vector<Constraint>& out) {
  switch (l->kind) {
    case SetExpr::Kind::Union:
      for (auto& a : l->args) project(a, r, c, out);
      return;
    case SetExpr::Kind::Paren:
      project(l->args[0], r, c, out);
      return;
    case SetExpr::Kind::Empty:
      return;
    case SetExpr::Kind::Ctor:
      if (!se_ground(l)) {
        for (size_t k = 0; k < l->args.size(); ++k)
          project(l->args[k], se_inv(l->ctor, static_cast<int>(k) + 1, r), c, out);
        return;
      }
      [[fallthrough]];
    default:
      out.push_back({l, r, c.origin, c.where});
  }
}

std::vector<Constraint> projected(const ConstraintSystem& s) {
  std::vector<Constraint> out;
  for (auto& c : s.cs) project(c.lhs, c.rhs, c, out);
  return out;
}

void collect_vars(const SetExprPtr& e, std::set<int>& out) {
  if (e->kind == SetExpr::Kind::Var) out.insert(e->id);
  for (auto& a : e->args) collect_vars(a, out);
}

struct Alt {
  enum class Kind { Any, Bot, Ctor };
  Kind kind = Kind::Any;
  std::string ctor;
  std::vector<int> kids;   // states
  std::vector<int> conds;  // states that must be nonempty

  bool operator<(const Alt& o) const {
    return std::tie(kind, ctor, kids, conds) < std::tie(o.kind, o.ctor, o.kids, o.conds);
  }
  bool operator==(const Alt& o) const {
    return std::tie(kind, ctor, kids, conds) == std::tie(o.kind, o.ctor, o.kids, o.conds);
  }
};

using Alts = std::vector<Alt>;

std::vector<int> merged(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Product construction: a state is a conjunction of atoms; its language is
// the intersection of the atoms' languages under the greatest solution.
class Solver {
 public:
  Solver(DemandContext& ctx, const std::vector<Constraint>& cs) : ctx_(ctx), g_(ctx.grammar()) {
    for (auto& c : cs)
      if (c.lhs->kind == SetExpr::Kind::Var) bounds_[c.lhs->id].push_back(c.rhs);
  }

  int state_of(const SetExprPtr& e) {
    std::set<int> atoms;
    std::set<int> seen;
    expand(e, atoms, seen);
    return intern_state(std::vector<int>(atoms.begin(), atoms.end()));
  }

  // Nonterminals for the given states; computed together so that shared
  // substates map to shared nonterminals.
  std::vector<int> to_grammar(const std::vector<int>& roots) {
    std::vector<int> order;
    std::map<int, Alts> cache;
    std::set<int> seen;
    std::vector<int> stack(roots.rbegin(), roots.rend());
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      if (!seen.insert(s).second) continue;
      order.push_back(s);
      cache[s] = alts(s);
      for (auto& a : cache[s]) {
        for (int k : a.kids) stack.push_back(k);
        for (int k : a.conds) stack.push_back(k);
      }
    }
    std::set<int> productive;
    for (bool changed = true; changed;) {
      changed = false;
      for (int s : order) {
        if (productive.count(s)) continue;
        for (auto& a : cache[s])
          if (alt_productive(a, productive)) {
            productive.insert(s);
            changed = true;
            break;
          }
      }
    }
    std::map<int, int> nt;
    for (int s : order) {
      if (!productive.count(s)) {
        nt[s] = Grammar::kNothing;
        continue;
      }
      bool any = false;
      for (auto& a : cache[s])
        if (a.kind == Alt::Kind::Any && alt_productive(a, productive)) any = true;
      nt[s] = any ? Grammar::kAny : g_.add_nt();
    }
    for (int s : order) {
      int n = nt[s];
      if (n == Grammar::kAny || n == Grammar::kNothing || filled_.count(n)) continue;
      filled_.insert(n);
      std::set<std::pair<std::string, std::vector<int>>> done;
      for (auto& a : cache[s]) {
        if (!alt_productive(a, productive)) continue;
        if (a.kind == Alt::Kind::Bot) {
          g_.set_bot(n, true);
        } else if (a.kind == Alt::Kind::Ctor) {
          std::vector<int> args;
          for (int k : a.kids) args.push_back(nt[k]);
          if (done.insert({a.ctor, args}).second) g_.add_prod(n, a.ctor, args);
        }
      }
    }
    std::vector<int> out;
    for (int r : roots) out.push_back(nt[r]);
    return out;
  }

  size_t state_count() const { return states_.size(); }
  size_t rounds() const { return rounds_; }

 private:
  enum class AtomKind { NT, Ctor, Inv, Union, Empty };
  struct Atom {
    AtomKind kind;
    int nt = -1;
    SetExprPtr e;
    std::string ctor;
    int k = 0;
  };

  bool alt_productive(const Alt& a, const std::set<int>& prod) const {
    for (int c : a.conds)
      if (!prod.count(c)) return false;
    if (a.kind != Alt::Kind::Ctor) return true;
    for (int k : a.kids)
      if (!prod.count(k)) return false;
    return true;
  }

  int intern_atom(const std::string& key, Atom a) {
    auto it = atom_index_.find(key);
    if (it != atom_index_.end()) return it->second;
    atoms_.push_back(std::move(a));
    atom_index_[key] = static_cast<int>(atoms_.size()) - 1;
    return static_cast<int>(atoms_.size()) - 1;
  }

  int nt_atom(int nt) { return intern_atom("N" + std::to_string(nt), Atom{AtomKind::NT, nt}); }

  int intern_state(std::vector<int> atoms) {
    // Nothing absorbs everything; Any is neutral.
    std::vector<int> kept;
    for (int a : atoms) {
      const Atom& at = atoms_[a];
      if (at.kind == AtomKind::Empty || (at.kind == AtomKind::NT && at.nt == Grammar::kNothing)) {
        kept = {a};
        break;
      }
      if (at.kind == AtomKind::NT && g_.is_any(at.nt)) continue;
      kept.push_back(a);
    }
    // Several grammar atoms collapse into one intersection.
    std::vector<int> nts, rest;
    for (int a : kept) (atoms_[a].kind == AtomKind::NT ? nts : rest).push_back(a);
    if (nts.size() > 1) {
      int n = atoms_[nts[0]].nt;
      for (size_t i = 1; i < nts.size(); ++i) n = g_.intersect(n, atoms_[nts[i]].nt);
      rest.push_back(nt_atom(n));
      std::sort(rest.begin(), rest.end());
      kept = rest;
    }
    auto it = state_index_.find(kept);
    if (it != state_index_.end()) return it->second;
    states_.push_back(kept);
    state_index_[kept] = static_cast<int>(states_.size()) - 1;
    return static_cast<int>(states_.size()) - 1;
  }

  void expand(const SetExprPtr& e, std::set<int>& out, std::set<int>& seen) {
    switch (e->kind) {
      case SetExpr::Kind::Var: {
        if (!seen.insert(e->id).second) return;
        auto it = bounds_.find(e->id);
        if (it == bounds_.end()) return;
        for (auto& b : it->second) expand(b, out, seen);
        return;
      }
      case SetExpr::Kind::Paren:
        expand(e->args[0], out, seen);
        return;
      case SetExpr::Kind::Pred:
        out.insert(nt_atom(ctx_.pred(e->id).nt));
        return;
      case SetExpr::Kind::Empty:
        out.insert(intern_atom("E", Atom{AtomKind::Empty}));
        return;
      case SetExpr::Kind::Ctor:
        out.insert(intern_atom(se_key(e), Atom{AtomKind::Ctor, -1, e}));
        return;
      case SetExpr::Kind::Union:
        out.insert(intern_atom(se_key(e), Atom{AtomKind::Union, -1, e}));
        return;
      case SetExpr::Kind::InvProj: {
        // The inner state is built lazily: it may mention the variable
        // being expanded.
        Atom a{AtomKind::Inv, -1, e};
        a.ctor = e->ctor;
        a.k = e->k;
        out.insert(intern_atom(se_key(e), a));
        return;
      }
    }
  }

  Alts atom_alts(int a) {
    const Atom at = atoms_[a];
    Alts out;
    switch (at.kind) {
      case AtomKind::Empty:
        return out;
      case AtomKind::NT: {
        const Nonterminal& n = g_.nt(at.nt);
        if (n.any) return {Alt{}};
        if (n.bot) out.push_back(Alt{Alt::Kind::Bot});
        for (auto& p : n.prods) {
          Alt x{Alt::Kind::Ctor, g_.sig().at(p.ctor).name};
          for (int k : p.args) x.kids.push_back(intern_state({nt_atom(k)}));
          out.push_back(x);
        }
        return out;
      }
      case AtomKind::Ctor: {
        Alt x{Alt::Kind::Ctor, at.e->ctor};
        for (auto& arg : at.e->args) x.kids.push_back(state_of(arg));
        return {x};
      }
      case AtomKind::Union:
        for (auto& arg : at.e->args) {
          Alts s = alts(state_of(arg));
          out.insert(out.end(), s.begin(), s.end());
        }
        return out;
      case AtomKind::Inv: {
        int inner = state_of(at.e->args[0]);
        const auto& in = states_[inner];
        if (in.size() == 1 && atoms_[in[0]].kind == AtomKind::NT) {
          int n = atoms_[in[0]].nt;
          if (g_.sig().find(at.ctor) < 0) return {};
          return atom_alts(nt_atom(g_.inv_proj(at.ctor, at.k, n)));
        }
        for (auto& x : Alts(alts(inner))) {
          if (x.kind == Alt::Kind::Any) {
            out.push_back(x);
            continue;
          }
          if (x.kind != Alt::Kind::Ctor || x.ctor != at.ctor || at.k > static_cast<int>(x.kids.size()))
            continue;
          std::vector<int> conds = x.conds;
          for (size_t j = 0; j < x.kids.size(); ++j)
            if (static_cast<int>(j) + 1 != at.k) conds.push_back(x.kids[j]);
          std::sort(conds.begin(), conds.end());
          conds.erase(std::unique(conds.begin(), conds.end()), conds.end());
          for (auto y : Alts(alts(x.kids[at.k - 1]))) {
            y.conds = merged(y.conds, conds);
            out.push_back(y);
          }
        }
        return out;
      }
    }
    return out;
  }

  std::optional<Alt> meet(const Alt& a, const Alt& b) {
    Alt r;
    std::vector<int> conds = merged(a.conds, b.conds);
    if (a.kind == Alt::Kind::Any) {
      r = b;
    } else if (b.kind == Alt::Kind::Any) {
      r = a;
    } else if (a.kind == Alt::Kind::Bot || b.kind == Alt::Kind::Bot) {
      if (a.kind != b.kind) return std::nullopt;
      r = a;
    } else {
      if (a.ctor != b.ctor || a.kids.size() != b.kids.size()) return std::nullopt;
      r = a;
      for (size_t i = 0; i < a.kids.size(); ++i)
        r.kids[i] = intern_state(merged(states_[a.kids[i]], states_[b.kids[i]]));
    }
    r.conds = conds;
    return r;
  }

  Alts body(int s) {
    Alts acc = {Alt{}};
    for (int a : std::vector<int>(states_[s])) {
      Alts next;
      for (auto& y : atom_alts(a))
        for (auto& x : acc)
          if (auto m = meet(x, y)) next.push_back(*m);
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      acc = std::move(next);
      if (acc.empty()) break;
    }
    return acc;
  }

  // Unguarded cycles (through projections) are solved by descending
  // iteration from Any.
  const Alts& alts(int s) {
    auto f = final_.find(s);
    if (f != final_.end()) return f->second;
    if (in_progress_.count(s)) {
      cycle_ = true;
      auto it = approx_.find(s);
      if (it == approx_.end()) it = approx_.emplace(s, Alts{Alt{}}).first;
      return it->second;
    }
    in_progress_.insert(s);
    bool outer = cycle_;
    bool hit = false;
    Alts r;
    for (int round = 0;; ++round) {
      cycle_ = false;
      r = body(s);
      hit = hit || cycle_;
      if (!cycle_) break;
      auto it = approx_.find(s);
      if ((it != approx_.end() && it->second == r) || round > 64) break;
      approx_[s] = r;
      ++rounds_;
    }
    in_progress_.erase(s);
    cycle_ = outer || (hit && !in_progress_.empty());
    if (!hit || in_progress_.empty()) return final_[s] = r;
    approx_[s] = r;
    return approx_[s];
  }

  DemandContext& ctx_;
  Grammar& g_;
  std::map<int, std::vector<SetExprPtr>> bounds_;
  std::vector<Atom> atoms_;
  std::map<std::string, int> atom_index_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, int> state_index_;
  std::map<int, Alts> final_;
  std::map<int, Alts> approx_;
  std::set<int> in_progress_;
  std::set<int> filled_;
  bool cycle_ = false;
  size_t rounds_ = 0;
};

}  // namespace

SolveResult solve_greatest(const ConstraintSystem& s) {
  DemandContext& ctx = *s.ctx;
  std::vector<Constraint> cs = projected(s);
  for (auto& c : cs)
    if (c.lhs->kind != SetExpr::Kind::Var && !se_ground(c.lhs) && c.lhs->kind != SetExpr::Kind::Pred)
      throw std::invalid_argument("constraint is not co-definite: " + to_string(ctx, c.lhs));
  std::set<int> vars;
  for (auto& c : cs) {
    collect_vars(c.lhs, vars);
    collect_vars(c.rhs, vars);
  }
  Solver solver(ctx, cs);
  std::vector<int> roots;
  for (int v : vars) roots.push_back(solver.state_of(se_var(v)));
  std::vector<size_t> checks;
  for (size_t i = 0; i < cs.size(); ++i)
    if (cs[i].lhs->kind != SetExpr::Kind::Var) {
      checks.push_back(i);
      roots.push_back(solver.state_of(cs[i].rhs));
    }
  std::vector<int> nts = solver.to_grammar(roots);
  SolveResult r;
  r.states = solver.state_count();
  r.iterations = solver.rounds();
  Valuation val;
  size_t i = 0;
  for (int v : vars) val.nt[v] = nts[i++];
  Grammar& g = ctx.grammar();
  for (size_t c : checks) {
    int rhs = nts[i++];
    const Constraint& k = cs[c];
    if (k.lhs->kind == SetExpr::Kind::Pred) {
      auto inc = g.included(ctx.pred(k.lhs->id).nt, rhs);
      if (!inc.holds) {
        r.unsat = Unsat{k, inc.witness, "check constraint fails"};
        return r;
      }
      continue;
    }
    PTermPtr t = pterm_from_se(k.lhs);
    if (!g.member(rhs, t)) {
      r.unsat = Unsat{k, t, to_string(t) + " is not in " + to_string(ctx, k.rhs)};
      return r;
    }
  }
  r.valuation = std::move(val);
  return r;
}

PTermPtr pterm_from_se(const SetExprPtr& e) {
  std::vector<PTermPtr> args;
  for (auto& a : e->args) args.push_back(pterm_from_se(a));
  return PTerm::node(e->ctor, args);
}

int interpret(DemandContext& ctx, const SetExprPtr& e, const Valuation& val) {
  Grammar& g = ctx.grammar();
  switch (e->kind) {
    case SetExpr::Kind::Var:
      return val.of(e->id);
    case SetExpr::Kind::Pred:
      return ctx.pred(e->id).nt;
    case SetExpr::Kind::Empty:
      return Grammar::kNothing;
    case SetExpr::Kind::Paren:
      return interpret(ctx, e->args[0], val);
    case SetExpr::Kind::Union: {
      int n = Grammar::kNothing;
      for (auto& a : e->args) n = g.unite(n, interpret(ctx, a, val));
      return n;
    }
    case SetExpr::Kind::InvProj: {
      int in = interpret(ctx, e->args[0], val);
      if (g.sig().find(e->ctor) < 0) return g.is_any(in) ? Grammar::kAny : Grammar::kNothing;
      return g.inv_proj(e->ctor, e->k, in);
    }
    case SetExpr::Kind::Ctor: {
      std::vector<int> args;
      for (auto& a : e->args) args.push_back(interpret(ctx, a, val));
      int n = g.add_nt();
      g.add_prod(n, e->ctor, args);
      return n;
    }
  }
  return Grammar::kNothing;
}

std::optional<std::string> verify_solution(const ConstraintSystem& s, const Valuation& val) {
  DemandContext& ctx = *s.ctx;
  Grammar& g = ctx.grammar();
  for (auto& c : projected(s)) {
    int rhs = interpret(ctx, c.rhs, val);
    bool ok;
    if (c.lhs->kind == SetExpr::Kind::Var)
      ok = g.included(val.of(c.lhs->id), rhs).holds;
    else if (c.lhs->kind == SetExpr::Kind::Pred)
      ok = g.included(ctx.pred(c.lhs->id).nt, rhs).holds;
    else
      ok = g.member(rhs, pterm_from_se(c.lhs));
    if (!ok) return to_string(ctx, c.lhs) + " <= " + to_string(ctx, c.rhs);
  }
  return std::nullopt;
}

}  // namespace demand
