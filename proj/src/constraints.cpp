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

#include "demand/constraints.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace demand {

// ---------------------------------------------------------------------------
// Set expressions

namespace {

std::shared_ptr<SetExpr> mk(SetExpr::Kind k) {
  auto e = std::make_shared<SetExpr>();
  e->kind = k;
  return e;
}

}  // namespace

SetExprPtr se_var(int v) {
  auto e = mk(SetExpr::Kind::Var);
  e->id = v;
  return e;
}
SetExprPtr se_pred(int p) {
  auto e = mk(SetExpr::Kind::Pred);
  e->id = p;
  return e;
}
SetExprPtr se_ctor(std::string c, std::vector<SetExprPtr> args) {
  auto e = mk(SetExpr::Kind::Ctor);
  e->ctor = std::move(c);
  e->args = std::move(args);
  return e;
}
SetExprPtr se_inv(std::string c, int k, SetExprPtr inner) {
  auto e = mk(SetExpr::Kind::InvProj);
  e->ctor = std::move(c);
  e->k = k;
  e->args = {std::move(inner)};
  return e;
}
SetExprPtr se_union(std::vector<SetExprPtr> args) {
  if (args.empty()) return se_empty();
  if (args.size() == 1) return args[0];
  auto e = mk(SetExpr::Kind::Union);
  e->args = std::move(args);
  return e;
}
SetExprPtr se_empty() { return mk(SetExpr::Kind::Empty); }
SetExprPtr se_paren(SetExprPtr inner) {
  auto e = mk(SetExpr::Kind::Paren);
  e->args = {std::move(inner)};
  return e;
}

bool se_equal(const SetExprPtr& a, const SetExprPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->id != b->id || a->ctor != b->ctor || a->k != b->k ||
      a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!se_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool se_ground(const SetExprPtr& e) {
  if (e->kind != SetExpr::Kind::Ctor) return false;
  for (auto& a : e->args)
    if (!se_ground(a)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Context

DemandContext::DemandContext(const Program& p) : src_(p), norm_(normalize(p)) {
  intern_pred(pp_any());
}

int DemandContext::find_pred(const std::string& name) const {
  auto it = pred_index_.find(name);
  return it == pred_index_.end() ? -1 : it->second;
}

int DemandContext::intern_pred(const PredPtr& p, const TypePtr& t) {
  std::string name = pred_name(p);
  int found = find_pred(name);
  if (found >= 0) return found;
  if (p->kind == Pred::Kind::Named) {
    found = find_pred(p->name);
    if (found >= 0) return found;
    throw UnregisteredPredicate("unknown predicate " + name);
  }
  bool exact = true;
  PredResolver resolve = [&](Grammar&, const PredPtr& q) -> int {
    if (q->kind == Pred::Kind::Named) {
      int id = find_pred(q->name);
      if (id < 0) id = find_pred(pred_name(q));
      return id < 0 ? -1 : preds_[id].nt;
    }
    if (!user_grammar) return -1;
    auto r = user_grammar(*this, q);
    if (!r) return -1;
    exact = exact && r->second;
    return r->first;
  };
  int nt;
  try {
    nt = pred_grammar(g_, norm_, p, t, resolve);
  } catch (const PredError& e) {
    throw UnregisteredPredicate(e.what());
  }
  PredEntry e;
  e.name = name;
  e.pred = p;
  e.type = t ? t : pred_domain(norm_, p);
  e.nt = nt;
  e.exact = exact;
  preds_.push_back(e);
  pred_index_[name] = static_cast<int>(preds_.size()) - 1;
  return static_cast<int>(preds_.size()) - 1;
}

int DemandContext::intern_language(int nt, const std::string& name, const TypePtr& t) {
  if (g_.nullable(nt)) return 0;
  for (size_t i = 0; i < preds_.size(); ++i)
    if (g_.equivalent(preds_[i].nt, nt)) return static_cast<int>(i);
  if (preds_.size() >= max_preds) return 0;
  int found = find_pred(name);
  std::string n = name;
  for (int k = 2; found >= 0; ++k) {
    n = name + "'" + std::to_string(k);
    found = find_pred(n);
  }
  PredEntry e;
  e.name = n;
  e.pred = pp_named(n);
  e.type = t;
  e.nt = nt;
  preds_.push_back(e);
  pred_index_[n] = static_cast<int>(preds_.size()) - 1;
  return static_cast<int>(preds_.size()) - 1;
}

int DemandContext::var(const DemandVar& v) {
  auto key = std::make_tuple(static_cast<int>(v.kind), v.pred, v.fn, v.rule, v.pos, v.inner);
  auto it = var_index_.find(key);
  if (it != var_index_.end()) return it->second;
  vars_.push_back(v);
  int id = static_cast<int>(vars_.size()) - 1;
  var_index_[key] = id;
  return id;
}

int DemandContext::pf(int pred, const std::string& fn) {
  DemandVar v;
  v.kind = DemandVar::Kind::PF;
  v.pred = pred_nullable(pred) ? 0 : pred;
  v.fn = fn;
  return var(v);
}

std::string DemandContext::var_name(int id) const {
  const DemandVar& v = vars_.at(id);
  auto dotted = [](const Position& p) {
    std::string s;
    for (int k : p) s += "." + std::to_string(k);
    return s;
  };
  switch (v.kind) {
    case DemandVar::Kind::PF:
      return preds_[v.pred].name + "•" + v.fn;
    case DemandVar::Kind::PFRule:
      return preds_[v.pred].name + "•" + v.fn + "." + std::to_string(v.rule);
    case DemandVar::Kind::PFPos:
      return preds_[v.pred].name + "•" + v.fn + "." + std::to_string(v.rule) + dotted(v.pos);
    case DemandVar::Kind::PUnderscore:
      return preds_[v.pred].name + "_" + v.fn + "." + std::to_string(v.rule) + dotted(v.pos);
    case DemandVar::Kind::Nested:
      return "(" + var_name(v.inner) + ")•" + v.fn;
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string ctor_symbol(const std::string& c) { return c == ":" ? "(:)" : c; }

void print_se(std::ostream& os, const DemandContext& ctx, const SetExprPtr& e) {
  switch (e->kind) {
    case SetExpr::Kind::Var:
      os << ctx.var_name(e->id);
      return;
    case SetExpr::Kind::Pred:
      os << ctx.pred(e->id).name;
      return;
    case SetExpr::Kind::Empty:
      os << "{}";
      return;
    case SetExpr::Kind::Paren:
      os << "(";
      print_se(os, ctx, e->args[0]);
      os << ")";
      return;
    case SetExpr::Kind::InvProj:
      os << ctor_symbol(e->ctor) << "^-1_" << e->k << "(";
      print_se(os, ctx, e->args[0]);
      os << ")";
      return;
    case SetExpr::Kind::Union:
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) os << " | ";
        print_se(os, ctx, e->args[i]);
      }
      return;
    case SetExpr::Kind::Ctor: {
      if (tuple_arity(e->ctor) >= 0) {
        os << "(";
        for (size_t i = 0; i < e->args.size(); ++i) {
          if (i) os << ", ";
          print_se(os, ctx, e->args[i]);
        }
        os << ")";
      } else if (e->ctor == ":" && e->args.size() == 2) {
        os << "(";
        print_se(os, ctx, e->args[0]);
        os << " : ";
        print_se(os, ctx, e->args[1]);
        os << ")";
      } else {
        os << e->ctor;
        if (!e->args.empty()) {
          os << "(";
          for (size_t i = 0; i < e->args.size(); ++i) {
            if (i) os << ", ";
            print_se(os, ctx, e->args[i]);
          }
          os << ")";
        }
      }
      return;
    }
  }
}

}  // namespace

std::string to_string(const DemandContext& ctx, const SetExprPtr& e) {
  std::ostringstream os;
  print_se(os, ctx, e);
  return os.str();
}

std::string dump(const ConstraintSystem& s) {
  std::ostringstream os;
  for (auto& c : s.cs) os << to_string(*s.ctx, c.lhs) << " <= " << to_string(*s.ctx, c.rhs) << "\n";
  return os.str();
}

std::string dump_json(const ConstraintSystem& s) {
  nlohmann::json j;
  j["constraints"] = nlohmann::json::array();
  for (auto& c : s.cs) {
    j["constraints"].push_back({{"lhs", to_string(*s.ctx, c.lhs)},
                                {"rhs", to_string(*s.ctx, c.rhs)},
                                {"origin", c.origin},
                                {"rule", c.where}});
  }
  j["pairs"] = nlohmann::json::array();
  for (auto& [p, f] : s.pairs) j["pairs"].push_back({{"pred", s.ctx->pred(p).name}, {"function", f}});
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Generation

std::vector<Rule> analysis_rules(const Program& p, const std::string& fn) {
  const FunctionDef* f = p.find_fn(fn);
  if (!f) throw std::runtime_error("unknown function " + fn);
  if (f->join_of.empty()) return f->rules;
  std::vector<Rule> out;
  for (size_t i = 0; i < f->join_of.size(); ++i) {
    Rule r = p.find_fn(f->join_of[i])->rules.at(0);
    r.fn = fn;
    r.index = static_cast<int>(i) + 1;
    out.push_back(r);
  }
  return out;
}

SetExprPtr delta(DemandContext& ctx, int pred, const std::string& fn, int rule,
                 const Position& pos, const ExprPtr& t) {
  if (t->kind == Expr::Kind::Var) {
    DemandVar v;
    v.kind = DemandVar::Kind::PFPos;
    v.pred = pred;
    v.fn = fn;
    v.rule = rule;
    v.pos = pos;
    return se_var(ctx.var(v));
  }
  std::vector<SetExprPtr> args;
  for (size_t k = 0; k < t->args.size(); ++k) {
    Position q = pos;
    q.push_back(static_cast<int>(k) + 1);
    args.push_back(delta(ctx, pred, fn, rule, q, t->args[k]));
  }
  return se_ctor(t->name, args);
}

namespace {

SetExprPtr expr_to_se(const ExprPtr& e) {
  std::vector<SetExprPtr> args;
  for (auto& a : e->args) args.push_back(expr_to_se(a));
  return se_ctor(e->name, args);
}

PTermPtr se_to_pterm(const SetExprPtr& e) {
  std::vector<PTermPtr> args;
  for (auto& a : e->args) args.push_back(se_to_pterm(a));
  return PTerm::node(e->ctor, args);
}

bool is_cond(const Program& p, const std::string& g) {
  const FunctionDef* f = p.find_fn(g);
  if (!f || !f->builtin || f->arity != 2 || f->rules.size() != 1 || !f->join_of.empty())
    return false;
  const Rule& r = f->rules[0];
  return r.lhs[0]->kind == Expr::Kind::Ctor && r.lhs[0]->name == "True" &&
         r.lhs[1]->kind == Expr::Kind::Var && r.rhs->kind == Expr::Kind::Var &&
         r.rhs->name == r.lhs[1]->name;
}

class Generator {
 public:
  Generator(DemandContext& ctx, ConstraintSystem& s) : ctx_(ctx), s_(s) {}

  void run(const std::vector<std::pair<int, std::string>>& seeds) {
    for (auto& [p, f] : seeds) enqueue(p, f);
    while (!queue_.empty()) {
      auto [p, f] = queue_.front();
      queue_.erase(queue_.begin());
      s_.pairs.push_back({p, f});
      std::vector<int> nested;
      gen_pair(p, f, nested);
      for (int v : nested) {
        int r = resolve_nested(v);
        s_.nested[v] = r;
        if (r >= 0) enqueue(r, ctx_.var_info(v).fn);
      }
    }
  }

 private:
  void enqueue(int p, const std::string& f) {
    if (ctx_.pred_nullable(p)) return;
    auto key = std::make_pair(p, f);
    if (seen_.insert(key).second) queue_.push_back(key);
  }

  void emit(SetExprPtr l, SetExprPtr r, const std::string& origin) {
    s_.cs.push_back({std::move(l), std::move(r), origin, where_});
  }

  int mkvar(DemandVar::Kind k, const Position& pos = {}) {
    DemandVar v;
    v.kind = k;
    v.pred = pred_;
    v.fn = fn_;
    v.rule = rule_;
    v.pos = pos;
    return ctx_.var(v);
  }

  void gen_pair(int p, const std::string& f, std::vector<int>& nested) {
    const Program& prog = ctx_.program();
    std::vector<Rule> rules = analysis_rules(prog, f);
    pred_ = p;
    fn_ = f;
    where_ = f;
    std::vector<SetExprPtr> alts;
    for (auto& r : rules) {
      rule_ = r.index;
      alts.push_back(se_var(mkvar(DemandVar::Kind::PFRule)));
    }
    emit(se_var(ctx_.pf(p, f)), se_union(alts), "main-function");
    for (auto& r : rules) {
      rule_ = r.index;
      where_ = f + "." + std::to_string(r.index);
      // A single tuple pattern is treated as the argument list itself.
      args_ = r.lhs;
      if (args_.size() == 1 && args_[0]->kind == Expr::Kind::Ctor && tuple_arity(args_[0]->name) >= 2)
        args_ = std::vector<ExprPtr>(args_[0]->args);
      bool tupled = args_.size() != r.lhs.size() || args_.size() != 1;
      int n = static_cast<int>(args_.size());
      std::vector<SetExprPtr> heads;
      for (int j = 1; j <= n; ++j) heads.push_back(se_var(mkvar(DemandVar::Kind::PFPos, {j})));
      SetExprPtr tup = tupled ? se_ctor(tuple_name(n), heads) : se_paren(heads[0]);
      int rv = mkvar(DemandVar::Kind::PFRule);
      emit(se_var(rv), tup, "main-rule");
      for (int j = 1; j <= n; ++j)
        emit(heads[j - 1], delta(ctx_, p, f, rule_, {j}, args_[j - 1]), "head");
      rule_var_ = rv;
      body(r.rhs, {}, se_pred(p), nested);
    }
  }

  // Position of variable x in the lhs, as an argument-index-prefixed path.
  bool lhs_position(const std::string& x, Position& out) {
    for (size_t j = 0; j < args_.size(); ++j) {
      for (auto& q : positions(args_[j])) {
        ExprPtr s = subterm_at(args_[j], q);
        if (s->kind == Expr::Kind::Var && s->name == x) {
          out = {static_cast<int>(j) + 1};
          out.insert(out.end(), q.begin(), q.end());
          return true;
        }
      }
    }
    return false;
  }

  void body(const ExprPtr& e, const Position& rp, const SetExprPtr& d, std::vector<int>& nested) {
    switch (e->kind) {
      case Expr::Kind::Var: {
        Position pos;
        if (lhs_position(e->name, pos)) emit(se_var(mkvar(DemandVar::Kind::PFPos, pos)), d, "body-variable");
        return;
      }
      case Expr::Kind::VarApp:
        throw Unsupported("application of variable " + e->name + " is outside the first-order fragment");
      case Expr::Kind::Ctor: {
        if (is_ground(e)) {
          if (d->kind == SetExpr::Kind::Pred &&
              !ctx_.grammar().member(ctx_.pred(d->id).nt, pterm_from_expr(e))) {
            // The rule can never produce a value satisfying the predicate.
            emit(se_var(rule_var_), se_empty(), "body-constant");
            return;
          }
          emit(expr_to_se(e), d, "body-constant");
          return;
        }
        std::vector<SetExprPtr> vs;
        for (size_t k = 0; k < e->args.size(); ++k) {
          Position q = rp;
          q.push_back(static_cast<int>(k) + 1);
          vs.push_back(se_var(mkvar(DemandVar::Kind::PUnderscore, q)));
          bound_[vs.back()->id] = se_inv(e->name, static_cast<int>(k) + 1, d);
        }
        emit(se_ctor(e->name, vs), d, "body-constructor");
        for (size_t k = 0; k < e->args.size(); ++k) {
          Position q = rp;
          q.push_back(static_cast<int>(k) + 1);
          body(e->args[k], q, vs[k], nested);
        }
        return;
      }
      case Expr::Kind::App: {
        int m = static_cast<int>(e->args.size());
        std::vector<SetExprPtr> vs;
        for (int k = 1; k <= m; ++k) {
          Position q = rp;
          q.push_back(1);
          if (m != 1) q.push_back(k);
          vs.push_back(se_var(mkvar(DemandVar::Kind::PUnderscore, q)));
          body(e->args[k - 1], q, vs.back(), nested);
        }
        SetExprPtr target;
        if (d->kind == SetExpr::Kind::Pred) {
          target = se_var(ctx_.pf(d->id, e->name));
          enqueue(ctx_.pred_nullable(d->id) ? 0 : d->id, e->name);
        } else {
          DemandVar nv;
          nv.kind = DemandVar::Kind::Nested;
          nv.inner = d->id;
          nv.fn = e->name;
          int id = ctx_.var(nv);
          nested.push_back(id);
          target = se_var(id);
        }
        for (int k = 1; k <= m; ++k)
          bound_[vs[k - 1]->id] = m == 1 ? target : se_inv(tuple_name(m), k, target);
        emit(m == 1 ? se_paren(vs[0]) : se_ctor(tuple_name(m), vs), target, "body-call");
        return;
      }
    }
  }

  // Known language of a set expression, as a grammar nonterminal.
  std::optional<int> lang(const SetExprPtr& e, int depth = 0) {
    if (depth > 64) return std::nullopt;
    Grammar& g = ctx_.grammar();
    switch (e->kind) {
      case SetExpr::Kind::Pred:
        return ctx_.pred(e->id).nt;
      case SetExpr::Kind::Var: {
        const DemandVar& v = ctx_.var_info(e->id);
        if (v.kind == DemandVar::Kind::PF)
          return ctx_.pred_nullable(v.pred) ? std::optional<int>(Grammar::kAny) : std::nullopt;
        if (v.kind == DemandVar::Kind::Nested) {
          auto it = s_.nested.find(e->id);
          int r = it != s_.nested.end() ? it->second : resolve_nested(e->id);
          if (r >= 0 && ctx_.pred_nullable(r)) return Grammar::kAny;
          return std::nullopt;
        }
        auto it = bound_.find(e->id);
        if (it == bound_.end()) return std::nullopt;
        return lang(it->second, depth + 1);
      }
      case SetExpr::Kind::InvProj: {
        const SetExprPtr& in = e->args[0];
        if (in->kind == SetExpr::Kind::Var && tuple_arity(e->ctor) == 2) {
          const DemandVar& v = ctx_.var_info(in->id);
          int q = -1;
          if (v.kind == DemandVar::Kind::PF) q = v.pred;
          if (v.kind == DemandVar::Kind::Nested) {
            auto it = s_.nested.find(in->id);
            q = it != s_.nested.end() ? it->second : resolve_nested(in->id);
          }
          if (q >= 0 && !ctx_.pred_nullable(q) && is_cond(ctx_.program(), v.fn)) {
            if (e->k == 2) return ctx_.pred(q).nt;
            return ctx_.pred(ctx_.intern_pred(pp_is("True"))).nt;
          }
        }
        auto inner = lang(in, depth + 1);
        if (!inner) return std::nullopt;
        g.sig().intern(e->ctor, ctx_.program().find_ctor(e->ctor)
                                    ? ctx_.program().find_ctor(e->ctor)->arity
                                    : std::max(0, tuple_arity(e->ctor)));
        return g.inv_proj(e->ctor, e->k, *inner);
      }
      default:
        return std::nullopt;
    }
  }

  int resolve_nested(int v) {
    auto ov = ctx_.nested_override.find(v);
    if (ov != ctx_.nested_override.end()) return ov->second;
    if (resolving_.count(v)) return -1;
    resolving_.insert(v);
    const DemandVar& nv = ctx_.var_info(v);
    int r = -1;
    auto it = bound_.find(nv.inner);
    auto l = lang(se_var(nv.inner));
    if (l) {
      std::string name = it != bound_.end() ? to_string(ctx_, it->second) : ctx_.var_name(nv.inner);
      r = ctx_.intern_language(ctx_.grammar().minimize(*l), name);
    }
    resolving_.erase(v);
    return r;
  }

  DemandContext& ctx_;
  ConstraintSystem& s_;
  std::vector<std::pair<int, std::string>> queue_;
  std::set<std::pair<int, std::string>> seen_;
  std::map<int, SetExprPtr> bound_;
  std::set<int> resolving_;
  int pred_ = 0;
  std::string fn_;
  int rule_ = 0;
  int rule_var_ = -1;
  std::string where_;
  std::vector<ExprPtr> args_;
};

}  // namespace

ConstraintSystem gen_system(DemandContext& ctx, const std::vector<std::pair<int, std::string>>& seeds) {
  ConstraintSystem s;
  s.ctx = &ctx;
  for (auto& [p, f] : seeds) {
    if (p < 0 || p >= static_cast<int>(ctx.pred_count()))
      throw UnregisteredPredicate("predicate index " + std::to_string(p) + " is not registered");
    if (!ctx.program().find_fn(f)) throw std::runtime_error("unknown function " + f);
  }
  Generator(ctx, s).run(seeds);
  return s;
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

SetExprPtr subst_var(const SetExprPtr& e, int v, const SetExprPtr& by) {
  if (e->kind == SetExpr::Kind::Var) return e->id == v ? by : e;
  if (e->args.empty()) return e;
  auto c = std::make_shared<SetExpr>(*e);
  for (auto& a : c->args) a = subst_var(a, v, by);
  return c;
}

void count_vars(const SetExprPtr& e, std::map<int, int>& occ) {
  if (e->kind == SetExpr::Kind::Var) ++occ[e->id];
  for (auto& a : e->args) count_vars(a, occ);
}

// Occurs as an argument of a constructor or paren (not under an inverse projection).
bool occurs_applied(const SetExprPtr& e, int v) {
  if (e->kind == SetExpr::Kind::Ctor || e->kind == SetExpr::Kind::Paren) {
    for (auto& a : e->args) {
      if (a->kind == SetExpr::Kind::Var && a->id == v) return true;
      if (occurs_applied(a, v)) return true;
    }
    return false;
  }
  if (e->kind == SetExpr::Kind::Union)
    for (auto& a : e->args)
      if (occurs_applied(a, v)) return true;
  return false;
}

SetExprPtr tidy(const SetExprPtr& e) {
  if (e->kind == SetExpr::Kind::Paren) {
    SetExprPtr in = tidy(e->args[0]);
    if (in->kind == SetExpr::Kind::Var) return se_paren(in);
    return in;
  }
  if (e->args.empty()) return e;
  auto c = std::make_shared<SetExpr>(*e);
  for (auto& a : c->args) a = tidy(a);
  return c;
}

bool collapsible(const DemandContext& ctx, int v) {
  auto k = ctx.var_info(v).kind;
  return k == DemandVar::Kind::PFPos || k == DemandVar::Kind::PUnderscore;
}

}  // namespace

ConstraintSystem simplify(const ConstraintSystem& in) {
  ConstraintSystem s = in;
  DemandContext& ctx = *s.ctx;
  for (auto& [v, r] : s.nested) {
    if (r < 0) continue;
    SetExprPtr by = se_var(ctx.pf(r, ctx.var_info(v).fn));
    for (auto& c : s.cs) c.rhs = subst_var(c.rhs, v, by);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Constraint> kept;
    for (auto& c : s.cs)
      if (!(c.lhs->kind == SetExpr::Kind::Var && c.rhs->kind == SetExpr::Kind::Var &&
            c.lhs->id == c.rhs->id))
        kept.push_back(c);
    if (kept.size() != s.cs.size()) changed = true;
    s.cs = kept;

    std::map<int, int> occ;
    for (auto& c : s.cs) {
      count_vars(c.lhs, occ);
      count_vars(c.rhs, occ);
    }
    // w <= C(..) substituted into the single other occurrence of w.
    for (size_t i = 0; i < s.cs.size() && !changed; ++i) {
      const Constraint& c = s.cs[i];
      if (c.lhs->kind != SetExpr::Kind::Var || c.rhs->kind != SetExpr::Kind::Ctor ||
          c.rhs->args.empty())
        continue;
      int w = c.lhs->id;
      if (ctx.var_info(w).kind != DemandVar::Kind::PFPos || occ[w] != 2) continue;
      for (size_t j = 0; j < s.cs.size(); ++j) {
        if (j == i || !occurs_applied(s.cs[j].rhs, w)) continue;
        s.cs[j].rhs = tidy(subst_var(s.cs[j].rhs, w, c.rhs));
        s.cs.erase(s.cs.begin() + i);
        changed = true;
        break;
      }
    }
    // x <= w, w <= e with w otherwise unused becomes x <= e.
    for (size_t i = 0; i < s.cs.size() && !changed; ++i) {
      const Constraint& c = s.cs[i];
      SetExprPtr l = c.lhs;
      if (l->kind == SetExpr::Kind::Paren) l = l->args[0];
      if (l->kind != SetExpr::Kind::Var) continue;
      int w = l->id;
      if (!collapsible(ctx, w) || occ[w] != 2) continue;
      for (size_t j = 0; j < s.cs.size(); ++j) {
        if (j == i || s.cs[j].rhs->kind != SetExpr::Kind::Var || s.cs[j].rhs->id != w) continue;
        s.cs[i].lhs = s.cs[j].lhs;
        s.cs.erase(s.cs.begin() + j);
        changed = true;
        break;
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Weakening

namespace {

SetExprPtr drop_nested(DemandContext& ctx, const ConstraintSystem& s, const SetExprPtr& e) {
  if (e->kind == SetExpr::Kind::Var) {
    const DemandVar& v = ctx.var_info(e->id);
    if (v.kind != DemandVar::Kind::Nested) return e;
    auto it = s.nested.find(e->id);
    int r = it != s.nested.end() && it->second >= 0 ? it->second : 0;
    return se_var(ctx.pf(r, v.fn));
  }
  if (e->args.empty()) return e;
  auto c = std::make_shared<SetExpr>(*e);
  for (auto& a : c->args) a = drop_nested(ctx, s, a);
  return c;
}

void split(const SetExprPtr& l, const SetExprPtr& r, const Constraint& origin,
           std::vector<Constraint>& out) {
  switch (l->kind) {
    case SetExpr::Kind::Union:
      for (auto& a : l->args) split(a, r, origin, out);
      return;
    case SetExpr::Kind::Paren:
      split(l->args[0], r, origin, out);
      return;
    case SetExpr::Kind::Ctor:
      if (se_ground(l)) {
        // Checks below the root only constrain inner positions; dropping
        // them can only enlarge the solution.
        if (r->kind == SetExpr::Kind::Pred) out.push_back({l, r, origin.origin, origin.where});
        return;
      }
      for (size_t k = 0; k < l->args.size(); ++k)
        split(l->args[k], se_inv(l->ctor, static_cast<int>(k) + 1, r), origin, out);
      return;
    default:
      out.push_back({l, r, origin.origin, origin.where});
  }
}

bool codefinite_lhs(const SetExprPtr& e) {
  switch (e->kind) {
    case SetExpr::Kind::Var:
      return true;
    case SetExpr::Kind::Union:
      return std::all_of(e->args.begin(), e->args.end(), codefinite_lhs);
    case SetExpr::Kind::Ctor:
      return se_ground(e) || (e->args.size() == 1 && codefinite_lhs(e->args[0]));
    default:
      return false;
  }
}

bool has_nested(const DemandContext& ctx, const SetExprPtr& e) {
  if (e->kind == SetExpr::Kind::Var) return ctx.var_info(e->id).kind == DemandVar::Kind::Nested;
  for (auto& a : e->args)
    if (has_nested(ctx, a)) return true;
  return false;
}

}  // namespace

ConstraintSystem weaken(const ConstraintSystem& in) {
  ConstraintSystem s = in;
  DemandContext& ctx = *s.ctx;
  std::vector<Constraint> out;
  for (auto& c : s.cs) {
    SetExprPtr r = drop_nested(ctx, s, c.rhs);
    split(drop_nested(ctx, s, c.lhs), r, c, out);
  }
  s.cs = out;
  return s;
}

bool is_codefinite(const ConstraintSystem& s, std::string* why) {
  for (auto& c : s.cs) {
    if (!codefinite_lhs(c.lhs) || has_nested(*s.ctx, c.rhs) || has_nested(*s.ctx, c.lhs)) {
      if (why) *why = to_string(*s.ctx, c.lhs) + " <= " + to_string(*s.ctx, c.rhs);
      return false;
    }
  }
  return true;
}

}  // namespace demand
