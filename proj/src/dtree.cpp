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

#include "demand/dtree.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"

namespace demand {
namespace {

// Pattern of a rule seen as a call f(lhs).
ExprPtr call_of(const Rule& r) { return mk_app(r.fn, r.lhs); }

// Subterm of the rule's call at p, or null when p runs below a variable.
ExprPtr at_or_null(const ExprPtr& t, const Position& p) {
  ExprPtr cur = t;
  for (int k : p) {
    if (cur->kind == Expr::Kind::Var) return nullptr;
    if (k < 1 || k > static_cast<int>(cur->args.size())) return nullptr;
    cur = cur->args[k - 1];
  }
  return cur;
}

bool has_ctor_at(const Rule& r, const Position& p) {
  ExprPtr s = at_or_null(call_of(r), p);
  return s && s->kind == Expr::Kind::Ctor;
}

// Variable positions of the call pattern, leftmost-outermost first.
std::vector<Position> var_positions(const ExprPtr& pi) {
  std::vector<Position> out;
  for (auto& q : positions(pi))
    if (!q.empty() && subterm_at(pi, q)->kind == Expr::Kind::Var) out.push_back(q);
  std::stable_sort(out.begin(), out.end(), [](const Position& a, const Position& b) { return a.size() < b.size(); });
  return out;
}

// The rule's lhs adds no constructor below the pattern's variables.
bool is_variant(const Rule& r, const ExprPtr& pi) {
  for (auto& q : var_positions(pi))
    if (has_ctor_at(r, q)) return false;
  return true;
}

bool same_lhs(const Rule& a, const Rule& b) {
  // Equal up to variable names.
  std::map<std::string, std::string> ren;
  std::function<bool(const ExprPtr&, const ExprPtr&)> eq = [&](const ExprPtr& x, const ExprPtr& y) {
    if (x->kind != y->kind) return false;
    if (x->kind == Expr::Kind::Var) {
      auto it = ren.find(x->name);
      if (it != ren.end()) return it->second == y->name;
      ren[x->name] = y->name;
      return true;
    }
    if (x->name != y->name || x->args.size() != y->args.size()) return false;
    for (size_t i = 0; i < x->args.size(); ++i)
      if (!eq(x->args[i], y->args[i])) return false;
    return true;
  };
  return eq(call_of(a), call_of(b));
}

// Does pattern a match (is more general than) term b?
bool subsumes(const ExprPtr& a, const ExprPtr& b) {
  if (a->kind == Expr::Kind::Var) return true;
  if (b->kind == Expr::Kind::Var || a->name != b->name || a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!subsumes(a->args[i], b->args[i])) return false;
  return true;
}

class Builder {
 public:
  Builder(const Program& p, const std::string& fn, std::vector<int> demanded)
      : p_(p), f_(*p.find_fn(fn)), demanded_(std::move(demanded)) {
    for (auto& r : f_.rules) originals_.push_back(r);
  }

  DefTreePtr run() {
    std::vector<ExprPtr> params;
    for (int i = 1; i <= f_.arity; ++i) params.push_back(mk_var(fresh()));
    std::vector<Rule> rules = f_.rules;
    return build(mk_app(f_.name, params), rules, {});
  }

 private:
  std::string fresh() { return "x" + std::to_string(++counter_); }

  TypePtr type_at(const ExprPtr& pi, const Position& q) {
    TypePtr t = f_.arg_types.at(q[0] - 1);
    ExprPtr cur = pi->args[q[0] - 1];
    for (size_t i = 1; i < q.size(); ++i) {
      auto args = p_.ctor_arg_types(cur->name, t);
      t = args.at(q[i] - 1);
      cur = cur->args[q[i] - 1];
    }
    return t;
  }

  std::vector<std::string> ctors_of(const TypePtr& t) {
    std::vector<std::string> out;
    if (t->kind != Type::Kind::Con) return out;
    const DataDecl* d = p_.find_type(t->name);
    if (!d) return out;
    for (auto& c : d->ctors) out.push_back(c.name);
    return out;
  }

  DefTreePtr leaf(const ExprPtr& pi, std::vector<Rule> rs, bool special) {
    auto t = std::make_shared<DefTree>();
    t->kind = DefTree::Kind::Rule;
    t->pattern = pi;
    t->rules = std::move(rs);
    t->specialized = special;
    return t;
  }

  DefTreePtr make_or(const ExprPtr& pi, std::vector<DefTreePtr> kids) {
    if (kids.size() == 1) return kids[0];
    auto t = std::make_shared<DefTree>();
    t->kind = DefTree::Kind::Or;
    t->pattern = pi;
    for (auto& k : kids) {
      if (k->kind == DefTree::Kind::Or)
        t->children.insert(t->children.end(), k->children.begin(), k->children.end());
      else
        t->children.push_back(k);
    }
    return t;
  }

  // Leaves for rules that are variants of pi, grouping guarded clauses
  // with a common lhs.
  DefTreePtr leaves(const ExprPtr& pi, const std::vector<Rule>& rs, const std::set<int>& special) {
    std::vector<DefTreePtr> kids;
    std::vector<bool> used(rs.size(), false);
    for (size_t i = 0; i < rs.size(); ++i) {
      if (used[i]) continue;
      std::vector<Rule> group = {rs[i]};
      used[i] = true;
      for (size_t j = i + 1; j < rs.size(); ++j)
        if (!used[j] && rs[i].guard && rs[j].guard && same_lhs(rs[i], rs[j])) {
          group.push_back(rs[j]);
          used[j] = true;
        }
      kids.push_back(leaf(pi, group, special.count(rs[i].index) > 0));
    }
    return make_or(pi, kids);
  }

  DefTreePtr branch(const ExprPtr& pi, const std::vector<Rule>& rs, const Position& q, const std::set<int>& special) {
    auto t = std::make_shared<DefTree>();
    t->kind = DefTree::Kind::Branch;
    t->pattern = pi;
    t->pos = q;
    for (auto& c : ctors_of(type_at(pi, q))) {
      std::vector<Rule> sub;
      for (auto& r : rs)
        if (at_or_null(call_of(r), q)->name == c) sub.push_back(r);
      if (sub.empty()) continue;
      int ar = p_.find_ctor(c)->arity;
      std::vector<ExprPtr> vs;
      for (int i = 0; i < ar; ++i) vs.push_back(mk_var(fresh()));
      t->children.push_back(build(replace_at(pi, q, mk_ctor(c, vs)), sub, special));
    }
    return t;
  }

  // Instances of r with the variable at q replaced by each constructor,
  // leaving out instances already covered by another original rule.
  std::vector<Rule> specialize(const Rule& r, const Position& q, const ExprPtr& pi) {
    ExprPtr x = at_or_null(call_of(r), q);
    std::vector<Rule> out;
    for (auto& c : ctors_of(type_at(pi, q))) {
      int ar = p_.find_ctor(c)->arity;
      std::vector<ExprPtr> vs;
      for (int i = 0; i < ar; ++i) vs.push_back(mk_var(x->name + std::to_string(i + 1) + "'"));
      std::map<std::string, ExprPtr> s = {{x->name, mk_ctor(c, vs)}};
      Rule n = r;
      for (auto& l : n.lhs) l = subst_expr(l, s);
      n.rhs = subst_expr(n.rhs, s);
      if (n.guard) n.guard = subst_expr(n.guard, s);
      ExprPtr call = call_of(n);
      bool covered = false;
      for (auto& o : originals_)
        if (o.index != r.index && !o.guard && subsumes(call_of(o), call)) covered = true;
      if (!covered) out.push_back(n);
    }
    return out;
  }

  DefTreePtr build(const ExprPtr& pi, std::vector<Rule> rs, std::set<int> special) {
    auto vps = var_positions(pi);
    if (rs.size() == 1 && is_variant(rs[0], pi)) return leaf(pi, rs, special.count(rs[0].index) > 0);
    for (auto& q : vps) {
      bool all = std::all_of(rs.begin(), rs.end(), [&](const Rule& r) { return has_ctor_at(r, q); });
      if (all) return branch(pi, rs, q, special);
    }
    // Demanded argument positions may be forced even where some rule has
    // a variable: those rules are split by constructor.
    for (auto& q : vps) {
      if (q.size() != 1 || std::find(demanded_.begin(), demanded_.end(), q[0]) == demanded_.end()) continue;
      bool some = std::any_of(rs.begin(), rs.end(), [&](const Rule& r) { return has_ctor_at(r, q); });
      if (!some) continue;
      std::vector<Rule> next;
      for (auto& r : rs) {
        if (has_ctor_at(r, q)) {
          next.push_back(r);
          continue;
        }
        for (auto& n : specialize(r, q, pi)) {
          next.push_back(n);
          special.insert(n.index);
        }
      }
      return branch(pi, next, q, special);
    }
    std::vector<Rule> variants, others;
    for (auto& r : rs) (is_variant(r, pi) ? variants : others).push_back(r);
    if (others.empty()) return leaves(pi, variants, special);
    Position q;
    for (auto& v : vps)
      if (std::any_of(others.begin(), others.end(), [&](const Rule& r) { return has_ctor_at(r, v); })) {
        q = v;
        break;
      }
    std::vector<Rule> with, without;
    for (auto& r : rs) (has_ctor_at(r, q) ? with : without).push_back(r);
    return make_or(pi, {build(pi, with, special), build(pi, without, special)});
  }

  const Program& p_;
  const FunctionDef& f_;
  std::vector<int> demanded_;
  std::vector<Rule> originals_;
  int counter_ = 0;
};

void print_node(std::ostream& os, const Program& p, const DefTreePtr& t, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  switch (t->kind) {
    case DefTree::Kind::Branch:
      os << pad << "branch " << print_expr(p, t->pattern) << " at " << position_string(t->pos) << " ("
         << print_expr(p, subterm_at(t->pattern, t->pos)) << ")\n";
      for (auto& c : t->children) print_node(os, p, c, indent + 1);
      return;
    case DefTree::Kind::Or:
      os << pad << "or " << print_expr(p, t->pattern) << "\n";
      for (auto& c : t->children) print_node(os, p, c, indent + 1);
      return;
    case DefTree::Kind::Rule:
      for (auto& r : t->rules)
        os << pad << "rule " << print_rule(p, r) << (t->specialized ? "  [specialized]" : "") << "\n";
      return;
  }
}

nlohmann::json node_json(const Program& p, const DefTreePtr& t) {
  nlohmann::json j;
  j["pattern"] = print_expr(p, t->pattern);
  switch (t->kind) {
    case DefTree::Kind::Branch:
      j["kind"] = "branch";
      j["position"] = t->pos;
      break;
    case DefTree::Kind::Or:
      j["kind"] = "or";
      break;
    case DefTree::Kind::Rule:
      j["kind"] = "rule";
      j["rules"] = nlohmann::json::array();
      for (auto& r : t->rules) j["rules"].push_back({{"index", r.index}, {"text", print_rule(p, r)}});
      j["specialized"] = t->specialized;
      break;
  }
  if (t->kind != DefTree::Kind::Rule) {
    j["children"] = nlohmann::json::array();
    for (auto& c : t->children) j["children"].push_back(node_json(p, c));
  }
  return j;
}

}  // namespace

DefTreePtr build_lhs_tree(const Program& p, const std::string& fn) {
  const FunctionDef* f = p.find_fn(fn);
  if (!f || f->rules.empty()) throw std::runtime_error("no rules for " + fn);
  return Builder(p, fn, {}).run();
}

DefTreePtr build_with_demand(const Program& p, const std::string& fn, const std::vector<int>& demanded) {
  const FunctionDef* f = p.find_fn(fn);
  if (!f || f->rules.empty()) throw std::runtime_error("no rules for " + fn);
  return Builder(p, fn, demanded).run();
}

DefTreePtr build_with_demand(Analyzer& a, const std::string& fn) {
  const FunctionDef* f = a.program().find_fn(fn);
  if (!f) throw std::runtime_error("unknown function " + fn);
  TypePtr t = ground_type(f->result_type, default_instance_type(a.program()));
  PredPtr hnf = t->kind == Type::Kind::Con && a.program().find_type(t->name) ? pp_hnf(t->name) : pp_any();
  DemandReport r = a.infer(fn, hnf);
  std::vector<int> demanded;
  if (static_cast<int>(r.args.size()) == f->arity)
    for (size_t k = 0; k < r.args.size(); ++k)
      if (!a.ctx().grammar().nullable(r.args[k])) demanded.push_back(static_cast<int>(k) + 1);
  return build_with_demand(a.program(), fn, demanded);
}

bool is_inductively_sequential(const DefTreePtr& t) {
  if (t->kind == DefTree::Kind::Or) return false;
  for (auto& c : t->children)
    if (!is_inductively_sequential(c)) return false;
  return true;
}

std::vector<Rule> leaf_rules(const DefTreePtr& t) {
  if (t->kind == DefTree::Kind::Rule) return t->rules;
  std::vector<Rule> out;
  for (auto& c : t->children) {
    auto r = leaf_rules(c);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

std::string print_tree(const Program& p, const DefTreePtr& t) {
  std::ostringstream os;
  print_node(os, p, t, 0);
  return os.str();
}

std::string tree_json(const Program& p, const DefTreePtr& t) { return node_json(p, t).dump(2); }

}  // namespace demand
