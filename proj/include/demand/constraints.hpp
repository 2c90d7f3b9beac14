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

#ifndef DEMAND_CONSTRAINTS_HPP
#define DEMAND_CONSTRAINTS_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "demand/grammar.hpp"
#include "demand/kernel.hpp"
#include "demand/predicates.hpp"

namespace demand {

struct DemandVar {
  enum class Kind { PF, PFRule, PFPos, PUnderscore, Nested };
  Kind kind = Kind::PF;
  int pred = -1;      // predicate table index (unused for Nested)
  std::string fn;     // function name
  int rule = 0;       // 1-based rule index
  Position pos;       // lhs position (PFPos) or rhs position (PUnderscore)
  int inner = -1;     // Nested: the variable whose value is the demand on fn
};

struct SetExpr;
using SetExprPtr = std::shared_ptr<const SetExpr>;

struct SetExpr {
  // Paren is the transparent one-tuple used for unary functions.
  enum class Kind { Var, Pred, Ctor, InvProj, Union, Empty, Paren };
  Kind kind = Kind::Empty;
  int id = -1;         // variable or predicate index
  std::string ctor;    // Ctor / InvProj
  int k = 0;           // InvProj index, 1-based
  std::vector<SetExprPtr> args;
};

SetExprPtr se_var(int v);
SetExprPtr se_pred(int p);
SetExprPtr se_ctor(std::string c, std::vector<SetExprPtr> args = {});
SetExprPtr se_inv(std::string c, int k, SetExprPtr e);
SetExprPtr se_union(std::vector<SetExprPtr> args);
SetExprPtr se_empty();
SetExprPtr se_paren(SetExprPtr e);
bool se_equal(const SetExprPtr& a, const SetExprPtr& b);
bool se_ground(const SetExprPtr& e);

struct Constraint {
  SetExprPtr lhs;
  SetExprPtr rhs;
  std::string origin;  // generation rule that produced it
  std::string where;   // "plus.2" style rule reference
};

struct PredEntry {
  std::string name;
  PredPtr pred;
  TypePtr type;
  int nt = Grammar::kAny;
  bool exact = true;  // grammar is the exact True-set, not an over-approximation
};

struct UnregisteredPredicate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared state of one analysis: the normalized program, the predicate
// table with grammars, and the interned demand variables.
class DemandContext {
 public:
  explicit DemandContext(const Program& p);

  const Program& program() const { return norm_; }
  const Program& source() const { return src_; }
  Grammar& grammar() { return g_; }
  const Grammar& grammar() const { return g_; }

  // Grammars of user-defined predicates are supplied by this hook.
  std::function<std::optional<std::pair<int, bool>>(DemandContext&, const PredPtr&)> user_grammar;

  int intern_pred(const PredPtr& p, const TypePtr& t = nullptr);
  // Registers a predicate known only by its grammar; reuses an existing
  // entry with the same language. Nullable languages map to any.
  int intern_language(int nt, const std::string& name, const TypePtr& t = nullptr);
  int find_pred(const std::string& name) const;
  const PredEntry& pred(int id) const { return preds_.at(id); }
  size_t pred_count() const { return preds_.size(); }
  bool pred_nullable(int id) const { return g_.nullable(preds_.at(id).nt); }

  int var(const DemandVar& v);
  const DemandVar& var_info(int id) const { return vars_.at(id); }
  size_t var_count() const { return vars_.size(); }
  std::string var_name(int id) const;
  int pf(int pred, const std::string& fn);

  // Refinement: demand used for a nested variable instead of any.
  std::map<int, int> nested_override;

  size_t max_preds = 96;

 private:
  Program src_;
  Program norm_;
  Grammar g_;
  std::vector<PredEntry> preds_;
  std::map<std::string, int> pred_index_;
  std::vector<DemandVar> vars_;
  std::map<std::tuple<int, int, std::string, int, Position, int>, int> var_index_;
};

struct ConstraintSystem {
  DemandContext* ctx = nullptr;
  std::vector<Constraint> cs;
  // (pred, fn) pairs whose constraints are included, in generation order.
  std::vector<std::pair<int, std::string>> pairs;
  // Nested variable -> resolved predicate, or -1 when unresolved.
  std::map<int, int> nested;
};

std::string to_string(const DemandContext& ctx, const SetExprPtr& e);
std::string dump(const ConstraintSystem& s);
std::string dump_json(const ConstraintSystem& s);

SetExprPtr delta(DemandContext& ctx, int pred, const std::string& fn, int rule,
                 const Position& pos, const ExprPtr& pattern);

// Seeds are (predicate id, function) pairs.
ConstraintSystem gen_system(DemandContext& ctx, const std::vector<std::pair<int, std::string>>& seeds);
ConstraintSystem simplify(const ConstraintSystem& s);
ConstraintSystem weaken(const ConstraintSystem& s);
bool is_codefinite(const ConstraintSystem& s, std::string* why = nullptr);

// Rules of fn as seen by the generator: the components of a join, or the
// single rule of an ordinary function.
std::vector<Rule> analysis_rules(const Program& p, const std::string& fn);

}  // namespace demand

#endif  // DEMAND_CONSTRAINTS_HPP
