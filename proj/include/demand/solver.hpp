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

#ifndef DEMAND_SOLVER_HPP
#define DEMAND_SOLVER_HPP

#include <map>
#include <optional>
#include <string>

#include "demand/constraints.hpp"

namespace demand {

// Solved variables as nonterminals of the context grammar.
struct Valuation {
  std::map<int, int> nt;  // demand variable -> nonterminal

  int of(int var) const {
    auto it = nt.find(var);
    return it == nt.end() ? Grammar::kAny : it->second;
  }
  bool empty() const { return nt.empty(); }
};

struct Unsat {
  Constraint violated;
  PTermPtr witness;
  std::string message;
};

struct SolveResult {
  std::optional<Valuation> valuation;
  std::optional<Unsat> unsat;
  size_t states = 0;      // product states explored
  size_t iterations = 0;  // rounds of the unguarded-cycle fixpoint

  bool ok() const { return valuation.has_value(); }
};

// Greatest solution of a co-definite system over finite partial trees.
SolveResult solve_greatest(const ConstraintSystem& s);

PTermPtr pterm_from_se(const SetExprPtr& ground);

// Nonterminal for a set expression with variables read from val.
int interpret(DemandContext& ctx, const SetExprPtr& e, const Valuation& val);

// Symbolic check that val satisfies every constraint; on failure returns
// the offending constraint rendered as text.
std::optional<std::string> verify_solution(const ConstraintSystem& s, const Valuation& val);

}  // namespace demand

#endif  // DEMAND_SOLVER_HPP
