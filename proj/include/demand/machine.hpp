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

#ifndef DEMAND_MACHINE_HPP
#define DEMAND_MACHINE_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "demand/analysis.hpp"

namespace demand {

enum class Strategy { Eager, NaiveLazy, DemandDriven };
std::string to_string(Strategy s);

struct EvalLimits {
  size_t max_steps = 5'000'000;
  size_t max_answers = 100'000;
  int max_inst_depth = 24;  // nesting of constructors bound to a goal variable
};

struct Answer {
  std::vector<std::pair<std::string, std::string>> bindings;  // goal variable, term
  std::string value;
  std::string text() const;
  bool operator<(const Answer& o) const;
  bool operator==(const Answer& o) const;
};

struct EvalStats {
  size_t reduction_steps = 0;
  size_t reevaluations = 0;
  size_t search_nodes = 0;
  std::vector<Answer> answers;
  bool truncated = false;  // some branch hit the instantiation depth limit
  // Reductions of each redex of the goal itself, keyed by its position.
  std::map<std::string, size_t> goal_redex_reductions;
  std::map<std::string, size_t> reevaluations_by_function;
};

struct LimitExceeded : std::runtime_error {
  LimitExceeded(const std::string& what, EvalStats s) : std::runtime_error(what), stats(std::move(s)) {}
  EvalStats stats;
};

// The analyzer is only consulted for DemandDriven; one is built on demand
// when none is passed.
EvalStats evaluate_goal(const Program& p, const std::string& goal, Strategy s, const EvalLimits& limits = {},
                        Analyzer* analyzer = nullptr);

struct BenchCell {
  EvalStats stats;
  bool ok = true;
  std::string error;
};

struct BenchRow {
  std::string suite;
  int size = 0;
  std::string goal;
  BenchCell eager, lazy, demand;
  double lazy_over_demand() const;
};

std::vector<std::string> bench_suites();
std::string bench_goal(const std::string& suite, int n);
// p must be the suite's program (sublists.flk or nqueens.flk).
std::vector<BenchRow> bench(const Program& p, const std::string& suite, const std::vector<int>& sizes,
                            const EvalLimits& limits = {});
std::string bench_text(const std::vector<BenchRow>& rows);
std::string bench_json(const std::vector<BenchRow>& rows);

}  // namespace demand

#endif  // DEMAND_MACHINE_HPP
