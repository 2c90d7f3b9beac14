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

#ifndef DEMAND_ANALYSIS_HPP
#define DEMAND_ANALYSIS_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "demand/solver.hpp"

namespace demand {

struct AnalysisUnsat : std::runtime_error {
  explicit AnalysisUnsat(Unsat u)
      : std::runtime_error("unsatisfiable: " + u.message), unsat(std::move(u)) {}
  Unsat unsat;
};

struct DemandReport {
  std::string function;
  std::string result_pred;
  int sigma = Grammar::kAny;           // σ(result•f) over argument tuples
  std::vector<int> args;               // demand per argument position
  std::vector<std::string> patterns;   // printable demand per position
  size_t constraints = 0;
  size_t variables = 0;
  size_t states = 0;
  size_t refinements = 0;
};

struct Verdict {
  enum class Kind { Proved, Refuted, Unknown };
  Kind kind = Kind::Unknown;
  PTermPtr counterexample;  // Refuted
  std::string detail;
};

std::string to_string(Verdict::Kind k);

struct CheckBounds {
  int depth = 3;
  long fuel = 500;
};

struct Violation {
  std::string pred;
  std::string function;
  PTermPtr args;
};

struct SoundnessReport {
  size_t pairs = 0;
  size_t checked = 0;   // argument tuples evaluated
  size_t accepted = 0;  // tuples the oracle maps to True
  size_t sampled_pairs = 0;
  size_t undefined = 0;  // tuples on which overlapping rules disagree
  std::vector<Violation> violations;
};

struct HarnessOptions {
  int depth = 4;
  long fuel = 500;
  // Pairs with more argument tuples than this are checked on a fixed
  // pseudo-random subset of that size.
  size_t max_tuples = 6000;
  unsigned seed = 1;
};

// One analysis session over a program: predicate table, solved systems.
class Analyzer {
 public:
  explicit Analyzer(const Program& p);
  ~Analyzer();

  DemandContext& ctx() { return *ctx_; }
  const Program& program() const { return ctx_->source(); }

  int pred(const std::string& text);
  int pred(const PredPtr& p, const TypePtr& t = nullptr);

  // Weakened and solved system seeded with (pred, fn); cached.
  const ConstraintSystem& system(int pred, const std::string& fn);
  const Valuation& solution(int pred, const std::string& fn);
  int sigma(int pred, const std::string& fn);

  DemandReport infer(const std::string& fn, const PredPtr& result);
  Verdict check_typing(const std::string& fn, const PredPtr& pi1, const PredPtr& pi2,
                       CheckBounds b = {});

  // (pred, fn) pairs reachable from the given seeds.
  std::vector<std::pair<int, std::string>> pairs(const std::vector<std::pair<int, std::string>>& seeds);

  // Oracle truth of (pred . fn)(args) on the normalized program.
  bool oracle(int pred, const std::string& fn, const PTermPtr& args, long fuel);

  SoundnessReport soundness(const std::vector<std::pair<int, std::string>>& pairs,
                            HarnessOptions o = {},
                            const std::map<std::pair<int, std::string>, int>* replace = nullptr);

  // Argument demand of fn split by position.
  std::vector<int> split_args(const std::string& fn, int sigma);
  std::string pattern(int nt, const TypePtr& t);

  size_t max_refinements = 4;

 private:
  struct Solved {
    ConstraintSystem sys;
    Valuation val;
    size_t states = 0;
    size_t refinements = 0;
  };
  Solved& solve(int pred, const std::string& fn);

  std::unique_ptr<DemandContext> ctx_;
  std::map<std::pair<int, std::string>, Solved> solved_;
  std::map<std::string, int> user_nt_;
  std::unique_ptr<PredContext> oracle_;
};

// hnf, nf and (for lists) spine of each user function's result type, and
// is@True for Boolean results; type variables are instantiated as the
// oracle does.
std::vector<std::pair<int, std::string>> default_seeds(Analyzer& a);

struct DependencyDemo {
  std::string pred;          // the predicate whose grammar is examined
  std::string grammar;       // its solved grammar
  struct Row {
    std::string term;
    bool in_sigma;
    bool oracle_true;
  };
  std::vector<Row> rows;
};

// Membership of a few pairs in the solved grammar of samelength next to
// the predicate's own value on them.
DependencyDemo dependency_loss_demo(Analyzer& a, const std::vector<std::string>& terms);

}  // namespace demand

#endif  // DEMAND_ANALYSIS_HPP
