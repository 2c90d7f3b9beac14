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

#ifndef DEMAND_DTREE_HPP
#define DEMAND_DTREE_HPP

#include <memory>
#include <string>
#include <vector>

#include "demand/analysis.hpp"

namespace demand {

struct DefTree;
using DefTreePtr = std::shared_ptr<const DefTree>;

struct DefTree {
  enum class Kind { Branch, Rule, Or };
  Kind kind = Kind::Rule;
  ExprPtr pattern;  // call pattern f(t1..tn)
  Position pos;     // Branch: inductive position in the pattern
  std::vector<DefTreePtr> children;
  // Rule: the rules sharing this left-hand side (several when guarded
  // alternatives of one clause); specialized instances are marked.
  std::vector<Rule> rules;
  bool specialized = false;
};

DefTreePtr build_lhs_tree(const Program& p, const std::string& fn);
bool is_inductively_sequential(const DefTreePtr& t);
// Demanded argument positions (1-based) become branch points when the
// left-hand sides alone would need an Or node.
DefTreePtr build_with_demand(const Program& p, const std::string& fn, const std::vector<int>& demanded);
DefTreePtr build_with_demand(Analyzer& a, const std::string& fn);

std::string print_tree(const Program& p, const DefTreePtr& t);
std::string tree_json(const Program& p, const DefTreePtr& t);
// All rules at the leaves, in tree order.
std::vector<Rule> leaf_rules(const DefTreePtr& t);

}  // namespace demand

#endif  // DEMAND_DTREE_HPP
