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

#ifndef DEMAND_ORACLE_HPP
#define DEMAND_ORACLE_HPP

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "demand/kernel.hpp"

namespace demand {

struct PTerm;
using PTermPtr = std::shared_ptr<const PTerm>;

// A finite constructor tree whose leaves may be bottom.
struct PTerm {
  bool bot = true;
  std::string ctor;
  std::vector<PTermPtr> args;

  static PTermPtr bottom();
  static PTermPtr node(std::string ctor, std::vector<PTermPtr> args = {});
};

std::string to_string(const PTermPtr& t);
bool pterm_equal(const PTermPtr& a, const PTermPtr& b);
// Information order: bottom below everything, constructors compared pointwise.
bool pterm_leq(const PTermPtr& a, const PTermPtr& b);
std::optional<PTermPtr> pterm_lub(const PTermPtr& a, const PTermPtr& b);
int height(const PTermPtr& t);
// Variables stand for bottom.
PTermPtr pterm_from_expr(const ExprPtr& e);
PTermPtr parse_pterm(const Program& p, const std::string& text);

struct UnknownType : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InconsistentOverlap : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Unsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Type used in place of type variables when enumerating: Nat when the
// program declares it, Bool otherwise.
TypePtr default_instance_type(const Program& p);

// All partial terms of the type with height at most depth; bottom first,
// then constructors in declaration order, children lexicographically.
class Enumerator {
 public:
  explicit Enumerator(const Program& p);
  const std::vector<PTermPtr>& terms(const TypePtr& t, int depth);
  // Argument tuples of a function, as a Tup term for arity != 1 and the
  // bare argument for arity 1.
  std::vector<PTermPtr> arg_tuples(const FunctionDef& f, int depth);

 private:
  const Program& p_;
  TypePtr fill_;
  std::map<std::string, std::vector<PTermPtr>> memo_;
};

std::vector<PTermPtr> enumerate_partial_terms(const Program& p,
                                              const TypePtr& t, int depth);

struct EvalOptions {
  long fuel = 500;
  int search_depth = 4;  // bound for free guard variable instantiation
};

class Evaluator {
 public:
  Evaluator(const Program& p, EvalOptions opts = {});
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  PTermPtr eval(const ExprPtr& e, const std::map<std::string, PTermPtr>& env = {});
  PTermPtr apply(const std::string& fn, const std::vector<PTermPtr>& args);
  // Applies fn to an argument tuple as produced by Enumerator::arg_tuples.
  PTermPtr apply_tuple(const std::string& fn, const PTermPtr& args);
  // d(f(args)) for a unary function d.
  PTermPtr apply_composed(const std::string& d, const std::string& f,
                          const PTermPtr& args);
  bool exhausted() const;
  void set_fuel(long fuel);
  const Program& program() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

PTermPtr eval(const Program& p, const ExprPtr& e,
              const std::map<std::string, PTermPtr>& env, long fuel);

// Splits an argument tuple term back into the argument list of f.
std::vector<PTermPtr> spread_args(const FunctionDef& f, const PTermPtr& t);

}  // namespace demand

#endif  // DEMAND_ORACLE_HPP
