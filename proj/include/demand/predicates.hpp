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

#ifndef DEMAND_PREDICATES_HPP
#define DEMAND_PREDICATES_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "demand/grammar.hpp"
#include "demand/kernel.hpp"
#include "demand/oracle.hpp"

namespace demand {

struct Pred;
using PredPtr = std::shared_ptr<const Pred>;

// Partial predicate combinators. Each denotes a continuous map into the
// two-point domain, represented in the kernel by Bool with False unused.
struct Pred {
  enum class Kind {
    Any,
    Nothing,
    Ctor,     // constructor transformer C(p1, .., pn)
    IsCtor,   // matching predicate isC
    Hnf,      // hnf of a data type (name)
    Nf,       // nf of a monotype
    Spine,
    Meet,
    Join,
    Product,
    Proj,     // prj k of constructor name
    User,     // a unary (or tuple-taking) function of the program
    Fold,     // foldl c_k base over [Nat]
    Named,    // opaque predicate known only by its grammar (analysis output)
  };
  Kind kind = Kind::Any;
  std::string name;
  TypePtr type;  // Nf / Spine element type, when given
  int k = 0;     // Proj index, Fold combiner
  bool base_true = false;
  std::vector<PredPtr> args;
};

PredPtr pp_any();
PredPtr pp_nothing();
PredPtr pp_ctor(std::string ctor, std::vector<PredPtr> args);
PredPtr pp_is(std::string ctor);
PredPtr pp_hnf(std::string type_name);
PredPtr pp_nf(TypePtr type);
PredPtr pp_spine(TypePtr elem = nullptr);
PredPtr pp_meet(PredPtr a, PredPtr b);
PredPtr pp_join(PredPtr a, PredPtr b);
PredPtr pp_product(std::vector<PredPtr> ps);
PredPtr pp_proj(std::string ctor, int k, PredPtr inner);
PredPtr pp_user(std::string fn);
PredPtr pp_fold(int combiner, bool base_true);
PredPtr pp_named(std::string name);

struct PredError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Textual syntax: any, nothing, hnf@Nat, nf@[Nat], spine, is@Zero,
// Succ(p), p /\ q, p \/ q, (p x q), prj1@Tup2(p), user:f, fold@c2@True.
PredPtr parse_pred(const Program& p, const std::string& text);
std::string pred_name(const PredPtr& p);

// hnf_K as the join of the matching predicates of K.
PredPtr hnf_as_join(const Program& p, const std::string& type_name);
// nf for a monotype; throws PredError for function types or type variables.
PredPtr nf_pred(const Program& p, const TypePtr& t);

// Checks that p can be applied to values of type t; throws PredError.
void check_pred_type(const Program& prog, const PredPtr& p, const TypePtr& t);
// Data type the predicate is defined on, when it determines one.
TypePtr pred_domain(const Program& prog, const PredPtr& p);

// Program extended with kernel definitions of compiled predicates.
class PredContext {
 public:
  explicit PredContext(const Program& p, EvalOptions opts = {});
  ~PredContext();

  // Name of the kernel function implementing p on values of type t.
  std::string compile(const PredPtr& p, const TypePtr& t = nullptr);
  const Program& program() const { return prog_; }
  // True when p(t) evaluates to True within the fuel bound.
  bool apply(const PredPtr& p, const PTermPtr& t, const TypePtr& ty = nullptr);
  // True when d(f(args)) evaluates to True.
  bool apply_composed(const PredPtr& d, const std::string& f, const PTermPtr& args);
  Evaluator& evaluator();
  const EvalOptions& options() const { return opts_; }

 private:
  std::string compile_rules(const PredPtr& p, const TypePtr& t);
  std::string define(const std::string& name, const TypePtr& t,
                     std::vector<Rule> rules);

  Program prog_;
  EvalOptions opts_;
  std::map<std::string, std::string> compiled_;
  std::unique_ptr<Evaluator> ev_;
  bool dirty_ = true;
};

bool apply_predicate(const Program& p, const PredPtr& pp, const PTermPtr& t, long fuel = 500);

// Argument tuple t with pi2(f t) = True and pi1(t) undefined, if one exists
// among the argument tuples of height at most depth.
std::optional<PTermPtr> refute_typing(PredContext& ctx, const std::string& f,
                                      const PredPtr& pi1, const PredPtr& pi2,
                                      int depth);
std::optional<PTermPtr> refute_typing(const Program& p, const std::string& f,
                                      const PredPtr& pi1, const PredPtr& pi2,
                                      int depth, long fuel);

// Bounded extensional comparison over the partial terms of type t up to the
// given height. Returns a term on which a holds and b does not.
std::optional<PTermPtr> pred_not_leq(PredContext& ctx, const PredPtr& a, const PredPtr& b,
                                     const TypePtr& t, int depth);
bool pred_equal_on_slice(PredContext& ctx, const PredPtr& a, const PredPtr& b,
                         const TypePtr& t, int depth);

struct FoldClass {
  PredPtr rep;
  std::vector<PredPtr> members;
};
// The foldl(c_i, base) predicates on [Nat] plus any, grouped by extensional
// equality on the slice of the given depth.
std::vector<FoldClass> fold_domain(PredContext& ctx, int depth = 4);

// Grammar of the True-preimage. Named and User predicates are delegated to
// `resolve`, which returns -1 when it cannot help.
using PredResolver = std::function<int(Grammar&, const PredPtr&)>;
int pred_grammar(Grammar& g, const Program& prog, const PredPtr& p,
                 const TypePtr& t = nullptr, const PredResolver& resolve = nullptr);

}  // namespace demand

#endif  // DEMAND_PREDICATES_HPP
