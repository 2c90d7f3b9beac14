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

#include "common.hpp"
#include "demand/oracle.hpp"
#include "doctest.h"

using namespace demand;
using demand::testing::load;

namespace {

std::vector<std::string> strings(const std::vector<PTermPtr>& ts) {
  std::vector<std::string> out;
  for (auto& t : ts) out.push_back(to_string(t));
  return out;
}

}  // namespace

TEST_CASE("enumeration order and heights") {
  Program p = load("plus.flk");
  TypePtr nat = Type::con("Nat");
  CHECK(strings(enumerate_partial_terms(p, nat, 0)) ==
        std::vector<std::string>{"_|_"});
  // Height of Succ (Succ _|_) is 2, so it belongs to the depth-2 slice.
  CHECK(strings(enumerate_partial_terms(p, nat, 2)) ==
        std::vector<std::string>{"_|_", "Zero", "Succ _|_", "Succ Zero",
                                 "Succ (Succ _|_)"});
  CHECK(strings(enumerate_partial_terms(p, Type::con("Bool"), 1)) ==
        std::vector<std::string>{"_|_", "True", "False"});
  for (auto& t : enumerate_partial_terms(p, Type::list(nat), 4))
    CHECK(height(t) <= 4);
  CHECK_THROWS_AS(enumerate_partial_terms(p, Type::con("Tree"), 2), UnknownType);
}

TEST_CASE("evaluation examples") {
  Program p = load("length.flk");
  auto len = [&](const std::string& arg, long fuel) {
    return to_string(eval(p, parse_expr(p, "length x").expr,
                          {{"x", parse_pterm(p, arg)}}, fuel));
  };
  CHECK(len("[bot, bot]", 50) == "Succ (Succ Zero)");
  CHECK(len("bot : bot", 50) == "Succ _|_");

  Program q = load("plus.flk");
  Evaluator ev(q);
  CHECK(to_string(ev.apply("plus", {PTerm::bottom(), parse_pterm(q, "Zero")})) == "_|_");
  CHECK(to_string(ev.apply("plus", {parse_pterm(q, "Succ _"), parse_pterm(q, "Zero")})) ==
        "Succ _|_");
  CHECK(to_string(ev.apply("plus", {parse_pterm(q, "Succ (Succ Zero)"),
                                    parse_pterm(q, "Succ Zero")})) ==
        "Succ (Succ (Succ Zero))");
}

TEST_CASE("parallel or and overlapping rules") {
  Program p = load("por.flk");
  Evaluator ev(p);
  auto T = PTerm::node("True"), F = PTerm::node("False"), B = PTerm::bottom();
  CHECK(to_string(ev.apply("por", {T, B})) == "True");
  CHECK(to_string(ev.apply("por", {B, T})) == "True");
  CHECK(to_string(ev.apply("por", {F, F})) == "False");
  CHECK(to_string(ev.apply("por", {F, B})) == "_|_");
  CHECK(to_string(ev.apply("||", {B, T})) == "True");

  Program m = load("merge.flk");
  Evaluator em(m);
  CHECK(to_string(em.apply("merge", {parse_pterm(m, "[]"), parse_pterm(m, "[]")})) == "[]");
  CHECK(to_string(em.apply("merge", {parse_pterm(m, "[Zero, Succ Zero]"),
                                     parse_pterm(m, "[Zero]")})) ==
        "[Zero, Zero, Succ Zero]");
}

TEST_CASE("inconsistent overlaps are reported") {
  Program p = parse_program_or_throw("h True x = x\nh y False = True");
  Evaluator ev(p);
  CHECK_THROWS_AS(ev.apply("h", {PTerm::node("True"), PTerm::node("False")}),
                  InconsistentOverlap);
}

TEST_CASE("free guard variables are searched existentially") {
  Program p = parse_program_or_throw(
      "data Nat = Zero | Succ Nat\n"
      "both Zero (Succ Zero) = True\n"
      "ex x = both x y -> True\n");
  Evaluator ev(p);
  CHECK(to_string(ev.apply("ex", {PTerm::node("Zero")})) == "True");
  CHECK(to_string(ev.apply("ex", {parse_pterm(p, "Succ Zero")})) == "_|_");
}

TEST_CASE("fuel exhaustion yields bottom and fuel is monotone") {
  Program p = load("plus.flk");
  Enumerator en(p);
  const FunctionDef& f = *p.find_fn("plus");
  auto args = en.arg_tuples(f, 3);
  EvalOptions small;
  small.fuel = 2;
  Evaluator e1(p, small);
  Evaluator e2(p);
  for (auto& t : args) {
    PTermPtr a = e1.apply_tuple("plus", t);
    PTermPtr b = e2.apply_tuple("plus", t);
    CHECK(pterm_leq(a, b));
  }
  Program loop = parse_program_or_throw("loop x = loop x");
  CHECK(to_string(eval(loop, parse_expr(loop, "loop True").expr, {}, 100)) == "_|_");
}

TEST_CASE("information order") {
  Program p = load("plus.flk");
  auto ts = enumerate_partial_terms(p, Type::list(Type::con("Nat")), 2);
  for (auto& a : ts) {
    CHECK(pterm_leq(PTerm::bottom(), a));
    CHECK(pterm_leq(a, a));
    for (auto& b : ts) {
      if (pterm_leq(a, b) && pterm_leq(b, a)) CHECK(pterm_equal(a, b));
      auto l = pterm_lub(a, b);
      if (l) {
        CHECK(pterm_leq(a, *l));
        CHECK(pterm_leq(b, *l));
      } else {
        CHECK_FALSE(pterm_leq(a, b));
        CHECK_FALSE(pterm_leq(b, a));
      }
    }
  }
}

TEST_CASE("normalize preserves bounded evaluation") {
  for (auto name : {"plus.flk", "length.flk", "merge.flk", "zip.flk", "fig1.flk",
                    "geq.flk", "por.flk", "sublists.flk"}) {
    CAPTURE(name);
    Program p = load(name);
    Program n = normalize(p);
    Enumerator en(p);
    EvalOptions o;
    o.fuel = 200;
    o.search_depth = 3;
    Evaluator ep(p, o), enorm(n, o);
    for (auto& fn : p.user_functions()) {
      const FunctionDef& f = *p.find_fn(fn);
      if (f.arity == 0) continue;
      for (auto& t : en.arg_tuples(f, 3)) {
        PTermPtr a, b;
        try {
          a = ep.apply_tuple(fn, t);
          b = enorm.apply_tuple(fn, t);
        } catch (const InconsistentOverlap&) {
          continue;
        }
        CAPTURE(fn);
        CAPTURE(to_string(t));
        CHECK(to_string(a) == to_string(b));
      }
    }
  }
}
