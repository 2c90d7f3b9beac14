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

#include <functional>
#include <random>

#include "common.hpp"
#include "doctest.h"

using namespace demand;
using demand::testing::load;
using demand::testing::read_corpus;

TEST_CASE("parse data declaration") {
  Program p = parse_program_or_throw("data Nat = Zero | Succ Nat");
  const DataDecl* d = p.find_type("Nat");
  REQUIRE(d != nullptr);
  CHECK(d->params.empty());
  REQUIRE(d->ctors.size() == 2);
  CHECK(d->ctors[0].name == "Zero");
  CHECK(d->ctors[0].args.empty());
  CHECK(d->ctors[1].name == "Succ");
  REQUIRE(d->ctors[1].args.size() == 1);
  CHECK(to_string(d->ctors[1].args[0]) == "Nat");
}

TEST_CASE("empty input") {
  ParseResult r = parse_program("");
  CHECK(r.ok());
  CHECK(r.program->user_functions().empty());
  CHECK(check_wellformed(*r.program).empty());
}

TEST_CASE("length has two rules") {
  Program p = load("length.flk");
  REQUIRE(p.find_fn("length"));
  CHECK(p.find_fn("length")->rules.size() == 2);
  CHECK(check_wellformed(p).empty());
  CHECK(to_string(p.find_fn("length")->arg_types[0]) == "[a]");
  CHECK(to_string(p.find_fn("length")->result_type) == "Nat");
}

TEST_CASE("tuple argument lists are spread") {
  Program p = load("plus.flk");
  const FunctionDef* f = p.find_fn("plus");
  REQUIRE(f);
  CHECK(f->arity == 2);
  CHECK(print_rule(p, f->rules[1]) == "plus (Succ n) m = Succ (plus n m)");
  Program z = load("zip.flk");
  CHECK(z.find_fn("samelength")->arity == 2);
  CHECK(to_string(z.find_fn("zip")->result_type) == "[(a, b)]");
}

TEST_CASE("syntax errors carry positions") {
  ParseResult r = parse_program("data Nat = Zero |\nf x = (x");
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics[0].code == "SyntaxError");
  CHECK(r.diagnostics[0].span.line >= 1);
}

TEST_CASE("duplicate constructors and unknown symbols") {
  ParseResult r = parse_program("data A = X\ndata B = X");
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics[0].code == "DuplicateCtor");
  ParseResult u = parse_program("f x = g x");
  REQUIRE_FALSE(u.ok());
  CHECK(u.diagnostics[0].code == "UnknownSymbol");
  ParseResult c = parse_program("f x = Foo");
  REQUIRE_FALSE(c.ok());
  CHECK(c.diagnostics[0].code == "UnknownSymbol");
}

TEST_CASE("well-formedness restrictions") {
  Program p = parse_program_or_throw("f x x = x");
  auto d = check_wellformed(p);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "NonLinearLhs");
  CHECK(d[0].rule == "rule 1 of f");

  Program q = parse_program_or_throw("prj1 p x = p (x, y) -> True");
  CHECK(check_wellformed(q).empty());

  Program r = parse_program_or_throw("g x = y");
  auto dr = check_wellformed(r);
  REQUIRE(dr.size() == 1);
  CHECK(dr[0].code == "FreeVarNotInGuard");

  Program s = parse_program_or_throw("h True x = x\nh y False = True");
  auto ds = check_wellformed(s);
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].code == "OverlapInconsistent");

  Program t = parse_program_or_throw("data Nat = Zero | Succ Nat\nk x = Succ True");
  auto dt = check_wellformed(t);
  REQUIRE_FALSE(dt.empty());
  CHECK(dt[0].code == "IllTyped");

  for (auto f : {"plus.flk", "length.flk", "merge.flk", "zip.flk", "fig1.flk",
                 "geq.flk", "por.flk", "predicates.flk", "sublists.flk",
                 "nqueens.flk", "empty.flk"}) {
    CAPTURE(f);
    CHECK(check_wellformed(load(f)).empty());
  }
}

TEST_CASE("positions") {
  Program p = load("plus.flk");
  ExprPtr t = p.find_fn("plus")->rules[1].rhs;
  CHECK(print_expr(p, subterm_at(t, {1})) == "plus n m");
  CHECK(print_expr(p, replace_at(subterm_at(t, {1}), {2}, mk_ctor("Zero"))) ==
        "plus n Zero");
  CHECK(root(mk_ctor("Succ", {mk_ctor("Zero")})) == "Succ");
  CHECK_THROWS_AS(subterm_at(t, {2}), InvalidPosition);
  CHECK(subterm_at(t, {}) == t);
}

namespace {

ExprPtr random_term(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> k(0, depth > 0 ? 4 : 1);
  switch (k(rng)) {
    case 0: return mk_var("x");
    case 1: return mk_ctor("Zero");
    case 2: return mk_ctor("Succ", {random_term(rng, depth - 1)});
    case 3: return mk_app("plus", {random_term(rng, depth - 1), random_term(rng, depth - 1)});
    default:
      return mk_ctor("(,)", {random_term(rng, depth - 1), random_term(rng, depth - 1)});
  }
}

}  // namespace

TEST_CASE("position laws on generated terms") {
  std::mt19937 rng(7);
  for (int n = 0; n < 300; ++n) {
    ExprPtr t = random_term(rng, 5);
    for (auto& pos : positions(t)) {
      ExprPtr back = replace_at(t, pos, subterm_at(t, pos));
      CHECK(expr_equal(back, t));
    }
  }
}

TEST_CASE("parse print identity") {
  for (auto f : {"plus.flk", "length.flk", "merge.flk", "zip.flk", "fig1.flk",
                 "geq.flk", "por.flk", "predicates.flk", "sublists.flk",
                 "nqueens.flk", "empty.flk"}) {
    CAPTURE(f);
    Program p = load(f);
    std::string text = print_program(p);
    ParseResult r = parse_program(text);
    CAPTURE(text);
    REQUIRE(r.ok());
    CHECK(program_equal(p, *r.program));
    CHECK(print_program(*r.program) == text);
  }
}

TEST_CASE("json dump has stable fields") {
  Program p = load("plus.flk");
  std::string j = program_to_json(p);
  CHECK(j.find("\"functions\"") != std::string::npos);
  CHECK(j.find("\"ctor\": \"Succ\"") != std::string::npos);
}

TEST_CASE("normalize splits, desugars guards and flattens") {
  Program p = load("plus.flk");
  Program n = normalize(p);
  const FunctionDef* f = n.find_fn("plus");
  REQUIRE(f);
  CHECK(f->join_of == std::vector<std::string>{"plus.1", "plus.2"});
  REQUIRE(n.find_fn("plus.1"));
  REQUIRE(n.find_fn("plus.2"));
  CHECK(print_expr(n, n.find_fn("plus.2")->rules[0].rhs) == "Succ (plus n m)");

  Program m = normalize(load("merge.flk"));
  REQUIRE(m.find_fn("cond"));
  CHECK(print_expr(m, m.find_fn("merge.3")->rules[0].rhs) ==
        "cond (x <= y) (merge.3.2 x xs y ys)");
  REQUIRE(m.find_fn("merge.3.2"));
  CHECK(print_expr(m, m.find_fn("merge.3.2")->rules[0].rhs) ==
        "x : (merge xs (y : ys))");

  Program q = normalize(load("nqueens.flk"));
  // Nested calls beyond one level become auxiliary functions.
  CHECK(q.find_fn("noattack.2.1") != nullptr);
}

TEST_CASE("normalize is idempotent") {
  for (auto f : {"plus.flk", "merge.flk", "nqueens.flk", "zip.flk", "fig1.flk"}) {
    CAPTURE(f);
    Program a = normalize(load(f));
    Program b = normalize(a);
    CHECK(a.fn_order == b.fn_order);
    for (auto& name : a.fn_order) {
      const FunctionDef& fa = a.fns.at(name);
      const FunctionDef& fb = b.fns.at(name);
      REQUIRE(fa.rules.size() == fb.rules.size());
      for (size_t i = 0; i < fa.rules.size(); ++i)
        CHECK(print_rule(a, fa.rules[i]) == print_rule(b, fb.rules[i]));
    }
  }
}

TEST_CASE("goal expressions") {
  Program p = load("fig1.flk");
  GoalExpr g = parse_expr(p, "f (not True) (not y)");
  CHECK(g.vars == std::vector<std::string>{"y"});
  CHECK(to_string(g.var_types.at("y")) == "Bool");
  CHECK(to_string(g.type) == "Bool");
}
