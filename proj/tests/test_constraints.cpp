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

#include <fstream>
#include <sstream>

#include "common.hpp"
#include "demand/constraints.hpp"
#include "doctest.h"

using namespace demand;
using demand::testing::load;

namespace {

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(DEMAND_GOLDEN_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

bool contains(const std::vector<std::string>& ls, const std::string& l) {
  return std::find(ls.begin(), ls.end(), l) != ls.end();
}

ConstraintSystem generate(DemandContext& ctx, const std::string& pred, const std::string& fn) {
  return gen_system(ctx, {{ctx.intern_pred(parse_pred(ctx.program(), pred)), fn}});
}

}  // namespace

TEST_CASE("plus weakened system matches golden") {
  DemandContext ctx(load("plus.flk"));
  auto s = weaken(simplify(generate(ctx, "nf@Nat", "plus")));
  CHECK(dump(s) == read_golden("plus_nf_weakened.txt"));
  CHECK(is_codefinite(s));
}

// Lines of the published figure that are not co-definite appear in
// projected form; everything else is identical.
TEST_CASE("figure lines map onto weakened lines") {
  struct Row {
    const char* figure;
    std::vector<const char*> ours;
  };
  std::vector<Row> table = {
      {"Succ(nf_plus.2.1) <= nf", {"nf@Nat_plus.2.1 <= Succ^-1_1(nf@Nat)"}},
      {"(nf_plus.2.1.1.1, nf_plus.2.1.1.2) <= nf.plus",
       {"nf@Nat_plus.2.1.1.1 <= (,)^-1_1(nf@Nat•plus)",
        "nf@Nat_plus.2.1.1.2 <= (,)^-1_2(nf@Nat•plus)"}},
  };
  DemandContext ctx(load("plus.flk"));
  auto simp = lines(dump(simplify(generate(ctx, "nf@Nat", "plus"))));
  auto weak = lines(dump(weaken(simplify(generate(ctx, "nf@Nat", "plus")))));
  CHECK(contains(simp, "Succ(nf@Nat_plus.2.1) <= nf@Nat"));
  CHECK(contains(simp, "(nf@Nat_plus.2.1.1.1, nf@Nat_plus.2.1.1.2) <= nf@Nat•plus"));
  for (auto& r : table) {
    CAPTURE(r.figure);
    for (auto l : r.ours) CHECK(contains(weak, l));
  }
  CHECK(simp.size() + 1 == weak.size());
}

TEST_CASE("generation is deterministic") {
  for (auto [file, pred, fn] : {std::tuple{"plus.flk", "nf@Nat", "plus"},
                                std::tuple{"merge.flk", "nf@[Nat]", "merge"},
                                std::tuple{"length.flk", "nf@Nat", "length"}}) {
    DemandContext a(load(file)), b(load(file));
    auto sa = generate(a, pred, fn), sb = generate(b, pred, fn);
    CHECK(dump(sa) == dump(sb));
    CHECK(dump_json(sa) == dump_json(sb));
    CHECK(dump(weaken(simplify(sa))) == dump(weaken(simplify(sb))));
  }
}

TEST_CASE("identity body is a variable") {
  DemandContext ctx(parse_program_or_throw("data Nat = Zero | Succ Nat\nf :: Nat -> Nat\nf x = x\n"));
  auto g = lines(dump(generate(ctx, "nf@Nat", "f")));
  CHECK(contains(g, "nf@Nat•f <= nf@Nat•f.1"));
  CHECK(contains(g, "nf@Nat•f.1 <= (nf@Nat•f.1.1)"));
  CHECK(contains(g, "nf@Nat•f.1.1 <= nf@Nat"));
}

TEST_CASE("constant body gives a check constraint") {
  DemandContext ctx(parse_program_or_throw("data Nat = Zero | Succ Nat\ntwo :: Nat\ntwo = Succ (Succ Zero)\n"));
  auto s = generate(ctx, "nf@Nat", "two");
  CHECK(contains(lines(dump(s)), "Succ(Succ(Zero)) <= nf@Nat"));
  auto w = weaken(simplify(s));
  CHECK(contains(lines(dump(w)), "Succ(Succ(Zero)) <= nf@Nat"));
  CHECK(is_codefinite(w));
}

TEST_CASE("constant body outside the predicate empties the rule") {
  DemandContext ctx(parse_program_or_throw("data Nat = Zero | Succ Nat\nz :: Nat\nz = Zero\n"));
  auto s = generate(ctx, "is@Succ", "z");
  CHECK(contains(lines(dump(s)), "is@Succ•z.1 <= {}"));
}

TEST_CASE("delta follows the pattern") {
  DemandContext ctx(load("plus.flk"));
  int nf = ctx.intern_pred(parse_pred(ctx.program(), "nf@Nat"));
  CHECK(to_string(ctx, delta(ctx, nf, "plus", 1, {1}, mk_ctor("Zero"))) == "Zero");
  CHECK(to_string(ctx, delta(ctx, nf, "plus", 2, {1}, mk_ctor("Succ", {mk_var("n")}))) ==
        "Succ(nf@Nat•plus.2.1.1)");
  CHECK(to_string(ctx, delta(ctx, nf, "f", 1, {}, mk_var("x"))) == "nf@Nat•f.1");
}

TEST_CASE("simplify collapses chains and drops reflexive constraints") {
  DemandContext ctx(load("plus.flk"));
  int nf = ctx.intern_pred(parse_pred(ctx.program(), "nf@Nat"));
  DemandVar a{DemandVar::Kind::PFPos, nf, "f", 1, {1}};
  DemandVar b{DemandVar::Kind::PUnderscore, nf, "f", 1, {1}};
  int va = ctx.var(a), vb = ctx.var(b);
  ConstraintSystem s;
  s.ctx = &ctx;
  s.cs = {{se_var(va), se_var(vb), "t", ""}, {se_var(vb), se_ctor("Zero"), "t", ""},
          {se_var(va), se_var(va), "t", ""}};
  CHECK(dump(simplify(s)) == "nf@Nat•f.1.1 <= Zero\n");
}

TEST_CASE("weakening projects tuples and is idempotent") {
  DemandContext ctx(load("zip.flk"));
  auto s = weaken(simplify(generate(ctx, "nf@[Bool]", "zip")));
  CHECK(is_codefinite(s));
  CHECK(dump(weaken(s)) == dump(s));

  DemandContext c2(load("plus.flk"));
  int nf = c2.intern_pred(parse_pred(c2.program(), "nf@Nat"));
  int xs = c2.var({DemandVar::Kind::PFPos, nf, "f", 1, {1}});
  int ys = c2.var({DemandVar::Kind::PFPos, nf, "f", 1, {2}});
  int v = c2.pf(nf, "f");
  ConstraintSystem t;
  t.ctx = &c2;
  t.cs = {{se_ctor("(,)", {se_var(xs), se_var(ys)}), se_var(v), "t", ""}};
  CHECK(dump(weaken(t)) ==
        "nf@Nat•f.1.1 <= (,)^-1_1(nf@Nat•f)\nnf@Nat•f.1.2 <= (,)^-1_2(nf@Nat•f)\n");
}

TEST_CASE("unresolved nested demand weakens to any") {
  DemandContext ctx(parse_program_or_throw(
      "data Nat = Zero | Succ Nat\n"
      "g :: Nat -> Nat\ng x = x\n"
      "h :: Nat -> Nat\nh x = Succ x\n"
      "f :: Nat -> Nat\nf x = g (h x)\n"));
  auto s = weaken(simplify(generate(ctx, "nf@Nat", "f")));
  auto ls = lines(dump(s));
  CHECK(contains(ls, "nf@Nat•f.1.1 <= any•h"));
  CHECK(is_codefinite(s));
}

TEST_CASE("guards demand truth of the condition") {
  DemandContext ctx(load("merge.flk"));
  auto s = weaken(simplify(generate(ctx, "nf@[Nat]", "merge")));
  bool found = false;
  for (auto& [p, f] : s.pairs)
    if (ctx.pred(p).name == "is@True" && f == "<=") found = true;
  CHECK(found);
  CHECK(is_codefinite(s));
}

TEST_CASE("unregistered predicates are rejected") {
  DemandContext ctx(load("plus.flk"));
  CHECK_THROWS_AS(gen_system(ctx, {{42, "plus"}}), UnregisteredPredicate);
  CHECK_THROWS_AS(ctx.intern_pred(pp_user("nosuch")), UnregisteredPredicate);
}
