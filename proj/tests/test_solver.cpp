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

#include <random>

#include "doctest.h"
#include "grammar_check.hpp"
#include "common.hpp"
#include "demand/solver.hpp"

using namespace demand;

namespace {

struct NatGrammars {
  Grammar g;
  int hnf, nf;
  NatGrammars() {
    nf = g.add_nt("nf");
    g.add_prod(nf, "Zero", {});
    g.add_prod(nf, "Succ", {nf});
    hnf = g.add_nt("hnf");
    g.add_prod(hnf, "Zero", {});
    g.add_prod(hnf, "Succ", {Grammar::kAny});
  }
};

PTermPtr succ(PTermPtr t) { return PTerm::node("Succ", {t}); }

}  // namespace

TEST_CASE("membership in hnf and nf grammars") {
  NatGrammars n;
  CHECK(n.g.member(n.hnf, succ(PTerm::bottom())));
  CHECK_FALSE(n.g.member(n.hnf, PTerm::bottom()));
  CHECK_FALSE(n.g.member(n.nf, succ(PTerm::bottom())));
  CHECK(n.g.member(n.nf, succ(PTerm::node("Zero"))));
  CHECK(n.g.member(Grammar::kAny, PTerm::bottom()));
  CHECK_FALSE(n.g.member(Grammar::kNothing, PTerm::node("Zero")));
}

TEST_CASE("lattice identities") {
  NatGrammars n;
  CHECK(n.g.intersect(Grammar::kAny, n.nf) == n.nf);
  CHECK(n.g.intersect(Grammar::kNothing, n.nf) == Grammar::kNothing);
  CHECK(n.g.equivalent(n.g.unite(n.nf, n.hnf), n.hnf));
  CHECK(n.g.equivalent(n.g.intersect(n.nf, n.hnf), n.nf));
}

TEST_CASE("inverse projection") {
  NatGrammars n;
  CHECK(n.g.equivalent(n.g.inv_proj("Succ", 1, n.nf), n.nf));
  CHECK(n.g.inv_proj("Succ", 1, n.hnf) == Grammar::kAny);
  CHECK_FALSE(n.g.is_empty(n.g.inv_proj("Succ", 1, n.nf)));
}

TEST_CASE("inclusion with witness") {
  NatGrammars n;
  CHECK(n.g.included(n.nf, n.hnf).holds);
  InclusionResult r = n.g.included(n.hnf, n.nf);
  REQUIRE_FALSE(r.holds);
  CHECK(to_string(r.witness) == "Succ _|_");
  CHECK(n.g.included(n.nf, n.nf).holds);
  CHECK(n.g.included(Grammar::kNothing, n.nf).holds);
  CHECK_FALSE(n.g.included(Grammar::kAny, n.hnf).holds);
}

TEST_CASE("dump format") {
  NatGrammars n;
  CHECK(n.g.dump(n.nf) == "N0 -> Zero | Succ(N0)\n");
  CHECK(n.g.dump(n.hnf) == "N0 -> Zero | Succ(Any)\n");
  int m = n.g.mutate(n.nf, n.nf, 0);
  CHECK(n.g.dump(m) == "N0 -> Succ(N0)\n");
  CHECK(n.g.is_empty(m));
  CHECK(n.g.minimize(m) == Grammar::kNothing);
}

TEST_CASE("random grammars agree with explicit sets") {
  std::mt19937 rng(7);
  int bad = 0;
  for (int i = 0; i < 120; ++i)
    bad += demand::testing::check_random_grammar(rng, i % 2 == 1, [](const std::string& s) {
      MESSAGE(s);
    });
  CHECK(bad == 0);
}

namespace {

struct PlusSystem {
  DemandContext ctx{demand::testing::load("plus.flk")};
  int nf = ctx.intern_pred(parse_pred(ctx.program(), "nf@Nat"));
  ConstraintSystem sys = weaken(simplify(gen_system(ctx, {{nf, "plus"}})));
};

}  // namespace

TEST_CASE("plus solution contains every argument the oracle accepts") {
  PlusSystem p;
  SolveResult r = solve_greatest(p.sys);
  REQUIRE(r.ok());
  CHECK_FALSE(verify_solution(p.sys, *r.valuation));
  int root = r.valuation->of(p.ctx.pf(p.nf, "plus"));
  Grammar& g = p.ctx.grammar();
  PredContext pc(p.ctx.source());
  Enumerator en(p.ctx.source());
  PredPtr nf = parse_pred(p.ctx.source(), "nf@Nat");
  int accepted = 0, extra = 0;
  for (auto& t : en.arg_tuples(*p.ctx.source().find_fn("plus"), 4)) {
    bool oracle = pc.apply_composed(nf, "plus", t);
    bool solved = g.member(root, t);
    if (oracle) {
      ++accepted;
      CHECK(solved);
    } else if (solved) {
      ++extra;
    }
  }
  CHECK(accepted > 0);
  // The main rule constraint forgets that m must be normal in the second
  // rule, so partial second components are admitted there.
  CHECK(extra > 0);
  CHECK(g.member(root, parse_pterm(p.ctx.source(), "(Succ Zero, _|_)")));
  CHECK_FALSE(g.member(root, parse_pterm(p.ctx.source(), "(Zero, _|_)")));
  CHECK(g.equivalent(r.valuation->of(p.ctx.var({DemandVar::Kind::PFPos, p.nf, "plus", 1, {1}})),
                     g.minimize(interpret(p.ctx, se_ctor("Zero"), {}))));
}

TEST_CASE("empty system has an empty valuation") {
  PlusSystem p;
  ConstraintSystem s;
  s.ctx = &p.ctx;
  SolveResult r = solve_greatest(s);
  REQUIRE(r.ok());
  CHECK(r.valuation->empty());
}

TEST_CASE("contradictory bounds are unsatisfiable") {
  PlusSystem p;
  int x = p.ctx.var({DemandVar::Kind::PFPos, p.nf, "f", 1, {1}});
  ConstraintSystem s;
  s.ctx = &p.ctx;
  s.cs = {{se_var(x), se_ctor("Zero"), "t", ""},
          {se_ctor("Succ", {se_ctor("Zero")}), se_var(x), "t", ""}};
  SolveResult r = solve_greatest(s);
  REQUIRE_FALSE(r.ok());
  CHECK(to_string(r.unsat->witness) == "Succ Zero");
}

TEST_CASE("unguarded projection cycles reach the greatest fixpoint") {
  // v <= Succ^-1_1(v) /\ {Zero, Succ Zero} only has the empty solution.
  PlusSystem p;
  Grammar& g = p.ctx.grammar();
  int small = g.add_nt();
  g.add_prod(small, "Zero", {});
  int z = g.add_nt();
  g.add_prod(z, "Zero", {});
  g.add_prod(small, "Succ", {z});
  int lp = p.ctx.intern_language(small, "small");
  int v = p.ctx.var({DemandVar::Kind::PFPos, p.nf, "f", 1, {1}});
  ConstraintSystem s;
  s.ctx = &p.ctx;
  s.cs = {{se_var(v), se_inv("Succ", 1, se_var(v)), "t", ""}, {se_var(v), se_pred(lp), "t", ""}};
  SolveResult r = solve_greatest(s);
  REQUIRE(r.ok());
  CHECK(g.is_empty(r.valuation->of(v)));
  CHECK_FALSE(verify_solution(s, *r.valuation));
}

TEST_CASE("enlarging any solved variable breaks a constraint") {
  PlusSystem p;
  SolveResult r = solve_greatest(p.sys);
  REQUIRE(r.ok());
  Grammar& g = p.ctx.grammar();
  int tried = 0;
  for (auto [v, nt] : r.valuation->nt) {
    if (g.is_any(nt)) continue;
    int root = g.minimize(nt);
    if (root == Grammar::kNothing) continue;
    for (int n : g.reachable(root)) {
      for (size_t c = 0; c < g.sig().size(); ++c) {
        const CtorSymbol& sym = g.sig().at(static_cast<int>(c));
        if (sym.name == "<other>") continue;
        int bigger = g.extend(root, n, static_cast<int>(c), std::vector<int>(sym.arity, Grammar::kAny));
        if (g.included(bigger, root).holds) continue;
        Valuation w = *r.valuation;
        w.nt[v] = bigger;
        ++tried;
        CAPTURE(p.ctx.var_name(v));
        CAPTURE(g.dump(bigger));
        CHECK(verify_solution(p.sys, w).has_value());
      }
    }
  }
  CHECK(tried > 10);
}
