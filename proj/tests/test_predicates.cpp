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
#include "demand/predicates.hpp"
#include <set>

#include "doctest.h"

using namespace demand;
using demand::testing::load;

namespace {

TypePtr nat() { return Type::con("Nat"); }
TypePtr nat_list() { return Type::list(nat()); }

}  // namespace

TEST_CASE("syntax round trip") {
  Program p = load("predicates.flk");
  for (auto s : {"any", "nothing", "hnf@Nat", "nf@[Nat]", "spine", "is@Zero", "Succ(nf@Nat)",
                 "(hnf@Nat /\\ nf@Nat)", "(is@Nil \\/ is@Cons)", "(hnf@Nat x any)",
                 "prj1@Tup2((hnf@Nat x nf@Nat))", "user:nfNat", "fold@c2@True", "fold@c0@bot",
                 "Cons(any, spine)", "Nil", "hnf@[]"}) {
    CAPTURE(s);
    CHECK(pred_name(parse_pred(p, s)) == s);
  }
  CHECK_THROWS_AS(parse_pred(p, "hnf@Tree"), PredError);
  CHECK_THROWS_AS(parse_pred(p, "nf@[a]"), PredError);
  CHECK_THROWS_AS(parse_pred(p, "prj3@Tup2(any)"), PredError);
  CHECK_THROWS_AS(parse_pred(p, "Succ(any, any)"), PredError);
}

TEST_CASE("constructor transformers") {
  Program p = load("predicates.flk");
  PredContext ctx(p);
  auto t = [&](const std::string& s) { return parse_pterm(p, s); };
  CHECK(ctx.apply(parse_pred(p, "Cons(any, spine)"), t("[bot]"), nat_list()));
  CHECK_FALSE(ctx.apply(parse_pred(p, "Succ(nf@Nat)"), t("Zero")));
  CHECK_FALSE(ctx.apply(parse_pred(p, "Zero"), t("bot")));
  CHECK(ctx.apply(parse_pred(p, "Zero"), t("Zero")));
}

TEST_CASE("matching, hnf and nf predicates") {
  Program p = load("predicates.flk");
  PredContext ctx(p);
  auto t = [&](const std::string& s) { return parse_pterm(p, s); };
  CHECK(ctx.apply(pp_hnf("Nat"), t("Succ bot")));
  CHECK_FALSE(ctx.apply(pp_hnf("Nat"), t("bot")));
  CHECK(ctx.apply(hnf_as_join(p, "Nat"), t("Succ bot")));
  CHECK_FALSE(ctx.apply(pp_nf(nat()), t("Succ bot")));
  CHECK_FALSE(ctx.apply(pp_hnf("[]"), t("bot"), nat_list()));
  CHECK_FALSE(ctx.apply(pp_nf(nat_list()), t("[bot]")));
  CHECK(ctx.apply(pp_nf(nat_list()), t("[Zero]")));
  CHECK(ctx.apply(pp_any(), t("bot")));
  CHECK_FALSE(ctx.apply(pp_nothing(), t("Zero")));
  // Kernel definitions of the corpus agree with the combinators.
  for (auto& x : enumerate_partial_terms(p, nat(), 4)) {
    CHECK(ctx.apply(pp_user("hnfNat"), x) == ctx.apply(pp_hnf("Nat"), x));
    CHECK(ctx.apply(pp_user("nfNat"), x) == ctx.apply(pp_nf(nat()), x));
  }
  for (auto& x : enumerate_partial_terms(p, nat_list(), 3)) {
    CHECK(ctx.apply(pp_user("spine"), x) == ctx.apply(pp_spine(), x, nat_list()));
    CHECK(ctx.apply(pp_user("nfListNat"), x) == ctx.apply(pp_nf(nat_list()), x));
  }
}

TEST_CASE("hnf is undefined exactly on bottom") {
  Program p = load("zip.flk");
  PredContext ctx(p);
  for (auto& d : p.data) {
    if (!d.params.empty() && d.name != "[]") continue;
    TypePtr t = d.name == "[]" ? Type::list(Type::con("Bool")) : Type::con(d.name);
    for (auto& x : enumerate_partial_terms(p, t, 3)) {
      CAPTURE(to_string(x));
      CHECK(ctx.apply(pp_hnf(d.name), x, t) == !x->bot);
    }
  }
}

TEST_CASE("meets, joins and products") {
  Program p = load("predicates.flk");
  PredContext ctx(p);
  auto t = [&](const std::string& s) { return parse_pterm(p, s); };
  PredPtr hx = pp_product({pp_hnf("Nat"), pp_any()});
  CHECK_FALSE(ctx.apply(hx, t("(bot, Zero)")));
  CHECK(ctx.apply(hx, t("(Succ bot, bot)")));
  std::vector<PredPtr> ps{pp_any(), pp_nothing(), pp_hnf("Nat"), pp_nf(nat()), pp_is("Zero")};
  for (auto& a : ps) {
    CHECK(pred_equal_on_slice(ctx, pp_meet(a, pp_any()), a, nat(), 3));
    CHECK(pred_equal_on_slice(ctx, pp_join(a, pp_nothing()), a, nat(), 3));
    CHECK(pred_equal_on_slice(ctx, pp_meet(a, a), a, nat(), 3));
    for (auto& b : ps) {
      CHECK(pred_equal_on_slice(ctx, pp_meet(a, b), pp_meet(b, a), nat(), 3));
      CHECK(pred_equal_on_slice(ctx, pp_join(a, b), pp_join(b, a), nat(), 3));
      for (auto& c : ps)
        CHECK(pred_equal_on_slice(ctx, pp_meet(pp_meet(a, b), c), pp_meet(a, pp_meet(b, c)),
                                  nat(), 2));
    }
  }
  CHECK(pred_equal_on_slice(ctx, pp_join(pp_is("[]"), pp_is(":")), pp_hnf("[]"), nat_list(), 3));
  auto w = pred_not_leq(ctx, pp_hnf("Nat"), pp_nf(nat()), nat(), 3);
  REQUIRE(w);
  CHECK(ctx.apply(pp_hnf("Nat"), *w));
  CHECK_FALSE(ctx.apply(pp_nf(nat()), *w));
}

TEST_CASE("projections search the hidden component") {
  Program p = load("zip.flk");
  Program q = load("predicates.flk");
  PredContext cq(q);
  PredPtr pr = pp_proj("(,)", 1, pp_product({pp_hnf("Nat"), pp_nf(nat())}));
  CHECK(cq.apply(pr, parse_pterm(q, "Succ bot")));
  CHECK_FALSE(cq.apply(pr, parse_pterm(q, "bot")));
  CHECK_FALSE(cq.apply(pp_proj("(,)", 1, pp_nothing()), parse_pterm(q, "Zero"), nat()));
  EvalOptions o;
  o.search_depth = 3;
  PredContext cp(p, o);
  PredPtr p2 = pp_proj("(,)", 2, pp_user("samelength"));
  TypePtr bl = Type::list(Type::con("Bool"));
  CHECK(cp.apply(p2, parse_pterm(p, "bot : []"), bl));
  CHECK_FALSE(cp.apply(p2, parse_pterm(p, "bot : bot"), bl));
}

TEST_CASE("compiled kernel definitions") {
  Program p = load("predicates.flk");
  PredContext ctx(p);
  std::string h = ctx.compile(pp_hnf("Nat"));
  CHECK(ctx.program().find_fn(h)->rules.size() == 2);
  std::string a = ctx.compile(pp_any());
  CHECK(print_rule(ctx.program(), ctx.program().find_fn(a)->rules[0]).find("True") !=
        std::string::npos);
  CHECK(ctx.compile(pp_hnf("Nat")) == h);
  // nf after length is spine.
  Program l = load("length.flk");
  PredContext cl(l);
  for (auto& x : enumerate_partial_terms(l, Type::list(Type::con("Bool")), 4))
    CHECK(cl.apply_composed(pp_nf(Type::con("Nat")), "length", x) ==
          cl.apply(pp_spine(), x, Type::list(Type::con("Bool"))));
}

TEST_CASE("monotonicity on the slice") {
  Program p = load("predicates.flk");
  PredContext ctx(p);
  auto slice = enumerate_partial_terms(p, nat_list(), 3);
  for (auto& pr : {pp_hnf("[]"), pp_spine(), pp_nf(nat_list()), pp_fold(5, true), pp_fold(1, false)}) {
    std::vector<bool> v;
    for (auto& t : slice) v.push_back(ctx.apply(pr, t, nat_list()));
    for (size_t i = 0; i < slice.size(); ++i)
      for (size_t j = 0; j < slice.size(); ++j)
        if (v[i] && pterm_leq(slice[i], slice[j])) CHECK(v[j]);
  }
}

TEST_CASE("four point domain nesting") {
  Program p = load("predicates.flk");
  PredContext ctx(p);
  auto undef = [&](const PredPtr& pr) {
    std::set<std::string> s;
    for (auto& t : enumerate_partial_terms(p, nat_list(), 4))
      if (!ctx.apply(pr, t, nat_list())) s.insert(to_string(t));
    return s;
  };
  auto a = undef(pp_hnf("[]")), b = undef(pp_spine()), c = undef(pp_nf(nat_list()));
  CHECK(a.size() < b.size());
  CHECK(b.size() < c.size());
  CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  CHECK(std::includes(c.begin(), c.end(), b.begin(), b.end()));
}

TEST_CASE("uniform fold lattice") {
  Program p = load("predicates.flk");
  PredContext ctx(p);
  auto classes = fold_domain(ctx, 4);
  CHECK(classes.size() == 11);
  auto same = [&](const std::string& a, const std::string& b) {
    for (auto& c : classes) {
      bool ha = false, hb = false;
      for (auto& m : c.members) {
        ha |= pred_name(m) == a;
        hb |= pred_name(m) == b;
      }
      if (ha || hb) return ha && hb;
    }
    return false;
  };
  CHECK(same("fold@c2@bot", "fold@c4@bot"));
  CHECK(same("fold@c0@bot", "fold@c4@bot"));
  CHECK_FALSE(same("fold@c3@True", "any"));
  TypePtr lt = nat_list();
  CHECK(pred_equal_on_slice(ctx, pp_fold(2, true), pp_nf(lt), lt, 4));
  CHECK(pred_equal_on_slice(ctx, pp_fold(4, true), pp_spine(), lt, 4));
  CHECK_FALSE(ctx.apply(pp_fold(3, true), PTerm::bottom(), lt));
  CHECK(ctx.apply(pp_fold(3, true), PTerm::node("[]"), lt));
}

TEST_CASE("bounded refutation") {
  Program p = load("length.flk");
  Program q = load("predicates.flk");
  CHECK_FALSE(refute_typing(p, "length", pp_hnf("[]"), pp_hnf("Nat"), 3, 200));
  auto w = refute_typing(p, "length", pp_nf(Type::list(Type::con("Nat"))),
                         pp_nf(Type::con("Nat")), 3, 200);
  REQUIRE(w);
  CHECK(to_string(*w) == "[_|_]");
  Program id = parse_program_or_throw("data Nat = Zero | Succ Nat\nid x = x");
  auto w2 = refute_typing(id, "id", pp_nothing(), pp_any(), 3, 200);
  REQUIRE(w2);
  CHECK(to_string(*w2) == "_|_");
}

TEST_CASE("grammars of predicates agree with kernel definitions") {
  Program p = load("predicates.flk");
  PredContext ctx(p);
  Grammar g;
  TypePtr lt = nat_list();
  std::vector<PredPtr> ps{pp_any(), pp_nothing(), pp_hnf("[]"), pp_spine(), pp_nf(lt),
                          pp_is(":"), parse_pred(p, "Cons(nf@Nat, spine)"),
                          parse_pred(p, "(spine /\\ Cons(hnf@Nat, any))"),
                          parse_pred(p, "(is@Nil \\/ Cons(nf@Nat, any))"),
                          parse_pred(p, "prj2@Cons(Cons(nf@Nat, nf@[Nat]))")};
  for (int c = 0; c <= 5; ++c)
    for (bool b : {false, true}) ps.push_back(pp_fold(c, b));
  auto slice = enumerate_partial_terms(p, lt, 4);
  for (auto& pr : ps) {
    CAPTURE(pred_name(pr));
    int x = pred_grammar(g, p, pr, lt);
    for (auto& t : slice) {
      CAPTURE(to_string(t));
      CHECK(g.member(x, t) == ctx.apply(pr, t, lt));
    }
  }
}
