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

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "demand/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace demand;

namespace {

struct Run {
  int code;
  std::string out, err;
};

std::string corpus(const std::string& f) { return std::string(DEMAND_CORPUS_DIR) + "/" + f; }

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "demandlyzer");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

using nlohmann::json;

// Subset of JSON Schema used by the shipped schemas: type, required,
// properties, items, enum and local $ref.
bool conforms(const json& v, const json& s, const json& root, std::string& why, const std::string& at = "$") {
  if (s.contains("$ref")) {
    std::string ref = s["$ref"];
    return conforms(v, root["$defs"][ref.substr(ref.rfind('/') + 1)], root, why, at);
  }
  if (s.contains("type")) {
    std::string t = s["type"];
    bool ok = (t == "object" && v.is_object()) || (t == "array" && v.is_array()) ||
              (t == "string" && v.is_string()) || (t == "boolean" && v.is_boolean()) ||
              (t == "integer" && v.is_number_integer()) || (t == "number" && v.is_number());
    if (!ok) {
      why = at + ": expected " + t;
      return false;
    }
  }
  if (s.contains("enum") && std::find(s["enum"].begin(), s["enum"].end(), v) == s["enum"].end()) {
    why = at + ": not in enum";
    return false;
  }
  if (s.contains("required"))
    for (auto& k : s["required"])
      if (!v.contains(k.get<std::string>())) {
        why = at + ": missing " + k.get<std::string>();
        return false;
      }
  if (s.contains("properties") && v.is_object())
    for (auto& [k, sub] : s["properties"].items())
      if (v.contains(k) && !conforms(v[k], sub, root, why, at + "." + k)) return false;
  if (s.contains("items") && v.is_array())
    for (size_t i = 0; i < v.size(); ++i)
      if (!conforms(v[i], s["items"], root, why, at + "[" + std::to_string(i) + "]")) return false;
  return true;
}

std::string validate(const std::string& name, const std::string& out) {
  std::ifstream in(std::string(DEMAND_SCHEMA_DIR) + "/" + name + ".schema.json");
  if (!in) return "no schema " + name;
  json schema = json::parse(in);
  std::string why;
  return conforms(json::parse(out), schema, schema, why) ? "" : why;
}

std::string golden(const std::string& name) {
  std::ifstream in(std::string(DEMAND_GOLDEN_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("check on an empty program") {
  Run r = cli({"check", corpus("empty.flk"), "--format", "json"});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["diagnostics"].empty());
}

TEST_CASE("weakened constraints of plus through the cli match the golden dump") {
  Run a = cli({"constraints", corpus("plus.flk"), "--func", "plus", "--pred", "nf@Nat", "--stage", "weakened"});
  Run b = cli({"constraints", corpus("plus.flk"), "--func", "plus", "--pred", "nf@Nat", "--stage", "weakened"});
  CHECK(a.code == 0);
  CHECK(a.out == golden("plus_nf_weakened.txt"));
  CHECK(a.out == b.out);
  Run raw = cli({"constraints", corpus("plus.flk"), "--func", "plus", "--pred", "nf@Nat", "--stage", "raw"});
  CHECK(raw.out != a.out);
  Run j = cli({"constraints", corpus("plus.flk"), "--func", "plus", "--pred", "nf@Nat", "--format", "json"});
  CHECK(nlohmann::json::parse(j.out)["constraints"].size() == 10);
}

TEST_CASE("infer reports one pattern per argument") {
  Run r = cli({"infer", corpus("plus.flk"), "--func", "plus", "--pred", "nf@Nat", "--format", "json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["function"] == "plus");
  CHECK(j["args"].size() == 2);
  CHECK(j["args"][0] == "nf@Nat");
  Run t = cli({"infer", corpus("plus.flk"), "--func", "plus", "--pred", "nf@Nat"});
  CHECK(t.out.rfind("plus : (nf@Nat x any) <= nf@Nat\n", 0) == 0);
}

TEST_CASE("verify exit codes follow the verdict") {
  CHECK(cli({"verify", corpus("length.flk"), "--func", "length", "--pi1", "spine", "--pi2", "nf@Nat"}).code == 0);
  Run r = cli({"verify", corpus("length.flk"), "--func", "length", "--pi1", "nf@[Nat]", "--pi2", "nf@Nat",
               "--format", "json"});
  CHECK(r.code == 1);
  CHECK(nlohmann::json::parse(r.out)["counterexample"] == "[_|_]");
}

TEST_CASE("soundness, solve, dtree, eval, bench and oracle") {
  Run s = cli({"soundness", corpus("plus.flk"), "--format", "json"});
  CHECK(s.code == 0);
  CHECK(nlohmann::json::parse(s.out)["violations"].empty());
  Run s2 = cli({"soundness", corpus("length.flk"), "--func", "length", "--seed-preds", "hnf@Nat,nf@Nat"});
  CHECK(s2.code == 0);
  CHECK(s2.out.find("violations 0") != std::string::npos);

  Run sv = cli({"solve", corpus("plus.flk"), "--func", "plus", "--pred", "nf@Nat", "--format", "json"});
  CHECK(sv.code == 0);
  CHECK(nlohmann::json::parse(sv.out)["variables"].contains("nf@Nat•plus"));

  Run d = cli({"dtree", corpus("merge.flk"), "--func", "merge", "--with-demand", "--format", "json"});
  CHECK(d.code == 0);
  CHECK(nlohmann::json::parse(d.out)[0]["inductively_sequential"] == true);
  Run d2 = cli({"dtree", corpus("merge.flk"), "--func", "merge"});
  CHECK(d2.out.find("or merge") != std::string::npos);

  Run e = cli({"eval", corpus("fig1.flk"), "--goal", "f (not True) (not y)", "--strategy", "lazy"});
  CHECK(e.code == 0);
  CHECK(e.out.find("reevaluations 1") != std::string::npos);

  Run b = cli({"bench", corpus("nqueens.flk"), "--suite", "nqueens", "--sizes", "4", "--format", "json"});
  CHECK(b.code == 0);
  CHECK(nlohmann::json::parse(b.out)[0]["demand"]["answers"] == 2);

  Run o = cli({"oracle", corpus("plus.flk"), "--func", "plus", "--args", "(Succ Zero, _|_)", "--pred", "hnf@Nat"});
  CHECK(o.code == 0);
  CHECK(o.out == "plus (Succ Zero, _|_) = Succ _|_\nhnf@Nat : True\n");
}

TEST_CASE("usage and file errors") {
  CHECK(cli({}).code == 64);
  CHECK(cli({"infer", corpus("plus.flk"), "--bogus"}).code == 64);
  CHECK(cli({"infer", corpus("plus.flk"), "--pred", "nf@Nat"}).code == 64);
  CHECK(cli({"infer", corpus("plus.flk"), "--func", "plus", "--pred", "nf@@"}).code == 64);
  CHECK(cli({"constraints", corpus("plus.flk"), "--func", "plus", "--pred", "nf@Nat", "--stage", "x"}).code == 64);
  CHECK(cli({"check", "/nonexistent/x.flk"}).code == 66);
}

TEST_CASE("installed binary") {
  std::string cmd = std::string(DEMANDLYZER_BIN) + " check " + corpus("plus.flk") + " > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  std::string bad = std::string(DEMANDLYZER_BIN) + " check /nonexistent/x.flk 2> /dev/null";
  int st = std::system(bad.c_str());
  CHECK(WEXITSTATUS(st) == 66);
}

TEST_CASE("json outputs conform to the shipped schemas") {
  std::string plus = corpus("plus.flk");
  struct Case {
    const char* schema;
    std::vector<std::string> args;
  };
  std::vector<Case> cases = {
      {"check", {"check", plus}},
      {"check", {"check", corpus("empty.flk")}},
      {"constraints", {"constraints", plus, "--func", "plus", "--pred", "nf@Nat", "--stage", "raw"}},
      {"solve", {"solve", plus, "--func", "plus", "--pred", "nf@Nat"}},
      {"infer", {"infer", plus, "--func", "plus", "--pred", "nf@Nat"}},
      {"verify", {"verify", corpus("length.flk"), "--func", "length", "--pi1", "nf@[Nat]", "--pi2", "nf@Nat"}},
      {"verify", {"verify", corpus("length.flk"), "--func", "length", "--pi1", "spine", "--pi2", "nf@Nat"}},
      {"soundness", {"soundness", corpus("length.flk")}},
      {"dtree", {"dtree", corpus("merge.flk"), "--with-demand"}},
      {"dtree", {"dtree", corpus("por.flk")}},
      {"bench", {"bench", corpus("sublists.flk"), "--suite", "sublists_reverse", "--sizes", "0,3"}},
      {"eval", {"eval", corpus("fig1.flk"), "--goal", "f (not True) (not y)"}},
      {"oracle", {"oracle", plus, "--func", "plus", "--args", "(Zero, Zero)", "--pred", "nf@Nat"}},
  };
  for (auto& c : cases) {
    auto args = c.args;
    args.push_back("--format");
    args.push_back("json");
    Run r = cli(args);
    CAPTURE(c.schema);
    CHECK(validate(c.schema, r.out) == "");
  }
  // A violation is reported as such.
  CHECK(validate("bench", "[{\"suite\": \"x\"}]") != "");
}

TEST_CASE("text and json carry the same verdict data") {
  Run t = cli({"verify", corpus("length.flk"), "--func", "length", "--pi1", "nf@[Nat]", "--pi2", "nf@Nat"});
  Run j = cli({"verify", corpus("length.flk"), "--func", "length", "--pi1", "nf@[Nat]", "--pi2", "nf@Nat",
               "--format", "json"});
  auto v = json::parse(j.out);
  CHECK(t.out.find(v["verdict"].get<std::string>()) != std::string::npos);
  CHECK(t.out.find(v["counterexample"].get<std::string>()) != std::string::npos);
  CHECK(t.code == j.code);
}
