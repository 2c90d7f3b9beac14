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

#include "demand/cli.hpp"

#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "demand/dtree.hpp"
#include "demand/machine.hpp"
#include "json.hpp"

namespace demand {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string file;
  std::string pred, func, pi1, pi2, stage = "weakened", format = "text";
  std::string suite, args, goal, strategy = "all";
  std::vector<std::string> seed_preds;
  std::vector<int> sizes;
  int depth = 4;
  long fuel = 500;
  bool with_demand = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load(const Options& o) {
  ParseResult r = parse_program(read_file(o.file));
  if (!r.ok()) {
    std::string msg = "parse failed";
    for (auto& d : r.diagnostics) msg += "\n  " + to_string(d);
    throw std::runtime_error(msg);
  }
  return *r.program;
}

const FunctionDef& need_func(const Program& p, const Options& o) {
  if (o.func.empty()) throw UsageError("--func is required");
  const FunctionDef* f = p.find_fn(o.func);
  if (!f) throw UsageError("unknown function " + o.func);
  return *f;
}

PredPtr need_pred(const Program& p, const std::string& text, const char* flag) {
  if (text.empty()) throw UsageError(std::string(flag) + " is required");
  try {
    return parse_pred(p, text);
  } catch (const std::exception& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

void emit(std::ostream& out, const Options& o, const json& j, const std::string& text) {
  if (o.format == "json")
    out << j.dump(2) << "\n";
  else
    out << text;
}

int cmd_check(const Options& o, std::ostream& out) {
  ParseResult r = parse_program(read_file(o.file));
  std::vector<Diagnostic> ds = r.diagnostics;
  if (r.program) {
    for (auto& d : r.program->type_diagnostics) ds.push_back(d);
    for (auto& d : check_wellformed(*r.program)) ds.push_back(d);
  }
  json j = {{"diagnostics", json::array()}};
  std::string text;
  for (auto& d : ds) {
    j["diagnostics"].push_back({{"code", d.code}, {"message", d.message}, {"line", d.span.line},
                                {"col", d.span.col}, {"rule", d.rule}});
    text += to_string(d) + "\n";
  }
  if (ds.empty()) text = "ok\n";
  emit(out, o, j, text);
  return ds.empty() ? kExitOk : kExitRefuted;
}

int cmd_constraints(const Options& o, std::ostream& out) {
  Program p = load(o);
  need_func(p, o);
  PredPtr pr = need_pred(p, o.pred, "--pred");
  DemandContext ctx(p);
  ConstraintSystem s = gen_system(ctx, {{ctx.intern_pred(pr, p.find_fn(o.func)->result_type), o.func}});
  if (o.stage == "simplified" || o.stage == "weakened") s = simplify(s);
  if (o.stage == "weakened") s = weaken(s);
  emit(out, o, json::parse(dump_json(s)), dump(s));
  return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out) {
  Program p = load(o);
  const FunctionDef& f = need_func(p, o);
  PredPtr pr = need_pred(p, o.pred, "--pred");
  Analyzer a(p);
  int pid = a.pred(pr, f.result_type);
  const ConstraintSystem& s = a.system(pid, o.func);
  const Valuation& v = a.solution(pid, o.func);
  Grammar& g = a.ctx().grammar();
  json j = {{"constraints", s.cs.size()}, {"variables", json::object()}};
  std::ostringstream os;
  for (auto& [var, nt] : v.nt) {
    std::string name = a.ctx().var_name(var);
    int m = g.minimize(nt);
    j["variables"][name] = json::parse(g.dump_json(m));
    os << name << ":\n" << g.dump(m);
  }
  emit(out, o, j, os.str());
  return kExitOk;
}

int cmd_infer(const Options& o, std::ostream& out) {
  Program p = load(o);
  const FunctionDef& f = need_func(p, o);
  PredPtr pr = need_pred(p, o.pred, "--pred");
  Analyzer a(p);
  DemandReport r = a.infer(f.name, pr);
  Grammar& g = a.ctx().grammar();
  json j = {{"function", r.function},      {"result_pred", r.result_pred},
            {"args", r.patterns},          {"sigma", json::parse(g.dump_json(r.sigma))},
            {"constraints", r.constraints}, {"variables", r.variables},
            {"states", r.states},          {"refinements", r.refinements}};
  std::string shape;
  for (size_t i = 0; i < r.patterns.size(); ++i) shape += (i ? " x " : "") + r.patterns[i];
  std::string text = r.function + " : (" + shape + ") <= " + r.result_pred + "\n" + g.dump(r.sigma);
  emit(out, o, j, text);
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  Program p = load(o);
  const FunctionDef& f = need_func(p, o);
  PredPtr pi1 = need_pred(p, o.pi1, "--pi1");
  PredPtr pi2 = need_pred(p, o.pi2, "--pi2");
  Analyzer a(p);
  Verdict v = a.check_typing(f.name, pi1, pi2, CheckBounds{o.depth, o.fuel});
  json j = {{"function", f.name}, {"pi1", o.pi1}, {"pi2", o.pi2}, {"verdict", to_string(v.kind)},
            {"detail", v.detail}};
  std::string text = f.name + " : " + o.pi1 + " <= " + o.pi2 + "  " + to_string(v.kind) + "\n";
  if (v.counterexample) {
    j["counterexample"] = to_string(v.counterexample);
    text += "counterexample: " + to_string(v.counterexample) + "\n";
  }
  else if (!v.detail.empty())
    text += v.detail + "\n";
  emit(out, o, j, text);
  switch (v.kind) {
    case Verdict::Kind::Proved: return kExitOk;
    case Verdict::Kind::Refuted: return kExitRefuted;
    case Verdict::Kind::Unknown: return kExitUnknown;
  }
  return kExitUnknown;
}

int cmd_soundness(const Options& o, std::ostream& out) {
  Program p = load(o);
  Analyzer a(p);
  std::vector<std::pair<int, std::string>> seeds;
  if (!o.seed_preds.empty()) {
    const FunctionDef& f = need_func(p, o);
    for (auto& s : o.seed_preds) seeds.emplace_back(a.pred(need_pred(p, s, "--seed-preds"), f.result_type), f.name);
  } else {
    seeds = default_seeds(a);
    if (!o.func.empty()) {
      need_func(p, o);
      std::erase_if(seeds, [&](auto& s) { return s.second != o.func; });
    }
  }
  HarnessOptions h;
  h.depth = o.depth;
  h.fuel = o.fuel;
  SoundnessReport r = a.soundness(a.pairs(seeds), h);
  json j = {{"pairs", r.pairs},       {"checked", r.checked},     {"accepted", r.accepted},
            {"sampled_pairs", r.sampled_pairs}, {"undefined", r.undefined}, {"violations", json::array()}};
  std::ostringstream os;
  os << "pairs " << r.pairs << ", tuples " << r.checked << ", accepted " << r.accepted << ", sampled pairs "
     << r.sampled_pairs << ", undefined " << r.undefined << ", violations " << r.violations.size() << "\n";
  for (auto& v : r.violations) {
    j["violations"].push_back({{"pred", v.pred}, {"function", v.function}, {"args", to_string(v.args)}});
    os << "violation: " << v.pred << " . " << v.function << " " << to_string(v.args) << "\n";
  }
  emit(out, o, j, os.str());
  return r.violations.empty() ? kExitOk : kExitRefuted;
}

int cmd_dtree(const Options& o, std::ostream& out) {
  Program p = load(o);
  std::vector<std::string> fns;
  if (!o.func.empty())
    fns.push_back(need_func(p, o).name);
  else
    fns = p.user_functions();
  std::unique_ptr<Analyzer> a;
  if (o.with_demand) a = std::make_unique<Analyzer>(p);
  json j = json::array();
  std::string text;
  for (auto& fn : fns) {
    if (p.find_fn(fn)->rules.empty()) continue;
    DefTreePtr t = o.with_demand ? build_with_demand(*a, fn) : build_lhs_tree(p, fn);
    j.push_back({{"function", fn},
                 {"inductively_sequential", is_inductively_sequential(t)},
                 {"tree", json::parse(tree_json(p, t))}});
    text += fn + ":\n" + print_tree(p, t);
  }
  emit(out, o, j, text);
  return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
  Program p = load(o);
  if (o.suite.empty()) throw UsageError("--suite is required");
  auto suites = bench_suites();
  if (std::find(suites.begin(), suites.end(), o.suite) == suites.end())
    throw UsageError("unknown suite " + o.suite);
  std::vector<int> sizes = o.sizes;
  if (sizes.empty()) sizes = o.suite == "nqueens" ? std::vector<int>{4} : std::vector<int>{3, 4, 5, 6};
  auto rows = bench(p, o.suite, sizes);
  emit(out, o, json::parse(bench_json(rows)), bench_text(rows));
  for (auto& r : rows)
    if (!r.eager.ok || !r.lazy.ok || !r.demand.ok) return kExitRefuted;
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  Program p = load(o);
  if (o.goal.empty()) throw UsageError("--goal is required");
  std::vector<Strategy> ss;
  if (o.strategy == "all" || o.strategy == "eager") ss.push_back(Strategy::Eager);
  if (o.strategy == "all" || o.strategy == "lazy") ss.push_back(Strategy::NaiveLazy);
  if (o.strategy == "all" || o.strategy == "demand") ss.push_back(Strategy::DemandDriven);
  if (ss.empty()) throw UsageError("unknown strategy " + o.strategy);
  json j = json::array();
  std::ostringstream os;
  int code = kExitOk;
  for (auto s : ss) {
    EvalStats st;
    bool ok = true;
    try {
      st = evaluate_goal(p, o.goal, s);
    } catch (const LimitExceeded& e) {
      st = e.stats;
      ok = false;
      code = kExitRefuted;
    }
    json a = json::array();
    for (auto& x : st.answers) a.push_back(x.text());
    j.push_back({{"strategy", to_string(s)},
                 {"ok", ok},
                 {"reduction_steps", st.reduction_steps},
                 {"reevaluations", st.reevaluations},
                 {"search_nodes", st.search_nodes},
                 {"answers", a}});
    os << to_string(s) << ": steps " << st.reduction_steps << ", reevaluations " << st.reevaluations
       << ", search nodes " << st.search_nodes << (ok ? "" : ", limit reached") << "\n";
    for (auto& x : st.answers) os << "  " << x.text() << "\n";
  }
  emit(out, o, j, os.str());
  return code;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  Program p = load(o);
  const FunctionDef& f = need_func(p, o);
  if (o.args.empty()) throw UsageError("--args is required");
  PTermPtr args;
  try {
    args = parse_pterm(p, o.args);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--args: ") + e.what());
  }
  Evaluator ev(p, EvalOptions{o.fuel, o.depth});
  PTermPtr value = ev.apply_tuple(f.name, args);
  json j = {{"function", f.name}, {"args", to_string(args)}, {"value", to_string(value)}};
  std::string text = f.name + " " + to_string(args) + " = " + to_string(value) + "\n";
  if (!o.pred.empty()) {
    PredPtr pr = need_pred(p, o.pred, "--pred");
    Analyzer a(p);
    bool holds = a.oracle(a.pred(pr, f.result_type), f.name, args, o.fuel);
    j["pred"] = o.pred;
    j["holds"] = holds;
    text += o.pred + " : " + (holds ? "True" : "undefined") + "\n";
  }
  emit(out, o, j, text);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Demand analysis for a small lazy functional logic language", "demandlyzer"};
  app.require_subcommand(1);
  Options o;

  auto file = [&](CLI::App* c) { c->add_option("file", o.file, "Program (.flk)")->required(); };
  auto common = [&](CLI::App* c) {
    c->add_option("--format", o.format)->check(CLI::IsMember({"text", "json"}));
  };
  auto fnpred = [&](CLI::App* c) {
    c->add_option("--func", o.func, "Function name");
    c->add_option("--pred", o.pred, "Predicate on the result");
  };
  auto bounds = [&](CLI::App* c) {
    c->add_option("--depth", o.depth, "Enumeration depth")->capture_default_str();
    c->add_option("--fuel", o.fuel, "Evaluation fuel")->capture_default_str();
  };

  std::map<std::string, std::function<int(const Options&, std::ostream&)>> run;
  auto sub = [&](const char* name, const char* desc, auto fn) {
    CLI::App* c = app.add_subcommand(name, desc);
    file(c);
    common(c);
    run[name] = fn;
    return c;
  };

  sub("check", "Parse and check well-formedness", cmd_check);
  auto* cons = sub("constraints", "Dump the demand constraints of (pred, func)", cmd_constraints);
  fnpred(cons);
  cons->add_option("--stage", o.stage)->check(CLI::IsMember({"raw", "simplified", "weakened"}));
  fnpred(sub("solve", "Greatest solution of the constraints of (pred, func)", cmd_solve));
  fnpred(sub("infer", "Argument demand of func for a result predicate", cmd_infer));
  auto* ver = sub("verify", "Check the demand typing func : pi1 <= pi2", cmd_verify);
  ver->add_option("--func", o.func);
  ver->add_option("--pi1", o.pi1);
  ver->add_option("--pi2", o.pi2);
  bounds(ver);
  auto* snd = sub("soundness", "Compare solved grammars with the evaluator", cmd_soundness);
  snd->add_option("--func", o.func);
  snd->add_option("--seed-preds", o.seed_preds)->delimiter(',');
  bounds(snd);
  auto* dt = sub("dtree", "Definitional trees", cmd_dtree);
  dt->add_option("--func", o.func);
  dt->add_flag("--with-demand", o.with_demand, "Use inferred demand to remove or-nodes");
  auto* bn = sub("bench", "Step counts of eager, lazy and demand driven narrowing", cmd_bench);
  bn->add_option("--suite", o.suite)->check(CLI::IsMember(bench_suites()));
  bn->add_option("--sizes", o.sizes)->delimiter(',');
  auto* ev = sub("eval", "Narrow a goal under each strategy", cmd_eval);
  ev->add_option("--goal", o.goal);
  ev->add_option("--strategy", o.strategy)->check(CLI::IsMember({"all", "eager", "lazy", "demand"}));
  auto* orc = sub("oracle", "Evaluate func on a partial argument term", cmd_oracle);
  fnpred(orc);
  orc->add_option("--args", o.args, "Argument tuple, _|_ for bottom");
  bounds(orc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  for (auto* c : app.get_subcommands()) {
    try {
      return run.at(c->get_name())(o, out);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const FileError& e) {
      err << "error: " << e.what() << "\n";
      return kExitNoInput;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitRefuted;
    }
  }
  return kExitUsage;
}

}  // namespace demand
