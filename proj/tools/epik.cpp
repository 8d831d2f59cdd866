// epik: check models, export dependency graphs, run benchmarks.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "epik/bench.hpp"
#include "epik/checker.hpp"
#include "epik/model.hpp"
#include "epik/relevance.hpp"

using namespace epik;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The spec formula, restamped when --time is given.
Formula spec_formula(const SystemSpec& sys, int time) {
  if (!sys.spec_untimed) throw std::runtime_error("model has no spec line");
  if (time < 0) return *sys.spec;
  if (time > sys.horizon) throw std::runtime_error("time " + std::to_string(time) + " beyond the horizon");
  return stamp_formula(*sys.spec_untimed, time);
}

struct CheckArgs {
  std::string file;
  int level = 2;
  int time = -1;
  int horizon = -1;
  std::string stats;
  bool witness = false;
};

int cmd_check(const CheckArgs& a) {
  SystemSpec sys = parse_system(read_file(a.file), a.file);
  if (a.horizon >= 0 && a.horizon > sys.horizon) {
    for (auto& ag : sys.agents) ag.actions.resize(static_cast<std::size_t>(a.horizon));
    sys.horizon = a.horizon;
  }
  Formula f = spec_formula(sys, a.time);
  CheckOptions opts;
  opts.level = a.level;
  opts.horizon = a.horizon;
  CheckResult r = check_system(sys, f, opts);
  std::cout << (r.verdict.valid ? "VALID" : "FAILS") << "\n";
  if (r.verdict.counterexample) {
    const auto& vars = r.structure.vars();
    std::cout << "counterexample:";
    for (std::size_t i = 0; i < vars.size(); ++i) {
      std::cout << " " << r.table.name(vars[i]) << "=" << (*r.verdict.counterexample)[i];
    }
    std::cout << "\n";
  }
  const PipelineStats& s = r.stats;
  std::cout << "vars_raw=" << s.vars_raw << " vars_merged=" << s.vars_merged
            << " vars_kappa=" << s.vars_kappa << " vars_pruned=" << s.vars_pruned
            << " worlds=" << s.worlds_final << "\n";
  if (!a.stats.empty()) {
    std::ofstream out(a.stats);
    if (!out) throw std::runtime_error("cannot write " + a.stats);
    out << stats_json(s) << "\n";
  }
  if (a.witness && r.verdict.counterexample) {
    auto run = witness_run(sys, r);
    if (run) {
      std::cout << "witness run:\n";
      dump_runs(std::cout, sys, {*run});
    }
  }
  return r.verdict.valid ? 0 : 1;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void write_dot(std::ostream& os, const StructuredModel& sm, int agent, const std::string& agent_name) {
  os << "digraph dependencies {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  VertexSet obs;
  if (agent >= 0) obs = sm.observables.at(static_cast<std::size_t>(agent));
  if (!obs.empty()) {
    os << "  subgraph cluster_observed {\n    label=" << quoted("observed by " + agent_name)
       << ";\n    style=rounded;\n";
    for (VarId v : obs) {
      if (sm.dag.has_vertex(v)) os << "    " << quoted(sm.table.name(v)) << ";\n";
    }
    os << "  }\n";
  }
  for (VarId v : sm.dag.vertices()) {
    if (!obs.count(v)) os << "  " << quoted(sm.table.name(v)) << ";\n";
  }
  for (VarId v : sm.dag.vertices()) {
    for (VarId c : sm.dag.children(v)) {
      os << "  " << quoted(sm.table.name(v)) << " -> " << quoted(sm.table.name(c)) << ";\n";
    }
  }
  os << "}\n";
}

struct GraphArgs {
  std::string file;
  std::string stage = "raw";
  std::string out;
  std::string agent;
  int time = -1;
};

int cmd_graph(const GraphArgs& a) {
  SystemSpec sys = parse_system(read_file(a.file), a.file);
  StructuredModel sm = unfold(sys, sys.horizon);
  if (a.stage != "raw") sm = equality_merge(std::move(sm));
  if (a.stage == "optimized") {
    VarTable table(sys, sys.horizon);
    Formula f = resolve_atoms(bind_atoms(spec_formula(sys, a.time), table), sm);
    sm = drop_leaves(std::move(sm), kappa(f, sm).final);
  }
  int agent = 0;
  if (!a.agent.empty()) {
    auto found = sys.find_agent(a.agent);
    if (!found) throw std::runtime_error("unknown agent '" + a.agent + "'");
    agent = *found;
  }
  const std::string& name = sys.agents[static_cast<std::size_t>(agent)].name;
  if (a.out.empty() || a.out == "-") {
    write_dot(std::cout, sm, agent, name);
  } else {
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    write_dot(out, sm, agent, name);
  }
  std::cerr << sm.dag.size() << " nodes, " << sm.dag.edge_count() << " edges\n";
  return 0;
}

struct BenchArgs {
  std::string family;
  std::string sizes = "3..3";
  std::vector<int> levels{0, 2};
  std::string formula = "main";
  double timeout = 120;
};

std::pair<int, int> parse_range(const std::string& s) {
  auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      int n = std::stoi(s);
      return {n, n};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw std::runtime_error("bad size range '" + s + "'");
  }
}

int cmd_bench(const BenchArgs& a) {
  const auto& fams = bench_families();
  if (std::find(fams.begin(), fams.end(), a.family) == fams.end()) {
    throw std::runtime_error("unknown family '" + a.family + "'");
  }
  for (int lv : a.levels) {
    if (lv < 0 || lv > 2) throw std::runtime_error("level must be 0, 1 or 2");
  }
  auto [lo, hi] = parse_range(a.sizes);
  std::vector<int> levels = a.levels;
  std::sort(levels.begin(), levels.end());
  BenchOptions opts;
  opts.timeout_sec = a.timeout;
  for (int n = lo; n <= hi; ++n) {
    BenchInstance inst = generate_instance(a.family, n);
    for (int lv : levels) {
      BenchRecord rec = run_instance(inst, a.formula, lv, opts);
      std::cerr << a.family << " n=" << n << " level=" << lv << " " << rec.verdict << " "
                << rec.wall_ms << " ms\n";
      std::cout << bench_json(rec) << std::endl;
    }
  }
  return 0;
}

struct GenArgs {
  std::string family;
  int n = 3;
  std::string out;
};

int cmd_generate(const GenArgs& a) {
  BenchInstance inst = generate_instance(a.family, a.n);
  if (a.out.empty() || a.out == "-") {
    std::cout << inst.model;
  } else {
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    out << inst.model;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epistemic model checker for synchronous perfect recall"};
  app.require_subcommand(1);

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "check the spec formula of a model");
  check->add_option("file", ca.file, "model file")->required();
  check->add_option("--level", ca.level, "0 enumerate, 1 merge only, 2 full")->check(CLI::Range(0, 2));
  check->add_option("--time", ca.time, "evaluation time for untimed atoms");
  check->add_option("--horizon", ca.horizon, "unfold to this many steps");
  check->add_option("--stats", ca.stats, "write pipeline statistics as JSON");
  check->add_flag("--witness", ca.witness, "print a run through the counterexample");

  GraphArgs ga;
  auto* graph = app.add_subcommand("graph", "export the dependency graph as DOT");
  graph->add_option("file", ga.file, "model file")->required();
  graph->add_option("--stage", ga.stage, "raw, merged or optimized")
      ->check(CLI::IsMember({"raw", "merged", "optimized"}));
  graph->add_option("-o,--output", ga.out, "output file, - for stdout");
  graph->add_option("--agent", ga.agent, "agent whose observables form a cluster");
  graph->add_option("--time", ga.time, "evaluation time for untimed atoms");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "run a benchmark family, JSON lines on stdout");
  bench->add_option("--family", ba.family, "dc, otp, rivest_ot, msg_transmission or chaum2p")->required();
  bench->add_option("--sizes", ba.sizes, "a..b");
  bench->add_option("--levels", ba.levels, "comma separated")->delimiter(',');
  bench->add_option("--formula", ba.formula, "formula name");
  bench->add_option("--timeout", ba.timeout, "seconds per run, 0 for none");

  GenArgs gen;
  auto* generate = app.add_subcommand("generate", "print a generated benchmark model");
  generate->add_option("family", gen.family)->required();
  generate->add_option("n", gen.n)->required();
  generate->add_option("-o,--output", gen.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(ca);
    if (*graph) return cmd_graph(ga);
    if (*bench) return cmd_bench(ba);
    if (*generate) return cmd_generate(gen);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
