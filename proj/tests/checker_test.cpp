#include "doctest.h"

#include <random>

#include "epik/bench.hpp"
#include "epik/checker.hpp"
#include "epik/model.hpp"
#include "json.hpp"
#include "random_system.hpp"

using namespace epik;

namespace {

// Two boolean variables p (id 0) and q (id 1).
EpistemicStructure two_var(std::vector<std::vector<std::uint32_t>> rows,
                           std::vector<std::vector<VarId>> obs) {
  std::vector<VarSpec> specs{{0, 2}, {1, 2}};
  return {Relation::from_rows(specs, rows), std::move(obs)};
}

Formula p() { return Formula::atom(0, 0); }
Formula q() { return Formula::atom(1, 0); }

// Clause-by-clause evaluation at one world, scanning all worlds for K.
bool naive(const EpistemicStructure& m, std::size_t w, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::kAtom:
      return m.worlds.value(w, static_cast<std::size_t>(m.worlds.column(f.var))) != 0;
    case Formula::Kind::kNot: return !naive(m, w, f.kids[0]);
    case Formula::Kind::kAnd: return naive(m, w, f.kids[0]) && naive(m, w, f.kids[1]);
    case Formula::Kind::kKnows: {
      const auto& obs = m.observables[static_cast<std::size_t>(f.agent)];
      for (std::size_t u = 0; u < m.worlds.size(); ++u) {
        bool same = true;
        for (VarId o : obs) {
          auto c = static_cast<std::size_t>(m.worlds.column(o));
          same = same && m.worlds.value(u, c) == m.worlds.value(w, c);
        }
        if (same && !naive(m, u, f.kids[0])) return false;
      }
      return true;
    }
  }
  return false;
}

Formula random_structure_formula(std::mt19937& rng, int depth, int agents) {
  int k = std::uniform_int_distribution<int>(0, depth <= 0 ? 0 : 3)(rng);
  switch (k) {
    case 0: return Formula::atom(std::uniform_int_distribution<VarId>(0, 3)(rng), 0);
    case 1: return Formula::negate(random_structure_formula(rng, depth - 1, agents));
    case 2:
      return Formula::conj(random_structure_formula(rng, depth - 1, agents),
                           random_structure_formula(rng, depth - 1, agents));
    default:
      return Formula::knows(std::uniform_int_distribution<int>(0, agents - 1)(rng),
                            random_structure_formula(rng, depth - 1, agents));
  }
}

CheckResult check_text(const std::string& model, const std::string& formula, int level) {
  SystemSpec sys = parse_system(model);
  CheckOptions opts;
  opts.level = level;
  return check_system(sys, parse_formula(formula, sys, sys.horizon), opts);
}

}  // namespace

TEST_CASE("atoms and knowledge on small structures") {
  EpistemicStructure m = two_var({{0, 0}, {1, 0}, {1, 1}}, {{0}});
  CHECK(holds(m, std::size_t{1}, p()));
  CHECK_FALSE(holds(m, std::size_t{0}, p()));
  std::vector<std::uint32_t> w{1, 1};
  CHECK(holds(m, w, p()));
  // Agent 0 sees p; with p=1 q is unknown.
  CHECK_FALSE(holds(m, w, Formula::knows(0, q())));
  CHECK(holds(m, w, Formula::knows(0, p())));
  // p | !p is known everywhere.
  Formula taut = Formula::disj(p(), Formula::negate(p()));
  for (std::size_t i = 0; i < m.worlds.size(); ++i) CHECK(holds(m, i, Formula::knows(0, taut)));
  CHECK_THROWS_AS(holds(m, std::size_t{3}, p()), CheckError);
  std::vector<std::uint32_t> absent{0, 1};
  CHECK_THROWS_AS(holds(m, absent, p()), CheckError);
  CHECK_THROWS_AS(holds(m, std::size_t{0}, Formula::atom(7, 0)), CheckError);
}

TEST_CASE("an agent that sees nothing knows only what holds everywhere") {
  EpistemicStructure m = two_var({{0, 0}, {1, 0}}, {{}});
  for (std::size_t w = 0; w < 2; ++w) {
    CHECK_FALSE(holds(m, w, Formula::knows(0, p())));
    CHECK(holds(m, w, Formula::knows(0, Formula::negate(q()))));
  }
}

TEST_CASE("verdicts and counterexamples") {
  EpistemicStructure m = two_var({{0, 1}, {1, 0}, {1, 1}}, {{0}});
  Verdict v = check_valid(m, Formula::disj(p(), q()));
  CHECK(v.valid);
  CHECK_FALSE(v.counterexample);
  Verdict f = check_valid(m, q());
  CHECK_FALSE(f.valid);
  REQUIRE(f.counterexample);
  CHECK(*f.counterexample == std::vector<std::uint32_t>{1, 0});
}

TEST_CASE("sat sets agree with clause-by-clause evaluation") {
  std::mt19937 rng(5);
  std::vector<VarSpec> specs{{0, 2}, {1, 2}, {2, 2}, {3, 2}};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::uint32_t>> rows;
    for (std::uint32_t mask = 0; mask < 16; ++mask) {
      if (std::bernoulli_distribution(0.5)(rng)) rows.push_back({mask & 1, mask >> 1 & 1, mask >> 2 & 1, mask >> 3 & 1});
    }
    if (rows.empty()) rows.push_back({0, 0, 0, 0});
    std::vector<std::vector<VarId>> obs(2);
    for (auto& o : obs) {
      for (VarId v = 0; v < 4; ++v) {
        if (std::bernoulli_distribution(0.4)(rng)) o.push_back(v);
      }
    }
    EpistemicStructure m{Relation::from_rows(specs, rows), obs};
    Formula f = random_structure_formula(rng, 5, 2);
    auto sat = sat_set(m, f);
    for (std::size_t w = 0; w < m.worlds.size(); ++w) CHECK((sat[w] != 0) == naive(m, w, f));
  }
}

TEST_CASE("dining cryptographers verdicts") {
  BenchInstance inst = generate_instance("dc", 3);
  for (int level : {0, 1, 2}) {
    CAPTURE(level);
    CHECK(check_text(inst.model, inst.formulas.at("main"), level).verdict.valid);
    CHECK_FALSE(check_text(inst.model, inst.formulas.at("verbatim"), level).verdict.valid);
  }
  // C0 does not know that C1 paid.
  CheckResult r = check_text(inst.model, "paid1@0 => Knows C0 paid1@0", 0);
  REQUIRE_FALSE(r.verdict.valid);
  REQUIRE(r.verdict.counterexample);
  const auto& vars = r.structure.vars();
  std::size_t col = std::find(vars.begin(), vars.end(), r.table.program(1, 0)) - vars.begin();
  REQUIRE(col < vars.size());
  CHECK((*r.verdict.counterexample)[col] == 1);
}

TEST_CASE("stats have the expected shape") {
  BenchInstance inst = generate_instance("dc", 3);
  CheckResult r = check_text(inst.model, inst.formulas.at("main"), 2);
  const PipelineStats& s = r.stats;
  CHECK(s.vars_raw == 49);
  CHECK(s.vars_merged <= s.vars_raw);
  CHECK(s.vars_kappa <= s.vars_pruned);
  CHECK(s.vars_pruned <= s.vars_merged);
  CHECK(s.worlds_final == r.structure.worlds.size());
  auto j = nlohmann::ordered_json::parse(stats_json(s));
  std::vector<std::string> keys;
  for (auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"level", "vars_raw", "vars_merged", "vars_kappa", "vars_pruned",
                                         "order_length", "max_intermediate_tuples", "worlds_final",
                                         "stage_ms"});
  CHECK(j["stage_ms"].contains("fuse"));
}

TEST_CASE("levels agree on random systems") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 80; ++trial) {
    SystemSpec sys = testing::random_system(rng);
    Formula f = testing::random_formula(rng, sys, 4, 2);
    CheckOptions opts;
    std::optional<bool> first;
    for (int level : {0, 1, 2}) {
      opts.level = level;
      CheckResult r = check_system(sys, f, opts);
      if (!first) first = r.verdict.valid;
      CHECK(r.verdict.valid == *first);
      if (r.verdict.counterexample) {
        // The counterexample is a world of the checked structure that fails f.
        long row = r.structure.worlds.find(*r.verdict.counterexample);
        REQUIRE(row >= 0);
        if (level == 0) CHECK_FALSE(holds(r.structure, static_cast<std::size_t>(row), bind_atoms(f, r.table)));
      }
      if (level == 2 && !r.verdict.valid) {
        auto run = witness_run(sys, r);
        REQUIRE(run);
        CHECK(run->size() == static_cast<std::size_t>(sys.horizon + 1));
      }
    }
  }
}

TEST_CASE("witness runs follow the protocol") {
  const char* model =
      "vars: x, y; init: !y; agent A { observes: y; protocol: < rand(x); y := x >; } agent B { observes: x; }";
  SystemSpec sys = parse_system(model);
  CheckOptions opts;
  opts.level = 2;
  CheckResult r = check_system(sys, parse_formula("!y", sys, 1), opts);
  REQUIRE_FALSE(r.verdict.valid);
  auto run = witness_run(sys, r);
  REQUIRE(run);
  REQUIRE(run->size() == 2);
  CHECK((*run)[1][1] == 1);
  CHECK((*run)[0][1] == 0);
  CHECK_FALSE(witness_run(sys, check_system(sys, parse_formula("y <=> x", sys, 1), opts)));
}

TEST_CASE("bad levels are rejected") {
  SystemSpec sys = parse_system("vars: x; agent A { observes: x; }");
  CheckOptions opts;
  opts.level = 3;
  CHECK_THROWS_AS(check_system(sys, parse_formula("x", sys, 0), opts), CheckError);
}
