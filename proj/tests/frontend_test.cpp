#include <random>

#include "doctest.h"
#include "epik/frontend.hpp"

using namespace epik;

namespace {

const char* kDc3 = R"(
# three cryptographers
vars: paid0, paid1, paid2, coin0, coin1, coin2, left0, left1, left2, say0, say1, say2;
init: !(paid0 & paid1) & !(paid0 & paid2) & !(paid1 & paid2);
agent C0 {
  observes: paid0, coin0, left0, say0, say1, say2;
  protocol: rand(coin0); left1 := coin0; say0 := paid0 ^ coin0 ^ left0;
}
agent C1 {
  observes: paid1, coin1, left1, say0, say1, say2;
  protocol: rand(coin1); left2 := coin1; say1 := paid1 ^ coin1 ^ left1;
}
agent C2 {
  observes: paid2, coin2, left2, say0, say1, say2;
  protocol: rand(coin2); left0 := coin2; say2 := paid2 ^ coin2 ^ left2;
}
spec: !paid0 => Knows C0 (!paid1 & !paid2) | (Knows C0 (paid1 | paid2) & !Knows C0 paid1 & !Knows C0 paid2) @ 3;
)";

std::string error_of(const std::string& text) {
  try {
    parse_system(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

Formula random_formula(std::mt19937& rng, const SystemSpec& sys, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 3);
  switch (pick(rng)) {
    case 0: {
      BaseVar v = std::uniform_int_distribution<BaseVar>(0, sys.vars.size() - 1)(rng);
      int t = std::uniform_int_distribution<int>(0, sys.horizon)(rng);
      return Formula::atom(v, t);
    }
    case 1: return Formula::negate(random_formula(rng, sys, depth - 1));
    case 2:
      return Formula::conj(random_formula(rng, sys, depth - 1), random_formula(rng, sys, depth - 1));
    default: {
      int a = std::uniform_int_distribution<int>(0, static_cast<int>(sys.agents.size()) - 1)(rng);
      return Formula::knows(a, random_formula(rng, sys, depth - 1));
    }
  }
}

}  // namespace

TEST_CASE("dining cryptographers model parses") {
  SystemSpec sys = parse_system(kDc3);
  CHECK(sys.agents.size() == 3);
  CHECK(sys.vars.size() == 12);
  CHECK(sys.horizon == 3);
  CHECK(sys.spec_time == 3);
  REQUIRE(sys.spec);
  CHECK(knowledge_depth(*sys.spec) == 1);
  CHECK(agents_of(*sys.spec) == std::set<int>{0});
  for (auto [v, t] : atoms_of(*sys.spec)) CHECK(t == 3);
  const AgentProtocol& c0 = sys.agents[0];
  CHECK(c0.observes.size() == 6);
  CHECK(c0.actions[0].code[0].kind == Stmt::Kind::kRand);
  CHECK(c0.actions[1].code[0].target == *sys.find_var("left1"));
}

TEST_CASE("protocols are padded with skip") {
  SystemSpec sys = parse_system(R"(
    vars: a, b;
    agent A { observes: a; protocol: a := 1; }
    agent B { observes: b; protocol: skip; < b := a; a := !a >; b := b; }
  )");
  CHECK(sys.horizon == 3);
  REQUIRE(sys.agents[0].actions.size() == 3);
  CHECK_FALSE(sys.agents[0].actions[0].skip);
  CHECK(sys.agents[0].actions[1].skip);
  CHECK(sys.agents[0].actions[2].skip);
  CHECK(sys.agents[1].actions[1].code.size() == 2);

  SystemSpec longer = parse_system("vars: a; horizon: 5; agent A { observes: a; protocol: skip; }");
  CHECK(longer.horizon == 5);
  CHECK(longer.agents[0].actions.size() == 5);
}

TEST_CASE("model errors") {
  CHECK(error_of("vars: a;").find("no agents") != std::string::npos);
  std::string undeclared =
      error_of("vars: coin0;\nagent A { observes: coin0; protocol: rand(coinX); }");
  CHECK(undeclared.find("coinX") != std::string::npos);
  CHECK(undeclared.find("<input>:2:") == 0);
  CHECK(error_of("vars: a; agent A { observes: a; } agent A { observes: a; }").find("duplicate agent") !=
        std::string::npos);
  CHECK(error_of("vars: a; horizon: -1; agent A { observes: a; }").find("non-negative") !=
        std::string::npos);
  CHECK(error_of("vars: a; horizon: 1; agent A { observes: a; protocol: skip; skip; }") != "");
  CHECK(error_of("vars: a, a; agent A { observes: a; }").find("duplicate variable") != std::string::npos);
  CHECK(error_of("vars: a; agent A { observes: a; } spec: a @ 4;").find("outside") !=
        std::string::npos);
  CHECK(error_of("vars: a; agent A { observes: a; protocol: a := ; }") != "");
}

TEST_CASE("formulas") {
  SystemSpec sys = parse_system(kDc3);
  CHECK(parse_formula("paid1@0", sys, 3) == Formula::atom(*sys.find_var("paid1"), 0));
  CHECK(parse_formula("paid1", sys, 0) == Formula::atom(*sys.find_var("paid1"), 0));
  CHECK(parse_formula("Knows C0 paid1", sys, 2) ==
        Formula::knows(0, Formula::atom(*sys.find_var("paid1"), 2)));
  CHECK_THROWS_AS(parse_formula("Knows C9 paid1", sys, 3), ParseError);
  CHECK_THROWS_AS(parse_formula("paid1@4", sys, 3), ParseError);
  CHECK_THROWS_AS(parse_formula("paid1 &", sys, 3), ParseError);
  CHECK_THROWS_AS(parse_formula("true", sys, 3), ParseError);

  Formula phi2 = parse_formula(
      "!paid0@0 => Knows C0 (!paid1@0 & !paid2@0) | (Knows C0 (paid1@0 | paid1@0) & "
      "!Knows C0 paid1@0 & !Knows C0 paid2@0)",
      sys, 3);
  for (auto [v, t] : atoms_of(phi2)) {
    CHECK(sys.vars[v].rfind("paid", 0) == 0);
    CHECK(t == 0);
  }
  // Explicit stamps win over the default.
  CHECK(atoms_of(parse_formula("paid0@1 & paid1", sys, 3)) ==
        std::set<std::pair<BaseVar, int>>{{*sys.find_var("paid0"), 1}, {*sys.find_var("paid1"), 3}});
}

TEST_CASE("derived connectives desugar") {
  SystemSpec sys = parse_system("vars: a, b; agent A { observes: a; protocol: skip; }");
  CHECK(parse_formula("a => b", sys, 0) == parse_formula("!(a & !b)", sys, 0));
  CHECK(parse_formula("a | b", sys, 0) == parse_formula("!(!a & !b)", sys, 0));
  CHECK(parse_formula("a <=> b", sys, 0) == parse_formula("(a => b) & (b => a)", sys, 0));
  CHECK(parse_formula("a => b => a", sys, 0) == parse_formula("a => (b => a)", sys, 0));
}

TEST_CASE("pretty printing round trips") {
  SystemSpec sys = parse_system(kDc3);
  std::mt19937 rng(3);
  for (int i = 0; i < 300; ++i) {
    Formula f = random_formula(rng, sys, 5);
    std::string text = to_string(f, sys);
    CHECK_MESSAGE(parse_formula(text, sys, 0) == f, text);
  }
  REQUIRE(sys.spec);
  CHECK(parse_formula(to_string(*sys.spec, sys), sys, 0) == *sys.spec);
}

TEST_CASE("expression evaluation") {
  SystemSpec sys = parse_system("vars: a, b; init: a ^ b => !a; agent A { observes: a; }");
  std::vector<std::uint8_t> s{1, 0};
  CHECK_FALSE(evaluate(sys.init, s));
  s = {0, 1};
  CHECK(evaluate(sys.init, s));
  CHECK(to_string(sys.init, sys) == "((a ^ b) => !a)");
}
