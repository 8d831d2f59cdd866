// Random small systems and formulas for cross-checking the pipeline
// against the oracle.
#pragma once

#include <random>

#include "epik/frontend.hpp"

namespace epik::testing {

inline Expr random_expr(std::mt19937& rng, std::size_t nvars, int depth) {
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 7);
  int k = kind(rng);
  if (k == 0 || k == 1) {
    if (k == 1 && std::bernoulli_distribution(0.15)(rng)) {
      return Expr::constant(std::bernoulli_distribution(0.5)(rng));
    }
    return Expr::variable(std::uniform_int_distribution<BaseVar>(0, nvars - 1)(rng));
  }
  if (k == 2) return Expr::unary(Expr::Kind::kNot, random_expr(rng, nvars, depth - 1));
  static const Expr::Kind bin[] = {Expr::Kind::kAnd, Expr::Kind::kOr, Expr::Kind::kXor,
                                   Expr::Kind::kImplies, Expr::Kind::kIff};
  return Expr::binary(bin[k - 3], random_expr(rng, nvars, depth - 1),
                      random_expr(rng, nvars, depth - 1));
}

// Up to `max_vars` base variables, 1 or 2 agents, horizon up to
// `max_horizon`, satisfiable init.
inline SystemSpec random_system(std::mt19937& rng, int max_vars = 4, int max_horizon = 3) {
  SystemSpec sys;
  int nv = std::uniform_int_distribution<int>(2, max_vars)(rng);
  for (int v = 0; v < nv; ++v) sys.vars.push_back("v" + std::to_string(v));
  auto nvars = static_cast<std::size_t>(nv);
  sys.horizon = std::uniform_int_distribution<int>(1, max_horizon)(rng);
  int agents = std::uniform_int_distribution<int>(1, 2)(rng);
  std::bernoulli_distribution coin(0.5);
  for (int a = 0; a < agents; ++a) {
    AgentProtocol p;
    p.name = "A" + std::to_string(a);
    for (BaseVar v = 0; v < nvars; ++v) {
      if (std::bernoulli_distribution(0.4)(rng)) p.observes.insert(v);
    }
    for (int t = 0; t < sys.horizon; ++t) {
      Action act;
      if (std::bernoulli_distribution(0.7)(rng)) {
        act.skip = false;
        int stmts = std::uniform_int_distribution<int>(1, 3)(rng);
        for (int s = 0; s < stmts; ++s) {
          Stmt st;
          st.target = std::uniform_int_distribution<BaseVar>(0, nvars - 1)(rng);
          if (std::bernoulli_distribution(0.3)(rng)) {
            st.kind = Stmt::Kind::kRand;
          } else {
            st.expr = random_expr(rng, nvars, 2);
          }
          act.code.push_back(std::move(st));
        }
      }
      p.actions.push_back(std::move(act));
    }
    sys.agents.push_back(std::move(p));
  }
  if (coin(rng)) {
    sys.env.push_back({Stmt::Kind::kAssign, static_cast<BaseVar>(nvars - 1), random_expr(rng, nvars, 1)});
  }
  // Init is a conjunction of literals and small clauses; retried until
  // satisfiable.
  for (;;) {
    Expr init = Expr::constant(true);
    int parts = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int i = 0; i < parts; ++i) {
      init = Expr::binary(Expr::Kind::kAnd, init, random_expr(rng, nvars, 1));
    }
    std::vector<std::uint8_t> s(nvars);
    bool sat = false;
    for (std::size_t m = 0; m < (std::size_t{1} << nvars) && !sat; ++m) {
      for (std::size_t i = 0; i < nvars; ++i) s[i] = m >> i & 1;
      sat = evaluate(init, s);
    }
    if (sat) {
      sys.init = init;
      break;
    }
  }
  return sys;
}

inline Formula random_formula(std::mt19937& rng, const SystemSpec& sys, int depth, int max_k) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 3);
  int k = pick(rng);
  if (k == 3 && max_k <= 0) k = 2;
  switch (k) {
    case 0: {
      BaseVar v = std::uniform_int_distribution<BaseVar>(0, sys.vars.size() - 1)(rng);
      int t = std::uniform_int_distribution<int>(0, sys.horizon)(rng);
      return Formula::atom(v, t);
    }
    case 1: return Formula::negate(random_formula(rng, sys, depth - 1, max_k));
    case 2:
      return Formula::conj(random_formula(rng, sys, depth - 1, max_k),
                           random_formula(rng, sys, depth - 1, max_k));
    default: {
      int a = std::uniform_int_distribution<int>(0, static_cast<int>(sys.agents.size()) - 1)(rng);
      return Formula::knows(a, random_formula(rng, sys, depth - 1, max_k - 1));
    }
  }
}

}  // namespace epik::testing
