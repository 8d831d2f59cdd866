#include "epik/semantics.hpp"

#include <algorithm>
#include <ostream>

namespace epik {

namespace {

void run_from(State& s, const Code& code, std::size_t pc, std::vector<State>& out) {
  for (; pc < code.size(); ++pc) {
    const Stmt& st = code[pc];
    if (st.kind == Stmt::Kind::kAssign) {
      s[st.target] = evaluate(st.expr, s) ? 1 : 0;
      continue;
    }
    // Each branch continues on its own copy.
    State other = s;
    s[st.target] = 0;
    other[st.target] = 1;
    run_from(s, code, pc + 1, out);
    run_from(other, code, pc + 1, out);
    return;
  }
  out.push_back(s);
}

void sort_unique(std::vector<State>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Kleene evaluation over a partial state; 2 means unknown.
std::uint8_t eval3(const Expr& e, const std::vector<std::uint8_t>& s) {
  switch (e.kind) {
    case Expr::Kind::kVar: return s[e.var];
    case Expr::Kind::kConst: return e.value ? 1 : 0;
    case Expr::Kind::kNot: {
      std::uint8_t a = eval3(e.kids[0], s);
      return a == 2 ? 2 : 1 - a;
    }
    default: break;
  }
  std::uint8_t a = eval3(e.kids[0], s);
  std::uint8_t b = eval3(e.kids[1], s);
  switch (e.kind) {
    case Expr::Kind::kAnd:
      if (a == 0 || b == 0) return 0;
      return (a == 1 && b == 1) ? 1 : 2;
    case Expr::Kind::kOr:
      if (a == 1 || b == 1) return 1;
      return (a == 0 && b == 0) ? 0 : 2;
    case Expr::Kind::kImplies:
      if (a == 0 || b == 1) return 1;
      return (a == 1 && b == 0) ? 0 : 2;
    case Expr::Kind::kXor:
      if (a == 2 || b == 2) return 2;
      return a ^ b;
    case Expr::Kind::kIff:
      if (a == 2 || b == 2) return 2;
      return a == b ? 1 : 0;
    default: return 2;
  }
}

void overflow(const std::string& what) {
  throw OverflowError("state space overflow: " + what);
}

// Flat run table: `count` rows of (horizon + 1) * |U| bits.
struct RunTable {
  std::vector<std::uint8_t> bits;
  std::size_t count = 0;
};

RunTable expand_runs(const SystemSpec& sys, int horizon, const EnumerateOptions& opts) {
  const std::size_t u = sys.vars.size();
  const std::size_t full = u * static_cast<std::size_t>(horizon + 1);
  auto check = [&](std::size_t runs) {
    if (runs > opts.world_cap) {
      overflow("more than " + std::to_string(opts.world_cap) + " worlds");
    }
    if (full > 0 && runs > opts.cell_cap / full) {
      overflow(std::to_string(runs) + " runs of " + std::to_string(full) + " timed variables");
    }
  };
  std::size_t init_cap = full ? std::min(opts.world_cap, opts.cell_cap / full) : opts.world_cap;
  std::vector<State> init = initial_states(sys, init_cap);
  RunTable table;
  table.count = init.size();
  check(table.count);
  table.bits.reserve(table.count * u);
  for (const State& s : init) table.bits.insert(table.bits.end(), s.begin(), s.end());

  for (int tick = 1; tick <= horizon; ++tick) {
    std::vector<const Action*> pending;
    for (std::size_t i = 0; i < sys.agents.size(); ++i) pending.push_back(action_at(sys, i, tick));
    const std::size_t len = u * static_cast<std::size_t>(tick);
    RunTable next;
    State s(u);
    for (std::size_t r = 0; r < table.count; ++r) {
      const std::uint8_t* row = table.bits.data() + r * len;
      std::copy(row + len - u, row + len, s.begin());
      std::vector<State> succ = tick_step(s, pending, sys.env);
      next.count += succ.size();
      check(next.count);
      for (const State& t : succ) {
        next.bits.insert(next.bits.end(), row, row + len);
        next.bits.insert(next.bits.end(), t.begin(), t.end());
      }
    }
    table = std::move(next);
  }
  return table;
}

}  // namespace

std::vector<State> zero_step_closure(const State& s, const Code& code) {
  std::vector<State> out;
  State work = s;
  run_from(work, code, 0, out);
  sort_unique(out);
  return out;
}

std::vector<State> tick_step(const State& s, const std::vector<const Action*>& pending,
                             const Code& env) {
  Code joint;
  for (const Action* a : pending) {
    if (a && !a->skip) joint.insert(joint.end(), a->code.begin(), a->code.end());
  }
  joint.insert(joint.end(), env.begin(), env.end());
  return zero_step_closure(s, joint);
}

const Action* action_at(const SystemSpec& sys, std::size_t agent, int tick) {
  const auto& acts = sys.agents.at(agent).actions;
  if (tick < 1 || static_cast<std::size_t>(tick) > acts.size()) return nullptr;
  return &acts[static_cast<std::size_t>(tick - 1)];
}

std::vector<State> initial_states(const SystemSpec& sys, std::size_t cap) {
  const std::size_t u = sys.vars.size();
  std::vector<std::uint8_t> partial(u, 2);
  std::vector<State> out;
  // Depth-first over U in declaration order, pruning on a definite false.
  auto rec = [&](auto&& self, std::size_t i) -> void {
    std::uint8_t v = eval3(sys.init, partial);
    if (v == 0) return;
    if (i == u) {
      if (out.size() >= cap) overflow("more than " + std::to_string(cap) + " initial states");
      out.push_back(partial);
      return;
    }
    for (std::uint8_t b = 0; b < 2; ++b) {
      partial[i] = b;
      self(self, i + 1);
    }
    partial[i] = 2;
  };
  rec(rec, 0);
  if (out.empty()) throw ModelError("initial condition is unsatisfiable");
  return out;
}

std::vector<Run> enumerate_runs(const SystemSpec& sys, int horizon, const EnumerateOptions& opts) {
  RunTable table = expand_runs(sys, horizon, opts);
  const std::size_t u = sys.vars.size();
  std::vector<Run> runs(table.count);
  for (std::size_t r = 0; r < table.count; ++r) {
    const std::uint8_t* row = table.bits.data() + r * u * static_cast<std::size_t>(horizon + 1);
    for (int t = 0; t <= horizon; ++t) {
      runs[r].emplace_back(row + t * u, row + (t + 1) * u);
    }
  }
  std::sort(runs.begin(), runs.end());
  return runs;
}

EpistemicStructure enumerate_structure(const SystemSpec& sys, const VarTable& table,
                                       const EnumerateOptions& opts) {
  RunTable runs = expand_runs(sys, table.horizon(), opts);
  const std::size_t full = table.program_count();
  std::vector<VarSpec> specs;
  for (std::size_t id = 0; id < full; ++id) specs.push_back({static_cast<VarId>(id), 2});
  Relation::Builder b(specs);
  std::vector<std::uint32_t> row(full);
  for (std::size_t r = 0; r < runs.count; ++r) {
    const std::uint8_t* bits = runs.bits.data() + r * full;
    std::copy(bits, bits + full, row.begin());
    b.add(row);
  }
  EpistemicStructure m;
  m.worlds = b.finish();
  for (const AgentProtocol& a : sys.agents) {
    std::vector<VarId> obs;
    for (int t = 0; t <= table.horizon(); ++t) {
      for (BaseVar v : a.observes) obs.push_back(table.program(v, t));
    }
    std::sort(obs.begin(), obs.end());
    m.observables.push_back(std::move(obs));
  }
  return m;
}

void dump_runs(std::ostream& os, const SystemSpec& sys, const std::vector<Run>& runs) {
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (r > 0) os << '\n';
    for (std::size_t t = 0; t < runs[r].size(); ++t) {
      os << t << ':';
      for (std::size_t v = 0; v < sys.vars.size(); ++v) {
        os << (v ? "," : " ") << sys.vars[v] << '=' << int(runs[r][t][v]);
      }
      os << '\n';
    }
  }
}

}  // namespace epik
