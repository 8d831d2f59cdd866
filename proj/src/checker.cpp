#include "epik/checker.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "json.hpp"

#include "epik/model.hpp"
#include "epik/relevance.hpp"

namespace epik {

namespace {

class SatEvaluator {
 public:
  explicit SatEvaluator(const EpistemicStructure& m) : m_(m) {}

  std::vector<std::uint8_t> eval(const Formula& f) {
    const std::size_t n = m_.worlds.size();
    switch (f.kind) {
      case Formula::Kind::kAtom: {
        int col = m_.worlds.column(f.var);
        if (col < 0) throw CheckError("atom " + std::to_string(f.var) + " is not a variable of the structure");
        std::vector<std::uint8_t> out(n);
        for (std::size_t w = 0; w < n; ++w) out[w] = m_.worlds.value(w, static_cast<std::size_t>(col)) != 0;
        return out;
      }
      case Formula::Kind::kNot: {
        auto out = eval(f.kids[0]);
        for (auto& b : out) b = !b;
        return out;
      }
      case Formula::Kind::kAnd: {
        auto a = eval(f.kids[0]);
        auto b = eval(f.kids[1]);
        for (std::size_t w = 0; w < n; ++w) a[w] = a[w] && b[w];
        return a;
      }
      case Formula::Kind::kKnows: {
        auto inner = eval(f.kids[0]);
        const std::vector<std::uint32_t>& group = groups(f.agent);
        // A group knows ψ when every world in it satisfies ψ.
        std::vector<std::uint8_t> ok(group_count_[f.agent], 1);
        for (std::size_t w = 0; w < n; ++w) {
          if (!inner[w]) ok[group[w]] = 0;
        }
        for (std::size_t w = 0; w < n; ++w) inner[w] = ok[group[w]];
        return inner;
      }
    }
    return {};
  }

 private:
  const std::vector<std::uint32_t>& groups(int agent) {
    if (agent < 0 || static_cast<std::size_t>(agent) >= m_.observables.size()) {
      throw CheckError("unknown agent index " + std::to_string(agent));
    }
    auto it = groups_.find(agent);
    if (it != groups_.end()) return it->second;
    std::size_t count = 0;
    auto ids = group_rows(m_.worlds, m_.observables[static_cast<std::size_t>(agent)], &count);
    group_count_[agent] = count;
    return groups_[agent] = std::move(ids);
  }

  const EpistemicStructure& m_;
  std::map<int, std::vector<std::uint32_t>> groups_;
  std::map<int, std::size_t> group_count_;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::vector<std::uint8_t> sat_set(const EpistemicStructure& m, const Formula& f) {
  return SatEvaluator(m).eval(f);
}

bool holds(const EpistemicStructure& m, std::size_t world, const Formula& f) {
  if (world >= m.worlds.size()) throw CheckError("world index out of range");
  return sat_set(m, f)[world] != 0;
}

bool holds(const EpistemicStructure& m, std::span<const std::uint32_t> world, const Formula& f) {
  long row = m.worlds.find(world);
  if (row < 0) throw CheckError("assignment is not a world of the structure");
  return holds(m, static_cast<std::size_t>(row), f);
}

Verdict check_valid(const EpistemicStructure& m, const Formula& f) {
  auto sat = sat_set(m, f);
  Verdict v;
  for (std::size_t w = 0; w < sat.size(); ++w) {
    if (sat[w]) continue;
    std::vector<std::uint32_t> row = m.worlds.row(w);
    if (!v.counterexample || row < *v.counterexample) v.counterexample = std::move(row);
  }
  v.valid = !v.counterexample.has_value();
  return v;
}

std::string stats_json(const PipelineStats& s) {
  nlohmann::ordered_json j;
  j["level"] = s.level;
  j["vars_raw"] = s.vars_raw;
  j["vars_merged"] = s.vars_merged;
  j["vars_kappa"] = s.vars_kappa;
  j["vars_pruned"] = s.vars_pruned;
  j["order_length"] = s.order_length;
  j["max_intermediate_tuples"] = s.max_intermediate_tuples;
  j["worlds_final"] = s.worlds_final;
  nlohmann::ordered_json stages = nlohmann::ordered_json::object();
  for (const auto& [name, ms] : s.stage_ms) stages[name] = ms;
  j["stage_ms"] = stages;
  return j.dump();
}

CheckResult check_system(const SystemSpec& sys, const Formula& f, const CheckOptions& opts) {
  if (opts.level < 0 || opts.level > 2) throw CheckError("level must be 0, 1 or 2");
  const int horizon = opts.horizon < 0 ? sys.horizon : opts.horizon;
  CheckResult r;
  r.stats.level = opts.level;
  r.table = VarTable(sys, horizon);
  Formula bound = bind_atoms(f, r.table);
  auto stage = Clock::now();
  auto mark = [&](const char* name) {
    r.stats.stage_ms.emplace_back(name, ms_since(stage));
    stage = Clock::now();
  };

  if (opts.level == 0) {
    r.structure = enumerate_structure(sys, r.table, opts.enumerate);
    mark("enumerate");
    std::size_t n = r.table.program_count();
    r.stats.vars_raw = r.stats.vars_merged = r.stats.vars_kappa = r.stats.vars_pruned = n;
    r.stats.worlds_final = r.structure.worlds.size();
    r.stats.max_intermediate_tuples = r.structure.worlds.size();
    r.verdict = check_valid(r.structure, bound);
    mark("check");
    return r;
  }

  StructuredModel sm = unfold(sys, horizon);
  r.table = sm.table;
  r.stats.vars_raw = sm.dag.size();
  mark("unfold");
  sm = equality_merge(std::move(sm));
  r.stats.vars_merged = sm.dag.size();
  Formula resolved = resolve_atoms(bound, sm);
  mark("merge");

  VertexSet target;
  if (opts.level == 1) {
    for (auto [v, t] : atoms_of(resolved)) target.insert(v);
    for (int a : agents_of(resolved)) {
      const VertexSet& o = sm.observables.at(static_cast<std::size_t>(a));
      target.insert(o.begin(), o.end());
    }
  } else {
    target = kappa(resolved, sm).final;
    mark("kappa");
  }
  r.stats.vars_kappa = target.size();
  sm = drop_leaves(std::move(sm), target);
  r.stats.vars_pruned = sm.dag.size();
  mark("drop_leaves");

  FusionStats fs;
  r.structure = epistemic_marginalize(sm, target, &fs);
  r.stats.order_length = fs.steps;
  r.stats.max_intermediate_tuples = fs.max_intermediate_tuples;
  r.stats.worlds_final = r.structure.worlds.size();
  mark("fuse");
  r.verdict = check_valid(r.structure, resolved);
  mark("check");
  return r;
}

std::optional<Run> witness_run(const SystemSpec& sys, const CheckResult& r,
                               const EnumerateOptions& opts) {
  if (r.verdict.valid || !r.verdict.counterexample) return std::nullopt;
  const int horizon = r.table.horizon();
  // Joint over every vertex of the unfolded model, so selector and temp
  // columns of the counterexample can be matched too.
  StructuredModel sm = unfold(sys, horizon);
  Relation full = epistemic_marginalize(sm, vertices_of(sm)).worlds;
  if (full.size() > opts.world_cap || full.size() * full.arity() > opts.cell_cap) {
    throw OverflowError("witness search too large");
  }
  const std::vector<VarId>& cvars = r.structure.vars();
  std::vector<int> cols;
  for (VarId v : cvars) cols.push_back(full.column(v));
  const auto& want = *r.verdict.counterexample;
  const std::size_t u = sys.vars.size();
  for (std::size_t w = 0; w < full.size(); ++w) {
    bool match = true;
    for (std::size_t i = 0; i < cols.size() && match; ++i) {
      match = cols[i] >= 0 && full.value(w, static_cast<std::size_t>(cols[i])) == want[i];
    }
    if (!match) continue;
    Run run;
    for (int t = 0; t <= horizon; ++t) {
      State s(u);
      for (std::size_t v = 0; v < u; ++v) {
        int c = full.column(r.table.program(static_cast<BaseVar>(v), t));
        s[v] = static_cast<std::uint8_t>(full.value(w, static_cast<std::size_t>(c)));
      }
      run.push_back(std::move(s));
    }
    return run;
  }
  return std::nullopt;
}

}  // namespace epik
