// Formula evaluation on epistemic structures and the checking pipeline.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epik/frontend.hpp"
#include "epik/semantics.hpp"
#include "epik/structure.hpp"

namespace epik {

class CheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Formulas passed here have atoms bound to timed-variable ids.

// Per world (row of m.worlds), whether f holds there.
std::vector<std::uint8_t> sat_set(const EpistemicStructure& m, const Formula& f);

bool holds(const EpistemicStructure& m, std::size_t world, const Formula& f);
bool holds(const EpistemicStructure& m, std::span<const std::uint32_t> world, const Formula& f);

struct Verdict {
  bool valid = true;
  // Values over m.vars() of the lexicographically least failing world.
  std::optional<std::vector<std::uint32_t>> counterexample;
};

Verdict check_valid(const EpistemicStructure& m, const Formula& f);

struct PipelineStats {
  int level = 2;
  std::size_t vars_raw = 0;
  std::size_t vars_merged = 0;
  // |κ(φ)| at level 2; size of the restriction set at level 1.
  std::size_t vars_kappa = 0;
  // Vertices left after leaf elimination, i.e. what fusion ranges over.
  std::size_t vars_pruned = 0;
  std::size_t order_length = 0;
  std::size_t max_intermediate_tuples = 0;
  std::size_t worlds_final = 0;
  std::vector<std::pair<std::string, double>> stage_ms;
};

std::string stats_json(const PipelineStats& s);

struct CheckOptions {
  int level = 2;
  // Negative: use the system's horizon.
  int horizon = -1;
  EnumerateOptions enumerate;
};

struct CheckResult {
  Verdict verdict;
  PipelineStats stats;
  // The structure the verdict was computed on.
  EpistemicStructure structure;
  VarTable table;
};

// `f` has atoms over base variables with time stamps, as parsed.
CheckResult check_system(const SystemSpec& sys, const Formula& f, const CheckOptions& opts = {});

// A full run consistent with a counterexample world, found by enumeration.
std::optional<Run> witness_run(const SystemSpec& sys, const CheckResult& r,
                               const EnumerateOptions& opts = {});

}  // namespace epik
