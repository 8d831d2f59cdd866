// Generators for the benchmark protocol families and the timing harness.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "epik/checker.hpp"

namespace epik {

struct BenchInstance {
  std::string family;
  int n = 0;
  // Model file text; its spec line holds the formula named "main".
  std::string model;
  // Formula name -> formula text (times included).
  std::map<std::string, std::string> formulas;
};

const std::vector<std::string>& bench_families();

// Deterministic in (family, n). Throws std::invalid_argument on an unknown
// family or a size the family does not support.
BenchInstance generate_instance(const std::string& family, int n);

struct BenchRecord {
  std::string family;
  int n = 0;
  int level = 0;
  std::string formula = "main";
  // VALID, FAILS, OVERFLOW, TIMEOUT or ERROR.
  std::string verdict;
  bool timeout = false;
  double wall_ms = 0;
  PipelineStats stats;
  std::string error;
};

std::string bench_json(const BenchRecord& r);

struct BenchOptions {
  // Zero or less: no limit, run in process.
  double timeout_sec = 120;
  EnumerateOptions enumerate;
};

// Runs one (instance, formula, level) check. With a timeout the check runs in
// a child process that is killed when the limit passes.
BenchRecord run_instance(const BenchInstance& inst, const std::string& formula, int level,
                         const BenchOptions& opts = {});

}  // namespace epik
