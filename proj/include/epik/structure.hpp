// Timed variables and epistemic variable structures.
#pragma once

#include <string>
#include <vector>

#include "epik/frontend.hpp"
#include "epik/valuation.hpp"

namespace epik {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimedVar {
  enum class Kind { kProgram, kSelector, kRandTemp };
  Kind kind = Kind::kProgram;
  BaseVar base = 0;
  int time = 0;
  // Selector: init component index. Rand temp: occurrence within the tick.
  int index = 0;
  std::uint32_t frame = 2;
};

// Program variable v at time t has id t * |U| + v; selectors and rand temps
// are numbered after all program variables.
class VarTable {
 public:
  VarTable() = default;
  VarTable(const SystemSpec& sys, int horizon);

  VarId program(BaseVar v, int t) const {
    return static_cast<VarId>(static_cast<std::size_t>(t) * base_count_ + v);
  }
  std::size_t program_count() const { return base_count_ * static_cast<std::size_t>(horizon_ + 1); }
  bool is_program(VarId id) const { return id < program_count(); }
  int horizon() const { return horizon_; }
  std::size_t base_count() const { return base_count_; }

  VarId add_selector(std::uint32_t frame, int component);
  VarId add_rand_temp(BaseVar v, int t, int occurrence);

  std::size_t size() const { return program_count() + extra_.size(); }
  TimedVar info(VarId id) const;
  std::uint32_t frame(VarId id) const { return info(id).frame; }
  VarSpec spec(VarId id) const { return {id, frame(id)}; }
  // paid0@3, init#0, coin0@1~2
  std::string name(VarId id) const;

 private:
  std::vector<std::string> names_;
  std::size_t base_count_ = 0;
  int horizon_ = 0;
  std::vector<TimedVar> extra_;
};

struct EpistemicStructure {
  Relation worlds;
  // Per agent, sorted.
  std::vector<std::vector<VarId>> observables;

  const std::vector<VarId>& vars() const { return worlds.vars(); }
};

}  // namespace epik
