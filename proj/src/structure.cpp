#include "epik/structure.hpp"

namespace epik {

VarTable::VarTable(const SystemSpec& sys, int horizon)
    : names_(sys.vars), base_count_(sys.vars.size()), horizon_(horizon) {
  if (horizon < 0) throw ModelError("negative horizon");
}

VarId VarTable::add_selector(std::uint32_t frame, int component) {
  extra_.push_back({TimedVar::Kind::kSelector, 0, 0, component, frame});
  return static_cast<VarId>(size() - 1);
}

VarId VarTable::add_rand_temp(BaseVar v, int t, int occurrence) {
  extra_.push_back({TimedVar::Kind::kRandTemp, v, t, occurrence, 2});
  return static_cast<VarId>(size() - 1);
}

TimedVar VarTable::info(VarId id) const {
  if (is_program(id)) {
    return {TimedVar::Kind::kProgram, static_cast<BaseVar>(id % base_count_),
            static_cast<int>(id / base_count_), 0, 2};
  }
  std::size_t k = id - program_count();
  if (k >= extra_.size()) throw ModelError("unknown timed variable " + std::to_string(id));
  return extra_[k];
}

std::string VarTable::name(VarId id) const {
  TimedVar tv = info(id);
  switch (tv.kind) {
    case TimedVar::Kind::kProgram: return names_[tv.base] + "@" + std::to_string(tv.time);
    case TimedVar::Kind::kSelector: return "init#" + std::to_string(tv.index);
    case TimedVar::Kind::kRandTemp:
      return names_[tv.base] + "@" + std::to_string(tv.time) + "~" + std::to_string(tv.index);
  }
  return "?";
}

}  // namespace epik
