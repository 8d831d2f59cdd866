// Concrete operational semantics and the explicit run enumeration.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "epik/frontend.hpp"
#include "epik/structure.hpp"

namespace epik {

// One bit per base variable.
using State = std::vector<std::uint8_t>;
// s_0 .. s_n.
using Run = std::vector<State>;

class OverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Terminal states of `code` from `s`. Sorted, no duplicates.
std::vector<State> zero_step_closure(const State& s, const Code& code);

// One clock tick: the agents' pending actions in agent order, then env.
std::vector<State> tick_step(const State& s, const std::vector<const Action*>& pending,
                             const Code& env);

// Action of agent i at tick t (1-based). Past the end of the protocol it is skip.
const Action* action_at(const SystemSpec& sys, std::size_t agent, int tick);

// Initial states satisfying I, sorted.
std::vector<State> initial_states(const SystemSpec& sys, std::size_t cap);

struct EnumerateOptions {
  std::size_t world_cap = std::size_t{1} << 24;
  // Bound on worlds x timed variables, to keep the table in memory.
  std::size_t cell_cap = std::size_t{1} << 28;
};

// All runs of length horizon + 1, sorted.
std::vector<Run> enumerate_runs(const SystemSpec& sys, int horizon,
                                const EnumerateOptions& opts = {});

// Worlds over all program timed variables of `table`, observables
// O_i = {v^t : v in Q_i}.
EpistemicStructure enumerate_structure(const SystemSpec& sys, const VarTable& table,
                                       const EnumerateOptions& opts = {});

// `t: var=bit,...` per state, a blank line between runs.
void dump_runs(std::ostream& os, const SystemSpec& sys, const std::vector<Run>& runs);

}  // namespace epik
