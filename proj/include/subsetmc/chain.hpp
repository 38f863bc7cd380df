// Per-step chain history shared by the adaptive controller and the metrics.
#pragma once

#include <cstdint>
#include <vector>

#include "subsetmc/state.hpp"

namespace subsetmc {

struct StepRecord {
  State theta;          // chain state after the step
  State proposal;       // proposed state (equals theta when accepted)
  double alpha = 0.0;   // acceptance probability in [0,1]
  int action = -1;      // controller action index, -1 for the start entry
  std::uint64_t cost = 0;           // all scenario evaluations consumed by the step
  std::uint64_t overhead_cost = 0;  // portion of cost not attributable to the action
  bool accepted = false;
};

// History of one chain. Entry 0 is the start state (cost = initial full
// evaluation, if the sampler needs one).
struct ChainHistory {
  std::vector<StepRecord> steps;

  std::uint64_t total_cost() const {
    std::uint64_t c = 0;
    for (const auto& s : steps) c += s.cost;
    return c;
  }
};

}  // namespace subsetmc
