// The six samplers: full MCMC, Subsample MCMC, Austerity, Confidence,
// Firefly and HINTS, run through a common top-level step loop that handles
// action selection, cost metering, proxy refits and strict-mode freezing.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subsetmc/chain.hpp"
#include "subsetmc/controller.hpp"
#include "subsetmc/proposal.hpp"
#include "subsetmc/proxy.hpp"
#include "subsetmc/target.hpp"

namespace subsetmc {

enum class ActionMode {
  Adaptive,  // cost-aware epsilon-greedy throughout
  Fixed,     // single fixed multiplier
  Strict,    // adaptive, frozen (with the proxy) at half budget
};

enum class HintsProxyMode {
  None,              // subset likelihood plus apportioned prior
  SubsetPlusAll,     // actual subset + proxy for every other scenario
  SubsetPlusParent,  // actual subset + proxy for the rest of the parent subset
  ProxyOwn,          // proxy over the node's own subset (nearest default)
  ProxyParent,       // proxy over the parent subset (quadratic default)
};

struct HintsConfig {
  int leaf_size = 0;            // 0 -> max(1, N/16)
  std::vector<int> branch;      // branch factors from level 1 up; empty -> fours
  std::optional<bool> downsample;  // default: on without proxy / nearest, off for quadratic
  std::optional<HintsProxyMode> mode;  // default by proxy kind
};

struct SamplerSpec {
  std::string kind;  // mcmc | subsample | austerity | confidence | firefly | hints
  ProxyConfig proxy;
  int subsample_size = 0;  // 0 -> max(1, N/16)
  int min_subset = 0;      // 0 -> max(1, N/16)
  double subset_growth = 1.5;
  double austerity_pvalue = 0.02;  // two-tailed, 98% confidence
  double confidence_delta = 0.1;
  double firefly_resample_fraction = 0.125;  // N/8 auxiliaries per resample
  int firefly_resample_period = 1;           // steps between resamples
  HintsConfig hints;
};

struct RunConfig {
  std::uint64_t budget_full_evals = 1024;  // scenario evals = budget * N
  ActionMode action_mode = ActionMode::Adaptive;
  double fixed_multiplier = 1.0;
  ControllerConfig controller;
  std::uint64_t seed = 0;
  State start;
};

// Per-move record of a HINTS traversal, for reversibility checks.
struct HintsTraceItem {
  int level = 0;
  int node = 0;
  State in;
  State out;
  double psi_log = 0.0;
  bool accepted = false;
  bool zero_move = false;
};

struct RunResult {
  ChainHistory history;
  std::uint64_t total_evals = 0;
  std::uint64_t init_evals = 0;
  int bound_violations = 0;
  int proxy_refits = 0;
  int frozen_action = -1;
  std::vector<HintsTraceItem> hints_trace;  // filled only when requested
};

// Runs one chain to its evaluation budget. The proposal defaults to the
// Gaussian random walk at the target's sigma0.
RunResult run_chain(const ScenarioTarget& target, const SamplerSpec& spec,
                    const RunConfig& cfg, const Proposal* proposal = nullptr,
                    bool keep_hints_trace = false);

// Resolved HINTS tree geometry (exposed for tests).
struct HintsTree {
  int n = 0;
  int leaf_size = 0;
  std::vector<int> branch;     // m_h for h = 1..H
  std::vector<int> block;      // subset size per level, block[0] = leaf_size
  int height() const { return static_cast<int>(branch.size()); }
};
HintsTree resolve_hints_tree(int n_scenarios, const HintsConfig& cfg);

}  // namespace subsetmc
