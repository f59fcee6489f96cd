#pragma once

#include "ehaoi/chain.hpp"
#include "ehaoi/model.hpp"
#include "ehaoi/rewards.hpp"
#include "ehaoi/solver.hpp"
#include "ehaoi/statespace.hpp"

namespace ehaoi {

/// Everything derived from a validated config: scaled energies, state space
/// and transition kernel.
struct Instance {
  ScaledConfig cfg;
  StateSpace space;
  TransitionKernel kernel;
};

Instance build_instance(const ValidatedConfig& cfg, std::size_t state_cap = kDefaultStateCap,
                        unsigned workers = 1);

struct SolvedInstance {
  SolveResult solve;
  ChainAnalysis analysis;
};

/// Optimal policy plus its steady-state metrics from the canonical start.
/// Throws NotConverged when the solver hits its iteration limit.
SolvedInstance solve_and_analyze(const Instance& inst, const RewardSpec& spec,
                                 const SolverOptions& solver = {},
                                 const SteadyStateOptions& steady = {});

}  // namespace ehaoi
