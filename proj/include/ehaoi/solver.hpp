#pragma once

#include <cstddef>
#include <vector>

#include "ehaoi/chain.hpp"
#include "ehaoi/policy.hpp"
#include "ehaoi/rewards.hpp"
#include "ehaoi/statespace.hpp"

namespace ehaoi {

struct SolverOptions {
  /// Stop when span(V_{n+1} - V_n) < eps_c.
  double eps_c = 1e-10;
  std::size_t max_iter = 1'000'000;
  /// Aperiodicity transform V <- (1 - tau) * T(V) + tau * V. The reported
  /// gain is rescaled by 1 / (1 - tau), so it is unbiased. 0 disables it.
  double damping = 0.5;
  /// Values are renormalized against this state after every sweep.
  StateId reference = state_id(0);
};

struct SolveResult {
  Policy policy;
  double gain = 0.0;
  std::vector<double> values;
  std::size_t iterations = 0;
  double span_at_stop = 0.0;
  bool converged = false;
  /// False if span(V_{n+1} - V_n) ever increased (beyond rounding).
  bool span_monotone = true;
};

/// Relative value iteration for the long-run average reward. The greedy
/// policy breaks ties toward the lowest action index. When max_iter is hit the
/// result is returned with converged = false. Throws EmptyKernel.
SolveResult relative_value_iteration(const TransitionKernel& kernel, const RewardSpec& spec,
                                     const SolverOptions& opts = {});

struct PolicyEvaluation {
  double gain = 0.0;
  std::size_t iterations = 0;
  double span_at_stop = 0.0;
  bool converged = false;
};

/// Gain of a fixed policy by relative value iteration over the states
/// reachable from `start`. Independent of the stationary-distribution route.
PolicyEvaluation evaluate_policy(const TransitionKernel& kernel, const Policy& policy,
                                 const RewardSpec& spec, StateId start,
                                 const SolverOptions& opts = {});

/// Long-run average reward from `start` under a fixed chain: each closed class
/// reachable from start contributes its stationary reward, weighted by the
/// probability of being absorbed into it. Periodic classes are allowed.
double gain_from_start(const InducedChain& chain, const std::vector<double>& reward, StateId start);

struct OracleOptions {
  std::size_t max_policies = 1'000'000;
};

/// Exhaustive search over every stationary deterministic policy, scoring each
/// by gain_from_start at the canonical start state. Ties go to the
/// lexicographically smallest action vector. Throws TooManyPolicies.
SolveResult policy_enumeration_oracle(const TransitionKernel& kernel, const RewardSpec& spec,
                                      const OracleOptions& opts = {});

/// Product of per-state feasible-set sizes (saturates at SIZE_MAX).
std::size_t count_policies(const TransitionKernel& kernel);

}  // namespace ehaoi
