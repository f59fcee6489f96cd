#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ehaoi/model.hpp"
#include "ehaoi/policy.hpp"
#include "ehaoi/statespace.hpp"

namespace ehaoi {

/// Row-stochastic sparse matrix obtained by fixing a policy in the kernel.
class InducedChain {
 public:
  std::size_t size() const { return offset_.empty() ? 0 : offset_.size() - 1; }
  std::span<const Transition> row(StateId s) const {
    const auto first = offset_[index_of(s)];
    return {entries_.data() + first, offset_[index_of(s) + 1] - first};
  }

 private:
  friend InducedChain induce_chain(const TransitionKernel&, const Policy&);

  std::vector<std::size_t> offset_;
  std::vector<Transition> entries_;
};

/// Row s is the kernel row (s, policy(s)). Throws InfeasiblePolicyAction.
InducedChain induce_chain(const TransitionKernel& kernel, const Policy& policy);

/// (age = a_max, long idle, harvester 0, battery 0): the anchor for
/// reachability and the default simulation start.
State canonical_start_state(const StateSpace& space);
StateId canonical_start(const StateSpace& space);

/// Sorted list of states reachable from `start` (including it).
std::vector<StateId> reachable_states(const InducedChain& chain, StateId start);

/// Every closed communicating class reachable from `start`, each sorted,
/// ordered by smallest member.
std::vector<std::vector<StateId>> closed_classes(const InducedChain& chain, StateId start);

/// The unique closed class reachable from `start`. Throws
/// MultipleRecurrentClasses when there is more than one.
std::vector<StateId> recurrent_class(const InducedChain& chain, StateId start);

/// Period of an irreducible class (1 means aperiodic).
int class_period(const InducedChain& chain, std::span<const StateId> cls);

/// Probability mass over a sorted support.
struct Distribution {
  std::vector<StateId> support;
  std::vector<double> prob;
};

struct SteadyStateOptions {
  /// Classes up to this size use a sparse LU solve; larger ones use lazy
  /// power iteration.
  std::size_t direct_limit = 200'000;
  double residual_tolerance = 1e-12;
  std::size_t max_power_iterations = 5'000'000;
};

/// Stationary distribution of an irreducible class without the aperiodicity
/// check. Throws SingularSystem when the residual check fails.
Distribution class_stationary(const InducedChain& chain, std::span<const StateId> cls,
                              const SteadyStateOptions& opts = {});

/// Stationary distribution of a closed aperiodic class. Throws PeriodicChain
/// or SingularSystem.
Distribution steady_state(const InducedChain& chain, std::span<const StateId> cls,
                          const SteadyStateOptions& opts = {});

/// max_s |(pi P)(s) - pi(s)| over the class.
double stationary_residual(const InducedChain& chain, const Distribution& dist);

/// Steady-state metrics, reported in config energy units.
struct Metrics {
  double avg_age = 0.0;
  double peak_hit_prob = 0.0;
  double avg_tx_power = 0.0;
  double avg_battery = 0.0;
  /// sum over ages k < a_max of k * P(age = k); the below-cap part of avg_age.
  double below_cap_age = 0.0;
};

Metrics metrics(const Distribution& dist, const StateSpace& space, const Policy& policy,
                const ScaledConfig& cfg);

/// Convenience pipeline: induce, recurrent class from the canonical start,
/// stationary distribution, metrics. A periodic class has no limiting
/// distribution; its metrics are then long-run time averages and `period`
/// says so.
struct ChainAnalysis {
  std::vector<StateId> recurrent;
  int period = 1;
  Distribution distribution;
  Metrics metrics;
};

ChainAnalysis analyze_policy(const TransitionKernel& kernel, const Policy& policy,
                             const ScaledConfig& cfg, const SteadyStateOptions& opts = {});

}  // namespace ehaoi
