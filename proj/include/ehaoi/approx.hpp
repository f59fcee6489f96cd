#pragma once

#include <vector>

#include "ehaoi/instance.hpp"

namespace ehaoi {

struct ApproxOptions {
  int k0 = 20;
  double epsilon = 1e-6;
  /// Additive increase of the age cap between coarse probes.
  int step = 5;
  /// After the first coarse hit, rescan the skipped caps one by one so the
  /// returned cap is the smallest passing one.
  bool refine = true;
  int ceiling = 500;
  SolverOptions solver;
  SteadyStateOptions steady;
};

struct ApproxProbe {
  int a_max;
  double peak_prob;
};

struct ApproxResult {
  int a_max_final = 0;
  Policy policy;
  double peak_prob_final = 0.0;
  /// Probes at caps below the final one, then the final cap; sorted by cap.
  std::vector<ApproxProbe> history;
  /// Every probe in the order it was made.
  std::vector<ApproxProbe> evaluations;
  /// False when the cap probability went up somewhere along `history`.
  bool history_monotone = true;
  SolveResult solve;
  Metrics metrics;
};

/// Grows the age cap until the average-age-optimal policy sits at the cap
/// with probability at most epsilon. The `a_max` of `base` is ignored.
/// Throws Diverged past `ceiling`.
ApproxResult find_amax(const SystemConfig& base, const ApproxOptions& opts = {});

/// Solves the average-age problem at cap `a_max` and returns the optimal
/// policy's probability of sitting at the cap.
double optimal_peak_prob_at(const SystemConfig& base, int a_max, const SolverOptions& solver = {},
                            const SteadyStateOptions& steady = {});

}  // namespace ehaoi
