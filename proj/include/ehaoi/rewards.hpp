#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ehaoi/statespace.hpp"

namespace ehaoi {

/// r' at the age cap, 0 elsewhere. Maximizing its average minimizes the
/// steady-state probability of sitting at the cap.
struct PeakHit {
  double r_prime = -1.0;
};

/// -age in every state.
struct AverageAge {};

/// -alpha * age below the cap, -a_max at the cap.
struct Weighted {
  double alpha = 1.0;
};

using RewardSpec = std::variant<PeakHit, AverageAge, Weighted>;

/// Throws OutOfRange for r' >= 0 or alpha outside [0, 1].
void check_reward_spec(const RewardSpec& spec);

/// "peak", "avg" or "weighted".
std::string objective_name(const RewardSpec& spec);
/// Weighted alpha, or NaN for the other objectives.
double objective_alpha(const RewardSpec& spec);

/// State reward; never depends on the action.
double reward(const State& s, const RewardSpec& spec, int a_max);

/// reward() for every StateId of `space`.
std::vector<double> reward_vector(const StateSpace& space, const RewardSpec& spec);

}  // namespace ehaoi
