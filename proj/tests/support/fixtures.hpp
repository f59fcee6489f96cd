#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ehaoi/instance.hpp"

namespace ehaoi::testing {

inline SystemConfig on_off_harvester(SystemConfig c, int on_power) {
  c.harvester.transition = {{0.9, 0.1}, {0.1, 0.9}};
  c.harvester.power = {0, on_power};
  return c;
}

/// Two modes {3, 0.4} and {6, 1e-3}, on-off harvester with 0.9 persistence.
inline SystemConfig two_mode_preset(int b_max, double p_rec, int n_rec = 2, int a_max = 20,
                                    int on_power = 2) {
  SystemConfig c;
  c.b_max = b_max;
  c.a_max = a_max;
  c.modes = {{3, 0.4}, {6, 1e-3}};
  c.recovery = {n_rec, p_rec};
  return on_off_harvester(c, on_power);
}

/// 18 states: one mode {2, 0.4}, constant harvest 1, B = 2, A_max = 3.
inline SystemConfig tiny18() {
  SystemConfig c;
  c.b_max = 2;
  c.a_max = 3;
  c.modes = {{2, 0.4}};
  c.harvester.transition = {{1.0}};
  c.harvester.power = {1};
  return c;
}

/// Error-free mode paid for by the harvest of every slot.
inline SystemConfig every_slot(int a_max = 5) {
  SystemConfig c;
  c.b_max = 1;
  c.a_max = a_max;
  c.modes = {{1, 0.0}};
  c.harvester.transition = {{1.0}};
  c.harvester.power = {1};
  return c;
}

/// M = 2 with P = 2 and 4, on-off harvest 0/2, N_rec = 2.
inline SystemConfig sample_path_setup(double p_rec = 0.8, int b_max = 6, int a_max = 10) {
  SystemConfig c;
  c.b_max = b_max;
  c.a_max = a_max;
  c.modes = {{2, 0.3}, {4, 0.05}};
  c.recovery = {2, p_rec};
  return on_off_harvester(c, 2);
}

struct RandomLimits {
  int max_modes = 3;
  int max_n_rec = 3;
  int max_harvester = 3;
  int max_battery = 15;
  int max_age = 12;
  int max_power = 4;
};

/// Random valid instance; zero matrix entries are drawn on purpose so that
/// sparse rows get exercised.
inline SystemConfig random_config(std::mt19937_64& rng, const RandomLimits& lim = {}) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
  while (true) {
    SystemConfig c;
    c.a_max = uni(2, lim.max_age);
    c.b_max = uni(1, lim.max_battery);
    const int m = uni(1, lim.max_modes);
    for (int i = 0; i < m; ++i) {
      const double e = uni(0, 5) == 0 ? 0.0 : real() * 0.9;
      c.modes.push_back({uni(1, lim.max_power), e});
    }
    const int nh = uni(1, lim.max_harvester);
    for (int i = 0; i < nh; ++i) {
      std::vector<double> row(nh);
      double sum = 0.0;
      for (auto& x : row) {
        x = uni(0, 3) == 0 ? 0.0 : real();
        sum += x;
      }
      if (sum == 0.0) {
        row[uni(0, nh - 1)] = 1.0;
        sum = 1.0;
      }
      for (auto& x : row) x /= sum;
      // Put the rounding residue on the largest entry so the row sums to 1.
      double total = 0.0;
      for (double x : row) total += x;
      *std::max_element(row.begin(), row.end()) += 1.0 - total;
      c.harvester.transition.push_back(row);
      c.harvester.power.push_back(uni(0, 3));
    }
    const int n_rec = uni(0, lim.max_n_rec);
    c.recovery = {n_rec, n_rec > 0 ? (uni(0, 4) == 0 ? 1.0 : real()) : 0.0};
    if (check_config(c).empty()) return c;
  }
}

inline Instance make_instance(const SystemConfig& c, unsigned workers = 1) {
  return build_instance(validate_config(c), kDefaultStateCap, workers);
}

/// Uniformly random feasible action in every state.
inline Policy random_policy(const TransitionKernel& kernel, std::mt19937_64& rng) {
  std::vector<Action> acts(kernel.num_states());
  for (std::size_t s = 0; s < acts.size(); ++s) {
    const auto feasible = kernel.actions(state_id(s));
    acts[s] = feasible[std::uniform_int_distribution<std::size_t>(0, feasible.size() - 1)(rng)];
  }
  return Policy(std::move(acts));
}

/// Transmit with the lowest-index affordable mode whenever possible.
inline Policy greedy_policy(const TransitionKernel& kernel) {
  std::vector<Action> acts(kernel.num_states(), Action::idle());
  for (std::size_t s = 0; s < acts.size(); ++s) {
    const auto feasible = kernel.actions(state_id(s));
    if (feasible.size() > 1) acts[s] = feasible[1];
  }
  return Policy(std::move(acts));
}

}  // namespace ehaoi::testing
