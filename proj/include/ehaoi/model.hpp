#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ehaoi/errors.hpp"

namespace ehaoi {

/// A transmission mode: energy spent per transmission slot and the
/// probability that the packet is lost.
struct TxMode {
  int power = 1;
  double error_prob = 0.0;

  friend bool operator==(const TxMode&, const TxMode&) = default;
};

/// Finite Markov-modulated energy source. Row i of `transition` holds the
/// probabilities of moving from harvester state i to each state j; in state i
/// the battery receives `power[i]` units per slot.
struct HarvesterModel {
  std::vector<std::vector<double>> transition;
  std::vector<int> power;

  std::size_t num_states() const { return power.size(); }

  friend bool operator==(const HarvesterModel&, const HarvesterModel&) = default;
};

/// Probabilistic battery recovery: during each of the `n_rec` idle slots that
/// follow a transmission with power P, P / n_rec units are recovered with
/// probability `p_rec`. n_rec = 0 disables recovery.
struct RecoveryModel {
  int n_rec = 0;
  double p_rec = 0.0;

  bool enabled() const { return n_rec > 0; }

  friend bool operator==(const RecoveryModel&, const RecoveryModel&) = default;
};

/// A full problem instance in config energy units.
struct SystemConfig {
  int b_max = 0;
  int a_max = 2;
  std::vector<TxMode> modes;
  HarvesterModel harvester;
  RecoveryModel recovery;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

inline constexpr double kStochasticTolerance = 1e-12;

/// A SystemConfig that has passed every invariant check. Only
/// `validate_config` can produce one.
class ValidatedConfig {
 public:
  const SystemConfig& get() const noexcept { return config_; }
  const SystemConfig* operator->() const noexcept { return &config_; }

 private:
  explicit ValidatedConfig(SystemConfig config) : config_(std::move(config)) {}
  friend ValidatedConfig validate_config(SystemConfig raw);

  SystemConfig config_;
};

/// Collects every invariant violation in `raw`; throws ConfigError listing
/// all of them, or returns the validated config.
ValidatedConfig validate_config(SystemConfig raw);

/// Returns the violations without throwing (empty means valid).
std::vector<Violation> check_config(const SystemConfig& raw);

/// Config with every energy quantity multiplied by `scale = max(n_rec, 1)`,
/// so the per-slot recovery increment power/n_rec is an exact integer.
struct ScaledConfig {
  int scale = 1;
  int b_max = 0;  // scaled
  int a_max = 2;
  std::vector<int> mode_power;         // scaled
  std::vector<double> mode_error_prob;
  std::vector<int> recovery_increment;  // scaled; 0 when recovery disabled
  std::vector<std::vector<double>> harvester_transition;
  std::vector<int> harvest_power;  // scaled
  int n_rec = 0;
  double p_rec = 0.0;

  int num_modes() const { return static_cast<int>(mode_power.size()); }
  int num_harvester_states() const { return static_cast<int>(harvest_power.size()); }

  /// Scaled energy back to config units.
  double descale(double scaled_energy) const { return scaled_energy / scale; }
};

ScaledConfig scale_energies(const ValidatedConfig& cfg);

/// Inverse of scale_energies; exact for any ScaledConfig it produced.
SystemConfig descale(const ScaledConfig& scaled);

}  // namespace ehaoi
