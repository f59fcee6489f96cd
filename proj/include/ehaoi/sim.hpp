#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ehaoi/model.hpp"
#include "ehaoi/policy.hpp"
#include "ehaoi/statespace.hpp"

namespace ehaoi {

struct SimConfig {
  std::uint64_t horizon = 1'000'000;
  std::uint64_t burn_in = 10'000;
  std::uint64_t seed = 1;
  /// Defaults to the canonical start state.
  std::optional<State> start;
  /// Number of batches for the batch-means standard errors.
  std::size_t batches = 100;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct EmpiricalMetrics {
  Estimate avg_age;
  Estimate peak_hit_prob;
  Estimate avg_tx_power;  // config units
  Estimate avg_battery;   // config units
  std::uint64_t slots = 0;
  /// Post-burn-in visits per StateId.
  std::vector<std::uint64_t> visit_counts;
};

enum class TxOutcome { kNone, kSuccess, kError };

std::string_view to_string(TxOutcome outcome);

/// One slot of a sample path. Energies are in scaled units; `state` is the
/// state at the start of the slot.
struct TraceEvent {
  std::uint64_t slot = 0;
  State state;
  Action action;
  TxOutcome outcome = TxOutcome::kNone;
  int recovered = 0;
  int harvested = 0;
  int spent = 0;
};

/// Independent random streams, one per noise source.
enum class NoiseSource : std::uint64_t { kTxError = 1, kRecovery = 2, kHarvester = 3 };

/// Sample-path simulator of the physical system. Within a slot: transmission
/// outcome, then recovery draw, then harvest credit, battery clamp and finally
/// the harvester transition.
class Simulator {
 public:
  Simulator(const ScaledConfig& cfg, const StateSpace& space, const Policy& policy,
            std::uint64_t seed);

  /// Advances one slot from `s`; fills `event` and returns the next state.
  /// Throws InfeasiblePolicyAction if the policy picks an unaffordable mode.
  State step(const State& s, std::uint64_t slot, TraceEvent& event);

 private:
  class Stream {
   public:
    Stream(std::uint64_t seed, NoiseSource source);
    double uniform();

   private:
    std::uint64_t state_;
  };

  const ScaledConfig& cfg_;
  const StateSpace& space_;
  const Policy& policy_;
  Stream error_;
  Stream recovery_;
  Stream harvester_;
};

EmpiricalMetrics simulate(const ScaledConfig& cfg, const StateSpace& space, const Policy& policy,
                          const SimConfig& sim);

/// Full per-slot log of `sim.horizon` slots (burn-in included).
std::vector<TraceEvent> trace(const ScaledConfig& cfg, const StateSpace& space,
                              const Policy& policy, const SimConfig& sim);

/// CSV `slot,age,mode,harvester,battery,action,outcome,recovered,harvested`
/// with battery and energies in config units.
void write_trace_csv(std::ostream& os, const std::vector<TraceEvent>& events,
                     const ScaledConfig& cfg);

}  // namespace ehaoi
