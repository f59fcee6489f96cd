#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ehaoi/model.hpp"

namespace ehaoi {

/// System mode: long idle, the slot right after a transmission with mode m,
/// or the j-th idle slot inside m's recovery window. Modes are 1-based.
struct SystemMode {
  enum class Kind : std::uint8_t { kLongIdle, kJustTx, kPostTx };

  Kind kind = Kind::kLongIdle;
  int tx_mode = 0;
  int idle_slots = 0;

  static constexpr SystemMode long_idle() { return {}; }
  static constexpr SystemMode just_tx(int m) { return {Kind::kJustTx, m, 0}; }
  static constexpr SystemMode post_tx(int m, int j) { return {Kind::kPostTx, m, j}; }

  friend bool operator==(const SystemMode&, const SystemMode&) = default;
};

/// "0" for long idle, "m" after transmitting with m, "m^j" inside the recovery window.
std::string to_string(SystemMode mode);

/// (age, system mode, harvester state, battery). Harvester index is 0-based;
/// battery is in scaled energy units.
struct State {
  int age = 1;
  SystemMode mode;
  int harvester = 0;
  int battery = 0;

  friend bool operator==(const State&, const State&) = default;
};

/// 0 = idle, m in [1, M] = transmit with mode m.
class Action {
 public:
  constexpr Action() = default;
  static constexpr Action idle() { return Action(0); }
  static constexpr Action tx(int mode) { return Action(mode); }
  static constexpr Action from_index(int index) { return Action(index); }

  constexpr int index() const { return index_; }
  constexpr bool is_idle() const { return index_ == 0; }
  constexpr int mode() const { return index_; }

  friend constexpr bool operator==(Action, Action) = default;

 private:
  constexpr explicit Action(int index) : index_(index) {}
  int index_ = 0;
};

/// Dense state index.
enum class StateId : std::uint32_t {};

constexpr std::size_t index_of(StateId id) { return static_cast<std::size_t>(id); }
constexpr StateId state_id(std::size_t index) { return static_cast<StateId>(index); }

inline constexpr std::size_t kDefaultStateCap = 10'000'000;

/// Mixed-radix bijection between State and StateId over the full Cartesian
/// product age x mode x harvester x battery (age-major, battery-minor).
class StateSpace {
 public:
  StateSpace(int a_max, int num_tx_modes, int n_rec, int num_harvester_states, int b_max_scaled);

  std::size_t size() const { return size_; }
  int a_max() const { return a_max_; }
  int num_tx_modes() const { return num_tx_modes_; }
  int n_rec() const { return n_rec_; }
  int num_harvester_states() const { return num_harvester_; }
  int b_max() const { return b_max_; }
  int num_system_modes() const { return 1 + num_tx_modes_ + num_tx_modes_ * n_rec_; }

  int mode_index(SystemMode mode) const;
  SystemMode mode_at(int index) const;

  bool contains(const State& s) const;
  StateId encode(const State& s) const;
  State decode(StateId id) const;

 private:
  int a_max_;
  int num_tx_modes_;
  int n_rec_;
  int num_harvester_;
  int b_max_;
  std::size_t size_;
};

/// Throws StateSpaceTooLarge when the product exceeds `cap`.
StateSpace enumerate_states(const ScaledConfig& cfg, std::size_t cap = kDefaultStateCap);

/// Idle first, then every mode whose energy check passes:
/// battery + harvest(current harvester state) - power >= 0.
std::vector<Action> feasible_actions(const State& s, const ScaledConfig& cfg);

struct Outcome {
  State next;
  double prob;
};

/// One-slot transition law for a single (state, action). Zero-probability
/// branches are omitted and coinciding branches merged. Throws
/// InfeasibleAction when `d` is not in feasible_actions(s).
std::vector<Outcome> transition(const State& s, Action d, const ScaledConfig& cfg);

struct Transition {
  StateId next;
  double prob;
};

/// Sparse per-(state, feasible action) next-state distributions, stored CSR
/// style. Rows are sorted by next StateId.
class TransitionKernel {
 public:
  TransitionKernel() : space_(2, 1, 0, 1, 0) {}

  const StateSpace& space() const { return space_; }
  std::size_t num_states() const { return space_.size(); }
  std::size_t num_rows() const { return actions_.size(); }
  std::size_t num_entries() const { return entries_.size(); }

  /// Range of row slots belonging to `s`.
  std::size_t first_slot(StateId s) const { return slot_offset_[index_of(s)]; }
  std::size_t end_slot(StateId s) const { return slot_offset_[index_of(s) + 1]; }

  std::span<const Action> actions(StateId s) const;
  Action action_at(std::size_t slot) const { return actions_[slot]; }
  std::span<const Transition> row_at(std::size_t slot) const;

  bool is_feasible(StateId s, Action a) const;
  /// Throws InfeasibleAction when the pair has no row.
  std::span<const Transition> row(StateId s, Action a) const;

 private:
  friend TransitionKernel build_kernel(const ScaledConfig&, const StateSpace&, unsigned);

  StateSpace space_;
  std::vector<std::size_t> slot_offset_;   // num_states + 1
  std::vector<Action> actions_;            // per slot
  std::vector<std::size_t> entry_offset_;  // num_rows + 1
  std::vector<Transition> entries_;
};

/// Builds every feasible row. Rows are partitioned across `workers` threads;
/// the result does not depend on the partitioning.
TransitionKernel build_kernel(const ScaledConfig& cfg, const StateSpace& space,
                              unsigned workers = 1);

/// Debug dump, one `state_id action next_id prob` line per entry.
void write_kernel(std::ostream& os, const TransitionKernel& kernel);

}  // namespace ehaoi
