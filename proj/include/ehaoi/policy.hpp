#pragma once

#include <iosfwd>
#include <vector>

#include "ehaoi/statespace.hpp"

namespace ehaoi {

/// Stationary deterministic policy: one action per StateId.
class Policy {
 public:
  Policy() = default;
  explicit Policy(std::vector<Action> actions) : actions_(std::move(actions)) {}

  static Policy all_idle(std::size_t num_states) {
    return Policy(std::vector<Action>(num_states, Action::idle()));
  }

  std::size_t size() const { return actions_.size(); }
  Action operator[](StateId s) const { return actions_[index_of(s)]; }
  Action& operator[](StateId s) { return actions_[index_of(s)]; }
  const std::vector<Action>& actions() const { return actions_; }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<Action> actions_;
};

/// Throws InfeasiblePolicyAction unless the policy covers every state of the
/// kernel with a feasible action.
void check_policy(const TransitionKernel& kernel, const Policy& policy);

/// Text rows `state_id age mode harvester battery action`, preceded by `#`
/// comment lines recording the energy scale. Battery is in scaled units.
void write_policy(std::ostream& os, const Policy& policy, const StateSpace& space, int scale);

/// Reads the format produced by write_policy; rows must match `space`.
/// Throws ConfigParse on malformed or inconsistent input.
Policy read_policy(std::istream& is, const StateSpace& space);

}  // namespace ehaoi
