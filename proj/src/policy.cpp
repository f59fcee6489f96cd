#include "ehaoi/policy.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace ehaoi {

void check_policy(const TransitionKernel& kernel, const Policy& policy) {
  if (policy.size() != kernel.num_states()) {
    std::ostringstream os;
    os << "policy covers " << policy.size() << " states, kernel has " << kernel.num_states();
    throw Error(ErrorKind::kInfeasiblePolicyAction, os.str());
  }
  for (std::size_t s = 0; s < policy.size(); ++s) {
    if (!kernel.is_feasible(state_id(s), policy[state_id(s)])) {
      std::ostringstream os;
      os << "policy action " << policy[state_id(s)].index() << " infeasible at state " << s;
      throw Error(ErrorKind::kInfeasiblePolicyAction, os.str());
    }
  }
}

void write_policy(std::ostream& os, const Policy& policy, const StateSpace& space, int scale) {
  os << "# ehaoi policy\n";
  os << "# scale " << scale << "\n";
  os << "# state_id age mode harvester battery action\n";
  for (std::size_t i = 0; i < policy.size(); ++i) {
    const State s = space.decode(state_id(i));
    os << i << ' ' << s.age << ' ' << to_string(s.mode) << ' ' << s.harvester << ' ' << s.battery
       << ' ' << policy[state_id(i)].index() << '\n';
  }
}

namespace {

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::kConfigParse,
              "policy file line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Policy read_policy(std::istream& is, const StateSpace& space) {
  std::vector<Action> actions(space.size(), Action::idle());
  std::vector<bool> seen(space.size(), false);
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::size_t id = 0;
    int age = 0, harvester = 0, battery = 0, action = 0;
    std::string mode;
    if (!(ls >> id >> age >> mode >> harvester >> battery >> action)) {
      parse_error(line_no, "expected `state_id age mode harvester battery action`");
    }
    if (id >= space.size()) parse_error(line_no, "state id out of range");
    const State s = space.decode(state_id(id));
    if (s.age != age || to_string(s.mode) != mode || s.harvester != harvester ||
        s.battery != battery) {
      parse_error(line_no, "state fields do not match state id for this instance");
    }
    if (action < 0 || action > space.num_tx_modes()) parse_error(line_no, "action out of range");
    if (seen[id]) parse_error(line_no, "duplicate state id");
    seen[id] = true;
    actions[id] = Action::from_index(action);
    ++rows;
  }
  if (rows != space.size()) {
    throw Error(ErrorKind::kConfigParse, "policy file has " + std::to_string(rows) +
                                             " rows, instance has " +
                                             std::to_string(space.size()) + " states");
  }
  return Policy(std::move(actions));
}

}  // namespace ehaoi
