#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "ehaoi/solver.hpp"

namespace ehaoi {

double gain_from_start(const InducedChain& chain, const std::vector<double>& reward,
                       StateId start) {
  const auto classes = closed_classes(chain, start);
  std::unordered_map<std::size_t, double> closed_gain;
  for (const auto& cls : classes) {
    const Distribution d = class_stationary(chain, cls);
    double g = 0.0;
    for (std::size_t i = 0; i < d.support.size(); ++i) g += d.prob[i] * reward[index_of(d.support[i])];
    for (StateId s : cls) closed_gain.emplace(index_of(s), g);
  }
  if (auto it = closed_gain.find(index_of(start)); it != closed_gain.end()) return it->second;

  std::vector<StateId> transient;
  for (StateId s : reachable_states(chain, start)) {
    if (!closed_gain.contains(index_of(s))) transient.push_back(s);
  }
  const auto n = static_cast<Eigen::Index>(transient.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (const auto& t : chain.row(transient[u])) {
      if (auto it = closed_gain.find(index_of(t.next)); it != closed_gain.end()) {
        b[u] += t.prob * it->second;
      } else {
        const auto v = std::lower_bound(transient.begin(), transient.end(), t.next) - transient.begin();
        a(u, v) -= t.prob;
      }
    }
  }
  const Eigen::VectorXd x = a.partialPivLu().solve(b);
  const auto pos = std::lower_bound(transient.begin(), transient.end(), start) - transient.begin();
  return x[pos];
}

std::size_t count_policies(const TransitionKernel& kernel) {
  std::size_t total = 1;
  for (std::size_t s = 0; s < kernel.num_states(); ++s) {
    const std::size_t k = kernel.actions(state_id(s)).size();
    if (k > 1 && total > std::numeric_limits<std::size_t>::max() / k) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= k;
  }
  return total;
}

SolveResult policy_enumeration_oracle(const TransitionKernel& kernel, const RewardSpec& spec,
                                      const OracleOptions& opts) {
  check_reward_spec(spec);
  const std::size_t n = kernel.num_states();
  if (n == 0 || kernel.num_rows() == 0) throw Error(ErrorKind::kEmptyKernel, "kernel is empty");
  const std::size_t total = count_policies(kernel);
  if (total > opts.max_policies) {
    std::ostringstream os;
    os << "policy space has " << total << " members, limit is " << opts.max_policies;
    throw Error(ErrorKind::kTooManyPolicies, os.str());
  }

  const std::vector<double> r = reward_vector(kernel.space(), spec);
  const StateId start = canonical_start(kernel.space());

  // Odometer over choice indices; the last state varies fastest, so the
  // enumeration visits action vectors in lexicographic order.
  std::vector<std::size_t> choice(n, 0);
  std::vector<Action> actions(n);
  for (std::size_t s = 0; s < n; ++s) actions[s] = kernel.actions(state_id(s))[0];

  SolveResult best;
  best.gain = -std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
  while (true) {
    const Policy candidate(actions);
    const double g = gain_from_start(induce_chain(kernel, candidate), r, start);
    ++evaluated;
    if (g > best.gain + 1e-11) {
      best.gain = g;
      best.policy = candidate;
    }
    std::size_t s = n;
    while (s > 0) {
      --s;
      const auto options = kernel.actions(state_id(s));
      if (++choice[s] < options.size()) {
        actions[s] = options[choice[s]];
        break;
      }
      choice[s] = 0;
      actions[s] = options[0];
      if (s == 0) {
        s = n;  // wrapped around: done
        break;
      }
    }
    if (s == n) break;
  }
  best.iterations = evaluated;
  best.converged = true;
  return best;
}

}  // namespace ehaoi
