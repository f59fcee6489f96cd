#include "ehaoi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ehaoi {

namespace {

void check_options(const SolverOptions& opts) {
  if (!(opts.eps_c > 0.0)) throw Error(ErrorKind::kOutOfRange, "eps_c must be positive");
  if (!(opts.damping >= 0.0 && opts.damping < 1.0)) {
    throw Error(ErrorKind::kOutOfRange, "damping must lie in [0, 1)");
  }
}

struct SweepStats {
  double max_diff;
  double min_diff;
  double max_abs;
};

// Tracks the stopping rule and the span monotonicity flag across sweeps.
class SpanMonitor {
 public:
  explicit SpanMonitor(double eps) : eps_(eps) {}

  bool update(const SweepStats& st) {
    span_ = st.max_diff - st.min_diff;
    const double slack = 1e-12 * (1.0 + st.max_abs);
    if (span_ > last_ + slack) monotone_ = false;
    last_ = span_;
    mid_ = 0.5 * (st.max_diff + st.min_diff);
    return span_ < eps_;
  }

  double span() const { return span_; }
  double mid() const { return mid_; }
  bool monotone() const { return monotone_; }

 private:
  double eps_;
  double last_ = std::numeric_limits<double>::infinity();
  double span_ = std::numeric_limits<double>::infinity();
  double mid_ = 0.0;
  bool monotone_ = true;
};

double expected_value(std::span<const Transition> row, const std::vector<double>& v) {
  double acc = 0.0;
  for (const auto& t : row) acc += t.prob * v[index_of(t.next)];
  return acc;
}

}  // namespace

SolveResult relative_value_iteration(const TransitionKernel& kernel, const RewardSpec& spec,
                                     const SolverOptions& opts) {
  check_reward_spec(spec);
  check_options(opts);
  const std::size_t n = kernel.num_states();
  if (n == 0 || kernel.num_rows() == 0) throw Error(ErrorKind::kEmptyKernel, "kernel is empty");
  if (index_of(opts.reference) >= n) {
    throw Error(ErrorKind::kOutOfRange, "reference state out of range");
  }

  const std::vector<double> r = reward_vector(kernel.space(), spec);
  const double tau = opts.damping;
  const std::size_t ref = index_of(opts.reference);

  SolveResult res;
  std::vector<double> v(n, 0.0), w(n);
  SpanMonitor monitor(opts.eps_c);

  for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
    SweepStats st{-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t s = 0; s < n; ++s) {
      const StateId sid = state_id(s);
      double best = -std::numeric_limits<double>::infinity();
      for (auto slot = kernel.first_slot(sid); slot < kernel.end_slot(sid); ++slot) {
        best = std::max(best, expected_value(kernel.row_at(slot), v));
      }
      double next = r[s] + best;
      if (tau > 0.0) next = (1.0 - tau) * next + tau * v[s];
      w[s] = next;
      const double diff = next - v[s];
      st.max_diff = std::max(st.max_diff, diff);
      st.min_diff = std::min(st.min_diff, diff);
      st.max_abs = std::max(st.max_abs, std::abs(next));
    }
    const bool done = monitor.update(st);
    const double offset = w[ref];
    for (std::size_t s = 0; s < n; ++s) v[s] = w[s] - offset;
    res.iterations = iter;
    if (done) {
      res.converged = true;
      break;
    }
  }

  res.span_at_stop = monitor.span();
  res.span_monotone = monitor.monotone();
  res.gain = monitor.mid() / (1.0 - tau);

  std::vector<Action> actions(n, Action::idle());
  for (std::size_t s = 0; s < n; ++s) {
    const StateId sid = state_id(s);
    double best = 0.0;
    for (auto slot = kernel.first_slot(sid); slot < kernel.end_slot(sid); ++slot) {
      const double q = expected_value(kernel.row_at(slot), v);
      // Only a clear improvement displaces a lower-index action.
      if (slot == kernel.first_slot(sid) || q > best + 1e-12 * (1.0 + std::abs(best))) {
        best = q;
        actions[s] = kernel.action_at(slot);
      }
    }
  }
  res.policy = Policy(std::move(actions));
  res.values = std::move(v);
  return res;
}

PolicyEvaluation evaluate_policy(const TransitionKernel& kernel, const Policy& policy,
                                 const RewardSpec& spec, StateId start,
                                 const SolverOptions& opts) {
  check_reward_spec(spec);
  check_options(opts);
  const InducedChain chain = induce_chain(kernel, policy);
  const std::vector<StateId> states = reachable_states(chain, start);
  const std::size_t n = states.size();

  // Local CSR over the reachable (closed) set.
  std::vector<std::size_t> offset{0};
  std::vector<std::size_t> next;
  std::vector<double> prob;
  std::vector<double> r(n);
  std::size_t ref = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (states[u] == start) ref = u;
    r[u] = reward(kernel.space().decode(states[u]), spec, kernel.space().a_max());
    for (const auto& t : chain.row(states[u])) {
      next.push_back(static_cast<std::size_t>(
          std::lower_bound(states.begin(), states.end(), t.next) - states.begin()));
      prob.push_back(t.prob);
    }
    offset.push_back(next.size());
  }

  const double tau = opts.damping;
  std::vector<double> v(n, 0.0), w(n);
  SpanMonitor monitor(opts.eps_c);
  PolicyEvaluation out;
  for (std::size_t iter = 1; iter <= opts.max_iter; ++iter) {
    SweepStats st{-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t u = 0; u < n; ++u) {
      double acc = 0.0;
      for (std::size_t e = offset[u]; e < offset[u + 1]; ++e) acc += prob[e] * v[next[e]];
      double x = r[u] + acc;
      if (tau > 0.0) x = (1.0 - tau) * x + tau * v[u];
      w[u] = x;
      st.max_diff = std::max(st.max_diff, x - v[u]);
      st.min_diff = std::min(st.min_diff, x - v[u]);
      st.max_abs = std::max(st.max_abs, std::abs(x));
    }
    const bool done = monitor.update(st);
    const double o = w[ref];
    for (std::size_t u = 0; u < n; ++u) v[u] = w[u] - o;
    out.iterations = iter;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.span_at_stop = monitor.span();
  out.gain = monitor.mid() / (1.0 - tau);
  return out;
}

}  // namespace ehaoi
