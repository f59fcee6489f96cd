#include "ehaoi/chain.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ehaoi {

InducedChain induce_chain(const TransitionKernel& kernel, const Policy& policy) {
  check_policy(kernel, policy);
  InducedChain chain;
  const std::size_t n = kernel.num_states();
  chain.offset_.reserve(n + 1);
  chain.offset_.push_back(0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto row = kernel.row(state_id(s), policy[state_id(s)]);
    chain.entries_.insert(chain.entries_.end(), row.begin(), row.end());
    chain.offset_.push_back(chain.entries_.size());
  }
  return chain;
}

State canonical_start_state(const StateSpace& space) {
  return State{space.a_max(), SystemMode::long_idle(), 0, 0};
}

StateId canonical_start(const StateSpace& space) {
  return space.encode(canonical_start_state(space));
}

std::vector<StateId> reachable_states(const InducedChain& chain, StateId start) {
  std::vector<char> seen(chain.size(), 0);
  std::vector<StateId> stack{start};
  std::vector<StateId> out;
  seen[index_of(start)] = 1;
  while (!stack.empty()) {
    const StateId u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (const auto& t : chain.row(u)) {
      if (!seen[index_of(t.next)]) {
        seen[index_of(t.next)] = 1;
        stack.push_back(t.next);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<StateId>> closed_classes(const InducedChain& chain, StateId start) {
  // Iterative Tarjan restricted to the part of the graph reachable from start.
  const std::size_t n = chain.size();
  constexpr int kUnvisited = -1;
  std::vector<int> index(n, kUnvisited);
  std::vector<int> low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<StateId> scc_stack;
  struct Frame {
    StateId node;
    std::size_t edge;
  };
  std::vector<Frame> call;
  std::vector<std::vector<StateId>> closed;
  int counter = 0;

  auto open = [&](StateId v) {
    index[index_of(v)] = low[index_of(v)] = counter++;
    scc_stack.push_back(v);
    on_stack[index_of(v)] = 1;
    call.push_back({v, 0});
  };
  open(start);

  while (!call.empty()) {
    Frame& f = call.back();
    const auto row = chain.row(f.node);
    if (f.edge < row.size()) {
      const StateId w = row[f.edge++].next;
      if (index[index_of(w)] == kUnvisited) {
        open(w);
      } else if (on_stack[index_of(w)]) {
        low[index_of(f.node)] = std::min(low[index_of(f.node)], index[index_of(w)]);
      }
      continue;
    }
    const StateId v = f.node;
    call.pop_back();
    if (!call.empty()) {
      const StateId parent = call.back().node;
      low[index_of(parent)] = std::min(low[index_of(parent)], low[index_of(v)]);
    }
    if (low[index_of(v)] != index[index_of(v)]) continue;

    std::vector<StateId> component;
    StateId w;
    do {
      w = scc_stack.back();
      scc_stack.pop_back();
      on_stack[index_of(w)] = 0;
      component.push_back(w);
    } while (w != v);

    // A component is closed iff no edge leaves it. Members of the component
    // were just popped, so membership is tested by sorted lookup.
    std::sort(component.begin(), component.end());
    bool is_closed = true;
    for (StateId u : component) {
      for (const auto& t : chain.row(u)) {
        if (!std::binary_search(component.begin(), component.end(), t.next)) {
          is_closed = false;
          break;
        }
      }
      if (!is_closed) break;
    }
    if (is_closed) closed.push_back(std::move(component));
  }
  std::sort(closed.begin(), closed.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return closed;
}

std::vector<StateId> recurrent_class(const InducedChain& chain, StateId start) {
  auto classes = closed_classes(chain, start);
  if (classes.size() != 1) {
    std::ostringstream os;
    os << classes.size() << " closed classes reachable from state " << index_of(start);
    throw Error(ErrorKind::kMultipleRecurrentClasses, os.str());
  }
  return std::move(classes.front());
}

int class_period(const InducedChain& chain, std::span<const StateId> cls) {
  if (cls.empty()) return 1;
  // BFS levels from the first member; the period is the gcd of
  // level(u) + 1 - level(v) over all edges u -> v inside the class.
  auto local = [&](StateId s) -> long {
    auto it = std::lower_bound(cls.begin(), cls.end(), s);
    return (it != cls.end() && *it == s) ? static_cast<long>(it - cls.begin()) : -1;
  };
  std::vector<long> level(cls.size(), -1);
  std::vector<std::size_t> queue{0};
  level[0] = 0;
  long g = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t u = queue[head];
    for (const auto& t : chain.row(cls[u])) {
      const long v = local(t.next);
      if (v < 0) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(static_cast<std::size_t>(v));
      } else {
        g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
      }
    }
  }
  return g == 0 ? 1 : static_cast<int>(g);
}

double stationary_residual(const InducedChain& chain, const Distribution& dist) {
  const auto& cls = dist.support;
  std::vector<double> next(cls.size(), 0.0);
  for (std::size_t u = 0; u < cls.size(); ++u) {
    for (const auto& t : chain.row(cls[u])) {
      auto it = std::lower_bound(cls.begin(), cls.end(), t.next);
      if (it != cls.end() && *it == t.next) next[it - cls.begin()] += dist.prob[u] * t.prob;
    }
  }
  double r = 0.0;
  for (std::size_t i = 0; i < cls.size(); ++i) r = std::max(r, std::abs(next[i] - dist.prob[i]));
  return r;
}

namespace {

void clean_and_normalize(std::vector<double>& p) {
  for (double& x : p) x = std::max(x, 0.0);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
}

std::vector<double> solve_direct(const InducedChain& chain, std::span<const StateId> cls) {
  using SpMat = Eigen::SparseMatrix<double>;
  const auto n = static_cast<Eigen::Index>(cls.size());
  auto local = [&](StateId s) {
    return static_cast<Eigen::Index>(std::lower_bound(cls.begin(), cls.end(), s) - cls.begin());
  };
  // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> triplets;
  const Eigen::Index last = n - 1;
  for (Eigen::Index u = 0; u < n; ++u) {
    for (const auto& t : chain.row(cls[u])) {
      const Eigen::Index v = local(t.next);
      if (v != last) triplets.emplace_back(v, u, t.prob);
    }
    if (u != last) triplets.emplace_back(u, u, -1.0);
    triplets.emplace_back(last, u, 1.0);
  }
  SpMat a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[last] = 1.0;

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorKind::kSingularSystem, "stationary system factorization failed");
  }
  Eigen::VectorXd x = lu.solve(rhs);
  for (int refine = 0; refine < 2; ++refine) {
    const Eigen::VectorXd r = rhs - a * x;
    x += lu.solve(r);
  }
  return std::vector<double>(x.data(), x.data() + n);
}

std::vector<double> solve_power(const InducedChain& chain, std::span<const StateId> cls,
                                const SteadyStateOptions& opts) {
  const std::size_t n = cls.size();
  std::vector<std::size_t> local_next;
  std::vector<std::size_t> offset{0};
  std::vector<double> prob;
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& t : chain.row(cls[u])) {
      local_next.push_back(
          static_cast<std::size_t>(std::lower_bound(cls.begin(), cls.end(), t.next) - cls.begin()));
      prob.push_back(t.prob);
    }
    offset.push_back(local_next.size());
  }
  std::vector<double> x(n, 1.0 / static_cast<double>(n)), y(n);
  for (std::size_t it = 0; it < opts.max_power_iterations; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t e = offset[u]; e < offset[u + 1]; ++e) y[local_next[e]] += x[u] * prob[e];
    }
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r = std::max(r, std::abs(y[i] - x[i]));
      // Lazy step; same fixed point, immune to periodicity.
      x[i] = 0.5 * (x[i] + y[i]);
    }
    if (r <= 0.5 * opts.residual_tolerance) return x;
  }
  throw Error(ErrorKind::kNotConverged, "power iteration did not reach the residual tolerance");
}

}  // namespace

Distribution class_stationary(const InducedChain& chain, std::span<const StateId> cls,
                              const SteadyStateOptions& opts) {
  Distribution d;
  d.support.assign(cls.begin(), cls.end());
  if (cls.size() == 1) {
    d.prob = {1.0};
    return d;
  }
  d.prob = cls.size() <= opts.direct_limit ? solve_direct(chain, cls) : solve_power(chain, cls, opts);
  clean_and_normalize(d.prob);
  const double r = stationary_residual(chain, d);
  if (!(r <= opts.residual_tolerance)) {
    std::ostringstream os;
    os << "stationary residual " << r << " exceeds " << opts.residual_tolerance;
    throw Error(ErrorKind::kSingularSystem, os.str());
  }
  return d;
}

Distribution steady_state(const InducedChain& chain, std::span<const StateId> cls,
                          const SteadyStateOptions& opts) {
  const int period = class_period(chain, cls);
  if (period != 1) {
    throw Error(ErrorKind::kPeriodicChain,
                "recurrent class has period " + std::to_string(period));
  }
  return class_stationary(chain, cls, opts);
}

Metrics metrics(const Distribution& dist, const StateSpace& space, const Policy& policy,
                const ScaledConfig& cfg) {
  Metrics m;
  for (std::size_t i = 0; i < dist.support.size(); ++i) {
    const StateId id = dist.support[i];
    const double p = dist.prob[i];
    const State s = space.decode(id);
    m.avg_age += p * s.age;
    if (s.age == space.a_max()) {
      m.peak_hit_prob += p;
    } else {
      m.below_cap_age += p * s.age;
    }
    const Action a = policy[id];
    if (!a.is_idle()) m.avg_tx_power += p * cfg.mode_power[a.mode() - 1];
    m.avg_battery += p * s.battery;
  }
  m.avg_tx_power = cfg.descale(m.avg_tx_power);
  m.avg_battery = cfg.descale(m.avg_battery);
  return m;
}

ChainAnalysis analyze_policy(const TransitionKernel& kernel, const Policy& policy,
                             const ScaledConfig& cfg, const SteadyStateOptions& opts) {
  const InducedChain chain = induce_chain(kernel, policy);
  ChainAnalysis out;
  out.recurrent = recurrent_class(chain, canonical_start(kernel.space()));
  out.period = class_period(chain, out.recurrent);
  out.distribution = class_stationary(chain, out.recurrent, opts);
  out.metrics = metrics(out.distribution, kernel.space(), policy, cfg);
  return out;
}

}  // namespace ehaoi
