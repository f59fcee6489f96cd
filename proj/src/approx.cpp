#include "ehaoi/approx.hpp"

#include <algorithm>
#include <sstream>

namespace ehaoi {

namespace {

SolvedInstance solve_at(const SystemConfig& base, int a_max, const SolverOptions& solver,
                        const SteadyStateOptions& steady) {
  SystemConfig cfg = base;
  cfg.a_max = a_max;
  const Instance inst = build_instance(validate_config(std::move(cfg)));
  return solve_and_analyze(inst, AverageAge{}, solver, steady);
}

}  // namespace

double optimal_peak_prob_at(const SystemConfig& base, int a_max, const SolverOptions& solver,
                            const SteadyStateOptions& steady) {
  return solve_at(base, a_max, solver, steady).analysis.metrics.peak_hit_prob;
}

ApproxResult find_amax(const SystemConfig& base, const ApproxOptions& opts) {
  if (opts.k0 < 2) throw Error(ErrorKind::kOutOfRange, "k0 must be at least 2");
  if (!(opts.epsilon > 0.0)) throw Error(ErrorKind::kOutOfRange, "epsilon must be positive");
  if (opts.step < 1) throw Error(ErrorKind::kOutOfRange, "step must be at least 1");

  ApproxResult res;
  auto probe = [&](int k) {
    SolvedInstance solved = solve_at(base, k, opts.solver, opts.steady);
    res.evaluations.push_back({k, solved.analysis.metrics.peak_hit_prob});
    return solved;
  };
  auto accept = [&](int k, SolvedInstance solved) {
    res.a_max_final = k;
    res.peak_prob_final = solved.analysis.metrics.peak_hit_prob;
    res.policy = solved.solve.policy;
    res.metrics = solved.analysis.metrics;
    res.solve = std::move(solved.solve);
    for (const auto& e : res.evaluations) {
      if (e.a_max <= k) res.history.push_back(e);
    }
    std::sort(res.history.begin(), res.history.end(),
              [](const ApproxProbe& a, const ApproxProbe& b) { return a.a_max < b.a_max; });
    for (std::size_t i = 1; i < res.history.size(); ++i) {
      if (res.history[i].peak_prob > res.history[i - 1].peak_prob) res.history_monotone = false;
    }
    return res;
  };

  int k = opts.k0;
  int last_failed = -1;
  while (true) {
    if (k > opts.ceiling) {
      std::ostringstream os;
      os << "age cap exceeded ceiling " << opts.ceiling << " without reaching epsilon "
         << opts.epsilon;
      throw Error(ErrorKind::kDiverged, os.str());
    }
    SolvedInstance solved = probe(k);
    if (solved.analysis.metrics.peak_hit_prob <= opts.epsilon) {
      if (opts.refine && last_failed >= 0) {
        for (int kk = last_failed + 1; kk < k; ++kk) {
          SolvedInstance finer = probe(kk);
          if (finer.analysis.metrics.peak_hit_prob <= opts.epsilon) {
            return accept(kk, std::move(finer));
          }
        }
      }
      return accept(k, std::move(solved));
    }
    last_failed = k;
    k += opts.step;
  }
}

}  // namespace ehaoi
