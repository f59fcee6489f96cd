#include "ehaoi/instance.hpp"

#include <sstream>

namespace ehaoi {

Instance build_instance(const ValidatedConfig& cfg, std::size_t state_cap, unsigned workers) {
  ScaledConfig scaled = scale_energies(cfg);
  StateSpace space = enumerate_states(scaled, state_cap);
  TransitionKernel kernel = build_kernel(scaled, space, workers);
  return Instance{std::move(scaled), space, std::move(kernel)};
}

SolvedInstance solve_and_analyze(const Instance& inst, const RewardSpec& spec,
                                 const SolverOptions& solver, const SteadyStateOptions& steady) {
  SolvedInstance out;
  out.solve = relative_value_iteration(inst.kernel, spec, solver);
  if (!out.solve.converged) {
    std::ostringstream os;
    os << "relative value iteration stopped after " << out.solve.iterations
       << " iterations with span " << out.solve.span_at_stop;
    throw Error(ErrorKind::kNotConverged, os.str());
  }
  out.analysis = analyze_policy(inst.kernel, out.solve.policy, inst.cfg, steady);
  return out;
}

}  // namespace ehaoi
