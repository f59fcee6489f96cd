// ehaoi: solve, evaluate, sweep and simulate energy-harvesting age-of-information
// scheduling instances from the command line.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ehaoi/approx.hpp"
#include "ehaoi/config_io.hpp"
#include "ehaoi/experiment.hpp"
#include "ehaoi/instance.hpp"
#include "ehaoi/sim.hpp"

using namespace ehaoi;

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string objective = "avg";
  std::optional<double> alpha;
  double r_prime = -1.0;
  double eps_c = 1e-10;
  std::size_t max_iter = 1'000'000;
  double damping = 0.5;
  std::string out = "-";
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::size_t state_cap = kDefaultStateCap;
};

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--config", a.config, "Instance config (JSON)")->required();
  sub->add_option("--set", a.overrides, "Override a config field, e.g. --set recovery.p_rec=0.6");
  sub->add_option("--objective", a.objective, "peak | avg | weighted")
      ->check(CLI::IsMember({"peak", "avg", "weighted"}));
  sub->add_option("--alpha", a.alpha, "Weight of the below-cap age (weighted objective)");
  sub->add_option("--r-prime", a.r_prime, "Cap penalty of the peak objective (negative)");
  sub->add_option("--epsilon-c", a.eps_c, "Span stopping threshold of value iteration");
  sub->add_option("--max-iter", a.max_iter, "Value iteration sweep limit");
  sub->add_option("--damping", a.damping, "Aperiodicity damping in [0, 1)");
  sub->add_option("--out", a.out, "Output file ('-' for stdout)");
  sub->add_option("--seed", a.seed, "Random seed");
  sub->add_option("--jobs", a.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--state-cap", a.state_cap, "Refuse state spaces larger than this");
}

SystemConfig load(const CommonArgs& a) {
  std::vector<ConfigOverride> ov;
  for (const auto& s : a.overrides) ov.push_back(parse_override(s));
  return load_config(a.config, ov);
}

RewardSpec objective_of(const CommonArgs& a) {
  RewardSpec spec;
  if (a.objective == "peak") {
    spec = PeakHit{a.r_prime};
  } else if (a.objective == "avg") {
    spec = AverageAge{};
  } else {
    if (!a.alpha) throw Error(ErrorKind::kOutOfRange, "--alpha is required with --objective weighted");
    spec = Weighted{*a.alpha};
  }
  check_reward_spec(spec);
  return spec;
}

SolverOptions solver_of(const CommonArgs& a) {
  SolverOptions o;
  o.eps_c = a.eps_c;
  o.max_iter = a.max_iter;
  o.damping = a.damping;
  return o;
}

// Output sink: stdout for "-", otherwise a file (appending when asked).
class Output {
 public:
  explicit Output(const std::string& path, bool append = false) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, append ? std::ios::app : std::ios::trunc);
    if (!*file_) throw Error(ErrorKind::kConfigParse, "cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_file(const std::string& path, const std::string& what,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kConfigParse, "cannot open " + path + " for writing " + what);
  body(f);
}

Policy load_policy(const std::string& path, const StateSpace& space) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kConfigParse, "cannot open policy file " + path);
  return read_policy(f, space);
}

void note_period(const ChainAnalysis& a) {
  if (a.period > 1) {
    std::cerr << "note: recurrent class has period " << a.period
              << "; metrics are long-run time averages\n";
  }
}

Instance instance_of(const CommonArgs& a) {
  return build_instance(validate_config(load(a)), a.state_cap, a.jobs);
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string policy_out;
  std::string kernel_out;
};

int run_solve(const CommonArgs& a, const SolveArgs& s) {
  const SystemConfig cfg = load(a);
  const RewardSpec spec = objective_of(a);
  const Instance inst = build_instance(validate_config(cfg), a.state_cap, a.jobs);
  if (!s.kernel_out.empty()) {
    write_file(s.kernel_out, "the kernel", [&](std::ostream& os) { write_kernel(os, inst.kernel); });
  }
  const SolvedInstance solved = solve_and_analyze(inst, spec, solver_of(a));
  note_period(solved.analysis);
  if (!solved.solve.span_monotone) {
    std::cerr << "note: span of successive value differences increased during iteration\n";
  }
  if (!s.policy_out.empty()) {
    write_file(s.policy_out, "the policy", [&](std::ostream& os) {
      write_policy(os, solved.solve.policy, inst.space, inst.cfg.scale);
    });
  }
  Output out(a.out);
  write_metrics_header(out.stream());
  write_metrics_row(out.stream(), make_record(cfg, spec, solved.analysis.metrics, solved.solve.gain,
                                              solved.solve.iterations));
  return 0;
}

int run_evaluate(const CommonArgs& a, const std::string& policy_path) {
  const SystemConfig cfg = load(a);
  const RewardSpec spec = objective_of(a);
  const Instance inst = build_instance(validate_config(cfg), a.state_cap, a.jobs);
  const Policy policy = load_policy(policy_path, inst.space);
  const ChainAnalysis analysis = analyze_policy(inst.kernel, policy, inst.cfg);
  note_period(analysis);
  const PolicyEvaluation ev =
      evaluate_policy(inst.kernel, policy, spec, canonical_start(inst.space), solver_of(a));
  if (!ev.converged) throw Error(ErrorKind::kNotConverged, "policy evaluation did not converge");
  Output out(a.out);
  write_metrics_header(out.stream());
  write_metrics_row(out.stream(), make_record(cfg, spec, analysis.metrics, ev.gain, ev.iterations));
  return 0;
}

struct SweepArgs {
  std::vector<int> values;
  std::vector<double> alphas;
  std::vector<double> p_rec_values;
  bool approx_amax = false;
  bool resume = false;
};

struct ApproxArgs {
  int k0 = 20;
  double epsilon = 1e-6;
  int step = 5;
  bool no_refine = false;
  int ceiling = 500;
};

ApproxOptions approx_of(const CommonArgs& a, const ApproxArgs& x) {
  ApproxOptions o;
  o.k0 = x.k0;
  o.epsilon = x.epsilon;
  o.step = x.step;
  o.refine = !x.no_refine;
  o.ceiling = x.ceiling;
  o.solver = solver_of(a);
  return o;
}

int run_sweep(const CommonArgs& a, const SweepArgs& s, const ApproxArgs& x, bool over_alpha) {
  const SystemConfig base = load(a);
  SweepOptions o;
  o.jobs = a.jobs;
  o.solver = solver_of(a);
  o.p_rec_values = s.p_rec_values;
  o.approx_amax = s.approx_amax;
  o.approx = approx_of(a, x);

  bool append = false;
  if (s.resume) {
    if (a.out == "-") throw Error(ErrorKind::kOutOfRange, "--resume needs --out <file>");
    std::ifstream prev(a.out);
    if (prev) {
      o.completed = read_completed_keys(prev);
      append = true;
    }
  }
  Output out(a.out, append);
  if (!append) write_sweep_header(out.stream());
  int status = 0;
  auto emit = [&](const SweepRow& row) {
    write_sweep_row(out.stream(), row);
    out.stream().flush();
    if (row.error_kind) {
      status = std::max(status, static_cast<int>(category_of(*row.error_kind)));
      std::cerr << "error: " << row.variant << " at " << format_number(row.param) << ": "
                << row.error << "\n";
    }
  };
  if (over_alpha) {
    sweep_alpha(base, s.alphas, o, emit);
  } else {
    sweep_bmax(base, objective_of(a), s.values, o, emit);
  }
  return status;
}

int run_approx(const CommonArgs& a, const ApproxArgs& x, const std::string& policy_out) {
  const SystemConfig base = load(a);
  const ApproxResult r = find_amax(base, approx_of(a, x));
  if (!r.history_monotone) {
    std::cerr << "note: cap probability was not monotone in K along the scan\n";
  }
  if (!policy_out.empty()) {
    SystemConfig at = base;
    at.a_max = r.a_max_final;
    const ScaledConfig scaled = scale_energies(validate_config(at));
    const StateSpace space = enumerate_states(scaled);
    write_file(policy_out, "the policy",
               [&](std::ostream& os) { write_policy(os, r.policy, space, scaled.scale); });
  }
  Output out(a.out);
  out.stream() << "K,peak_prob\n";
  for (const auto& p : r.history) out.stream() << p.a_max << ',' << format_number(p.peak_prob) << '\n';
  std::cerr << "a_max = " << r.a_max_final << ", peak_prob = " << format_number(r.peak_prob_final)
            << ", avg_age = " << format_number(r.metrics.avg_age) << "\n";
  return 0;
}

struct SimArgs {
  std::string policy;
  std::uint64_t horizon = 0;
  std::uint64_t burn_in = 0;
};

Policy sim_policy(const CommonArgs& a, const SimArgs& s, const Instance& inst) {
  if (!s.policy.empty()) return load_policy(s.policy, inst.space);
  const SolveResult r = relative_value_iteration(inst.kernel, objective_of(a), solver_of(a));
  if (!r.converged) throw Error(ErrorKind::kNotConverged, "value iteration did not converge");
  return r.policy;
}

int run_simulate(const CommonArgs& a, const SimArgs& s) {
  const Instance inst = instance_of(a);
  const Policy policy = sim_policy(a, s, inst);
  SimConfig sc;
  sc.horizon = s.horizon;
  sc.burn_in = s.burn_in;
  sc.seed = a.seed;
  const EmpiricalMetrics m = simulate(inst.cfg, inst.space, policy, sc);
  Output out(a.out);
  auto& os = out.stream();
  os << "metric,mean,std_error\n";
  auto row = [&](const char* name, const Estimate& e) {
    os << name << ',' << format_number(e.mean) << ',' << format_number(e.std_error) << '\n';
  };
  row("avg_age", m.avg_age);
  row("peak_hit_prob", m.peak_hit_prob);
  row("avg_tx_power", m.avg_tx_power);
  row("avg_battery", m.avg_battery);
  os << "slots," << m.slots << ",\n";
  os << "seed," << a.seed << ",\n";
  return 0;
}

int run_trace(const CommonArgs& a, const SimArgs& s) {
  const Instance inst = instance_of(a);
  const Policy policy = sim_policy(a, s, inst);
  SimConfig sc;
  sc.horizon = s.horizon;
  sc.burn_in = 0;
  sc.seed = a.seed;
  Output out(a.out);
  write_trace_csv(out.stream(), trace(inst.cfg, inst.space, policy, sc), inst.cfg);
  return 0;
}

int exit_code(const Error& e) { return static_cast<int>(e.category()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal age-of-information scheduling for energy-harvesting sensors"};
  app.require_subcommand(1);

  CommonArgs common;
  SolveArgs solve_args;
  std::string eval_policy, approx_policy_out;
  SweepArgs sweep;
  ApproxArgs approx;
  SimArgs sim;
  sim.horizon = 1'000'000;
  sim.burn_in = 10'000;
  SimArgs tr;
  tr.horizon = 100;

  auto* solve = app.add_subcommand("solve", "Optimal policy and its metrics for one instance");
  add_common(solve, common);
  solve->add_option("--policy-out", solve_args.policy_out, "Write the optimal policy here");
  solve->add_option("--kernel-out", solve_args.kernel_out, "Dump the transition kernel here");

  auto* evaluate = app.add_subcommand("evaluate", "Metrics of a stored policy");
  add_common(evaluate, common);
  evaluate->add_option("--policy", eval_policy, "Policy file from solve --policy-out")->required();

  auto* sweep_b = app.add_subcommand("sweep-bmax", "Solve over battery capacities and variants");
  add_common(sweep_b, common);
  sweep.values = {};
  sweep_b->add_option("--values", sweep.values, "Battery capacities (default 2..30)")->delimiter(',');
  sweep_b->add_option("--p-rec-values", sweep.p_rec_values, "Recovery probabilities")->delimiter(',');
  sweep_b->add_flag("--approx-amax", sweep.approx_amax,
                    "Choose the age cap per point for the average-age objective");
  sweep_b->add_option("--k0", approx.k0, "Initial age cap for --approx-amax");
  sweep_b->add_option("--epsilon", approx.epsilon, "Cap probability target for --approx-amax");
  sweep_b->add_option("--step", approx.step, "Age cap increment for --approx-amax");
  sweep_b->add_flag("--resume", sweep.resume, "Skip rows already present in --out");

  auto* sweep_a = app.add_subcommand("sweep-alpha", "Weighted objective over alpha");
  add_common(sweep_a, common);
  sweep_a->add_option("--alphas", sweep.alphas, "Weights (default 0,0.1,...,1)")->delimiter(',');
  sweep_a->add_option("--p-rec-values", sweep.p_rec_values, "Recovery probabilities")->delimiter(',');
  sweep_a->add_flag("--resume", sweep.resume, "Skip rows already present in --out");

  auto* amax = app.add_subcommand("approx-amax", "Smallest adequate age cap");
  add_common(amax, common);
  amax->add_option("--k0", approx.k0, "Initial age cap");
  amax->add_option("--epsilon", approx.epsilon, "Cap probability target");
  amax->add_option("--step", approx.step, "Age cap increment");
  amax->add_flag("--no-refine", approx.no_refine, "Skip the unit-step rescan");
  amax->add_option("--ceiling", approx.ceiling, "Give up beyond this cap");
  amax->add_option("--policy-out", approx_policy_out, "Write the final policy here");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of the metrics");
  add_common(simulate_cmd, common);
  simulate_cmd->add_option("--policy", sim.policy, "Policy file (default: solve --objective)");
  simulate_cmd->add_option("--horizon", sim.horizon, "Slots to simulate");
  simulate_cmd->add_option("--burn-in", sim.burn_in, "Initial slots left out of the averages");

  auto* trace_cmd = app.add_subcommand("trace", "Per-slot sample path");
  add_common(trace_cmd, common);
  trace_cmd->add_option("--policy", tr.policy, "Policy file (default: solve --objective)");
  trace_cmd->add_option("--horizon", tr.horizon, "Slots to record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*solve) return run_solve(common, solve_args);
    if (*evaluate) return run_evaluate(common, eval_policy);
    if (*sweep_b) {
      if (sweep.values.empty()) {
        for (int b = 2; b <= 30; ++b) sweep.values.push_back(b);
      }
      return run_sweep(common, sweep, approx, false);
    }
    if (*sweep_a) {
      if (sweep.alphas.empty()) {
        for (int i = 0; i <= 10; ++i) sweep.alphas.push_back(i / 10.0);
      }
      return run_sweep(common, sweep, approx, true);
    }
    if (*amax) return run_approx(common, approx, approx_policy_out);
    if (*simulate_cmd) return run_simulate(common, sim);
    if (*trace_cmd) return run_trace(common, tr);
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) {
      std::cerr << "error: " << to_string(v.kind) << ": " << v.message << "\n";
    }
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e);
  }
  return 1;
}
