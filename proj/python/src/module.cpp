#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "ehaoi/approx.hpp"
#include "ehaoi/config_io.hpp"
#include "ehaoi/instance.hpp"
#include "ehaoi/sim.hpp"

namespace py = pybind11;
using namespace ehaoi;

namespace {

SystemConfig parse(const std::string& text, const std::vector<std::string>& overrides) {
  std::vector<ConfigOverride> ov;
  for (const auto& s : overrides) ov.push_back(parse_override(s));
  return parse_config(text, ov);
}

RewardSpec objective_of(const std::string& name, std::optional<double> alpha, double r_prime) {
  RewardSpec spec;
  if (name == "peak") {
    spec = PeakHit{r_prime};
  } else if (name == "avg") {
    spec = AverageAge{};
  } else if (name == "weighted") {
    if (!alpha) throw Error(ErrorKind::kOutOfRange, "alpha is required for the weighted objective");
    spec = Weighted{*alpha};
  } else {
    throw Error(ErrorKind::kOutOfRange, "unknown objective '" + name + "'");
  }
  check_reward_spec(spec);
  return spec;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["avg_age"] = m.avg_age;
  d["peak_hit_prob"] = m.peak_hit_prob;
  d["avg_tx_power"] = m.avg_tx_power;
  d["avg_battery"] = m.avg_battery;
  d["below_cap_age"] = m.below_cap_age;
  return d;
}

std::vector<int> policy_list(const Policy& p) {
  std::vector<int> out;
  out.reserve(p.size());
  for (Action a : p.actions()) out.push_back(a.index());
  return out;
}

// Solvable model: validated, scaled and expanded into its kernel.
class Model {
 public:
  Model(const std::string& text, const std::vector<std::string>& overrides, std::size_t state_cap,
        unsigned jobs)
      : config_(parse(text, overrides)),
        inst_(build_instance(validate_config(config_), state_cap, jobs)) {}

  std::size_t num_states() const { return inst_.space.size(); }
  std::size_t num_rows() const { return inst_.kernel.num_rows(); }
  int scale() const { return inst_.cfg.scale; }
  std::string config_json() const { return dump_config(config_); }
  std::string hash() const { return config_hash(config_); }

  py::dict state(std::size_t id) const {
    if (id >= num_states()) throw py::index_error("state id out of range");
    const State s = inst_.space.decode(state_id(id));
    py::dict d;
    d["age"] = s.age;
    d["mode"] = to_string(s.mode);
    d["harvester"] = s.harvester;
    d["battery"] = inst_.cfg.descale(s.battery);
    return d;
  }

  std::size_t start() const { return index_of(canonical_start(inst_.space)); }

  py::dict solve(const std::string& objective, std::optional<double> alpha, double r_prime,
                 double eps_c, std::size_t max_iter, double damping) const {
    SolverOptions o;
    o.eps_c = eps_c;
    o.max_iter = max_iter;
    o.damping = damping;
    const SolvedInstance s = solve_and_analyze(inst_, objective_of(objective, alpha, r_prime), o);
    py::dict d;
    d["gain"] = s.solve.gain;
    d["iterations"] = s.solve.iterations;
    d["converged"] = s.solve.converged;
    d["span_monotone"] = s.solve.span_monotone;
    d["period"] = s.analysis.period;
    d["metrics"] = metrics_dict(s.analysis.metrics);
    d["policy"] = policy_list(s.solve.policy);
    return d;
  }

  py::dict evaluate(const std::vector<int>& actions) const {
    const Policy p = policy_of(actions);
    const ChainAnalysis a = analyze_policy(inst_.kernel, p, inst_.cfg);
    py::dict d = metrics_dict(a.metrics);
    d["period"] = a.period;
    d["recurrent_states"] = a.recurrent.size();
    return d;
  }

  py::dict simulate(const std::vector<int>& actions, std::uint64_t horizon, std::uint64_t burn_in,
                    std::uint64_t seed) const {
    SimConfig sc;
    sc.horizon = horizon;
    sc.burn_in = burn_in;
    sc.seed = seed;
    const EmpiricalMetrics e = simulate_policy(inst_.cfg, inst_.space, policy_of(actions), sc);
    auto est = [](const Estimate& x) { return py::make_tuple(x.mean, x.std_error); };
    py::dict d;
    d["avg_age"] = est(e.avg_age);
    d["peak_hit_prob"] = est(e.peak_hit_prob);
    d["avg_tx_power"] = est(e.avg_tx_power);
    d["avg_battery"] = est(e.avg_battery);
    d["slots"] = e.slots;
    return d;
  }

 private:
  static EmpiricalMetrics simulate_policy(const ScaledConfig& cfg, const StateSpace& space,
                                          const Policy& p, const SimConfig& sc) {
    return ehaoi::simulate(cfg, space, p, sc);
  }

  Policy policy_of(const std::vector<int>& actions) const {
    if (actions.size() != num_states()) {
      throw Error(ErrorKind::kShapeMismatch, "policy has " + std::to_string(actions.size()) +
                                                  " entries, model has " +
                                                  std::to_string(num_states()) + " states");
    }
    std::vector<Action> acts;
    acts.reserve(actions.size());
    for (int a : actions) {
      if (a < 0 || a > inst_.cfg.num_modes()) throw Error(ErrorKind::kInfeasiblePolicyAction, "bad action index");
      acts.push_back(Action::from_index(a));
    }
    Policy p(std::move(acts));
    check_policy(inst_.kernel, p);
    return p;
  }

  SystemConfig config_;
  Instance inst_;
};

std::vector<std::pair<std::string, std::string>> validate(const std::string& text,
                                                          const std::vector<std::string>& overrides) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<Violation> found;
  try {
    found = check_config(parse(text, overrides));
  } catch (const ConfigError& e) {
    found = e.violations();
  }
  for (const auto& v : found) out.emplace_back(std::string(to_string(v.kind)), v.message);
  return out;
}

py::dict find_amax_py(const std::string& text, const std::vector<std::string>& overrides, int k0,
                      double epsilon, int step, bool refine, int ceiling) {
  ApproxOptions o;
  o.k0 = k0;
  o.epsilon = epsilon;
  o.step = step;
  o.refine = refine;
  o.ceiling = ceiling;
  const ApproxResult r = find_amax(parse(text, overrides), o);
  py::dict d;
  d["a_max"] = r.a_max_final;
  d["peak_prob"] = r.peak_prob_final;
  d["metrics"] = metrics_dict(r.metrics);
  std::vector<std::pair<int, double>> hist;
  for (const auto& h : r.history) hist.emplace_back(h.a_max, h.peak_prob);
  d["history"] = hist;
  d["history_monotone"] = r.history_monotone;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Age-of-information MDP for energy-harvesting sensors with battery recovery";

  static py::exception<Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // ConfigError messages already carry the kind of each violation.
      std::string msg = e.what();
      if (!dynamic_cast<const ConfigError*>(&e)) msg = std::string(to_string(e.kind())) + ": " + msg;
      py::object err = py::reinterpret_borrow<py::object>(error_type.ptr())(msg);
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  py::class_<Model>(m, "Model")
      .def(py::init<const std::string&, const std::vector<std::string>&, std::size_t, unsigned>(),
           py::arg("config_json"), py::arg("overrides") = std::vector<std::string>{},
           py::arg("state_cap") = kDefaultStateCap, py::arg("jobs") = 1u)
      .def_property_readonly("num_states", &Model::num_states)
      .def_property_readonly("num_rows", &Model::num_rows)
      .def_property_readonly("scale", &Model::scale)
      .def_property_readonly("config_json", &Model::config_json)
      .def_property_readonly("config_hash", &Model::hash)
      .def_property_readonly("start", &Model::start)
      .def("state", &Model::state, py::arg("id"))
      .def("solve", &Model::solve, py::arg("objective") = "avg", py::arg("alpha") = py::none(),
           py::arg("r_prime") = -1.0, py::arg("eps_c") = 1e-10, py::arg("max_iter") = 1'000'000,
           py::arg("damping") = 0.5)
      .def("evaluate", &Model::evaluate, py::arg("policy"))
      .def("simulate", &Model::simulate, py::arg("policy"), py::arg("horizon") = 1'000'000,
           py::arg("burn_in") = 10'000, py::arg("seed") = 1);

  m.def("validate", &validate, py::arg("config_json"),
        py::arg("overrides") = std::vector<std::string>{});
  m.def("find_amax", &find_amax_py, py::arg("config_json"),
        py::arg("overrides") = std::vector<std::string>{}, py::arg("k0") = 20,
        py::arg("epsilon") = 1e-6, py::arg("step") = 5, py::arg("refine") = true,
        py::arg("ceiling") = 500);
}
