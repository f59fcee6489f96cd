#include "ehaoi/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ehaoi {

namespace {

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

std::vector<Violation> check_config(const SystemConfig& raw) {
  std::vector<Violation> out;
  auto report = [&out](ErrorKind kind, std::string msg) {
    out.push_back({kind, std::move(msg)});
  };

  if (raw.b_max < 0) report(ErrorKind::kNegativeQuantity, concat("b_max = ", raw.b_max, " < 0"));
  if (raw.a_max < 2) report(ErrorKind::kOutOfRange, concat("a_max = ", raw.a_max, " < 2"));

  if (raw.modes.empty()) report(ErrorKind::kEmptyModeList, "modes is empty");
  for (std::size_t m = 0; m < raw.modes.size(); ++m) {
    const auto& mode = raw.modes[m];
    if (mode.power < 0) {
      report(ErrorKind::kNegativeQuantity, concat("modes[", m, "].power = ", mode.power));
    } else if (mode.power < 1) {
      report(ErrorKind::kOutOfRange, concat("modes[", m, "].power must be >= 1"));
    }
    if (!is_probability(mode.error_prob)) {
      report(ErrorKind::kOutOfRange,
             concat("modes[", m, "].error_prob = ", mode.error_prob, " not in [0,1]"));
    }
  }

  const auto& h = raw.harvester;
  const std::size_t n_h = h.power.size();
  bool harvester_shape_ok = true;
  if (n_h == 0) {
    report(ErrorKind::kShapeMismatch, "harvester has no states");
    harvester_shape_ok = false;
  }
  if (h.transition.size() != n_h) {
    report(ErrorKind::kShapeMismatch,
           concat("harvester matrix has ", h.transition.size(), " rows, expected ", n_h));
    harvester_shape_ok = false;
  }
  for (std::size_t i = 0; i < h.transition.size(); ++i) {
    const auto& row = h.transition[i];
    if (row.size() != n_h) {
      report(ErrorKind::kShapeMismatch,
             concat("harvester matrix row ", i, " has ", row.size(), " entries, expected ", n_h));
      harvester_shape_ok = false;
      continue;
    }
    double sum = 0.0;
    bool entries_ok = true;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!is_probability(row[j])) {
        report(ErrorKind::kInvalidStochasticMatrix,
               concat("harvester matrix entry (", i, ",", j, ") = ", row[j], " not in [0,1]"));
        entries_ok = false;
      }
      sum += row[j];
    }
    if (entries_ok && std::abs(sum - 1.0) > kStochasticTolerance) {
      report(ErrorKind::kInvalidStochasticMatrix,
             concat("harvester matrix row ", i, " sums to ", sum));
    }
  }
  for (std::size_t i = 0; i < n_h; ++i) {
    if (h.power[i] < 0) {
      report(ErrorKind::kNegativeQuantity, concat("harvester power[", i, "] = ", h.power[i]));
    }
  }

  if (raw.recovery.n_rec < 0) {
    report(ErrorKind::kNegativeQuantity, concat("recovery.n_rec = ", raw.recovery.n_rec));
  }
  if (raw.recovery.n_rec > 0 && !is_probability(raw.recovery.p_rec)) {
    report(ErrorKind::kOutOfRange,
           concat("recovery.p_rec = ", raw.recovery.p_rec, " not in [0,1]"));
  }

  if (!raw.modes.empty() && harvester_shape_ok && n_h > 0) {
    int min_power = raw.modes.front().power;
    for (const auto& m : raw.modes) min_power = std::min(min_power, m.power);
    const int max_harvest = *std::max_element(h.power.begin(), h.power.end());
    if (min_power > raw.b_max + max_harvest) {
      report(ErrorKind::kInfeasibleInstance,
             concat("no mode can ever transmit: min power ", min_power, " > b_max + max harvest ",
                    raw.b_max + max_harvest));
    }
  }
  return out;
}

ValidatedConfig validate_config(SystemConfig raw) {
  auto violations = check_config(raw);
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return ValidatedConfig(std::move(raw));
}

ScaledConfig scale_energies(const ValidatedConfig& validated) {
  const SystemConfig& cfg = validated.get();
  ScaledConfig s;
  s.n_rec = cfg.recovery.n_rec;
  s.p_rec = cfg.recovery.p_rec;
  s.scale = std::max(cfg.recovery.n_rec, 1);
  s.b_max = cfg.b_max * s.scale;
  s.a_max = cfg.a_max;
  for (const auto& m : cfg.modes) {
    const int scaled = m.power * s.scale;
    s.mode_power.push_back(scaled);
    s.mode_error_prob.push_back(m.error_prob);
    s.recovery_increment.push_back(s.n_rec > 0 ? scaled / s.n_rec : 0);
  }
  s.harvester_transition = cfg.harvester.transition;
  for (int p : cfg.harvester.power) s.harvest_power.push_back(p * s.scale);
  return s;
}

SystemConfig descale(const ScaledConfig& s) {
  SystemConfig cfg;
  cfg.b_max = s.b_max / s.scale;
  cfg.a_max = s.a_max;
  for (int m = 0; m < s.num_modes(); ++m) {
    cfg.modes.push_back({s.mode_power[m] / s.scale, s.mode_error_prob[m]});
  }
  cfg.harvester.transition = s.harvester_transition;
  for (int p : s.harvest_power) cfg.harvester.power.push_back(p / s.scale);
  cfg.recovery.n_rec = s.n_rec;
  cfg.recovery.p_rec = s.p_rec;
  return cfg;
}

}  // namespace ehaoi
