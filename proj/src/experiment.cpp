#include "ehaoi/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ehaoi/config_io.hpp"

namespace ehaoi {

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

MetricsRecord make_record(const SystemConfig& cfg, const RewardSpec& spec, const Metrics& m,
                          double gain, std::size_t iterations) {
  return MetricsRecord{objective_name(spec), objective_alpha(spec), cfg.b_max, cfg.recovery.p_rec,
                       cfg.recovery.n_rec, m, gain, iterations};
}

void write_metrics_header(std::ostream& os) {
  os << "objective,alpha,b_max,p_rec,n_rec,avg_age,peak_hit_prob,avg_tx_power,avg_battery,gain,"
        "iterations\n";
}

void write_metrics_row(std::ostream& os, const MetricsRecord& r) {
  os << r.objective << ',' << format_number(r.alpha) << ',' << r.b_max << ','
     << format_number(r.p_rec) << ',' << r.n_rec << ',' << format_number(r.metrics.avg_age) << ','
     << format_number(r.metrics.peak_hit_prob) << ',' << format_number(r.metrics.avg_tx_power)
     << ',' << format_number(r.metrics.avg_battery) << ',' << format_number(r.gain) << ','
     << r.iterations << '\n';
}

std::string sweep_key(const SweepRow& row) { return row.variant + "|" + format_number(row.param); }

namespace {

void check_increasing(const std::vector<double>& values, const char* what) {
  if (values.empty()) throw Error(ErrorKind::kOutOfRange, std::string(what) + " list is empty");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw Error(ErrorKind::kOutOfRange, std::string(what) + " values must be strictly increasing");
    }
  }
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Runs `work(i)` for i in [0, n) on up to `jobs` threads and hands results to
// `emit` strictly in index order.
template <typename Work, typename Emit>
void run_ordered(std::size_t n, unsigned jobs, Work work, Emit emit) {
  std::vector<std::optional<SweepRow>> done(n);
  std::mutex mu;
  std::size_t next_emit = 0;
  std::atomic<std::size_t> next_task{0};

  auto worker = [&] {
    while (true) {
      const std::size_t i = next_task.fetch_add(1);
      if (i >= n) return;
      SweepRow row = work(i);
      std::lock_guard lock(mu);
      done[i] = std::move(row);
      while (next_emit < n && done[next_emit]) emit(*done[next_emit++]);
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    worker();
    return;
  }
  std::vector<std::thread> threads;
  for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

SweepRow run_point(SweepRow row, const RewardSpec& spec, const SweepOptions& opts) {
  try {
    const ValidatedConfig cfg = validate_config(row.config);
    if (opts.approx_amax && std::holds_alternative<AverageAge>(spec)) {
      ApproxOptions ao = opts.approx;
      ao.solver = opts.solver;
      ao.steady = opts.steady;
      const ApproxResult res = find_amax(cfg.get(), ao);
      row.config.a_max = res.a_max_final;
      row.record = make_record(row.config, spec, res.metrics, res.solve.gain, res.solve.iterations);
    } else {
      const Instance inst = build_instance(cfg);
      const SolvedInstance solved = solve_and_analyze(inst, spec, opts.solver, opts.steady);
      row.record = make_record(row.config, spec, solved.analysis.metrics, solved.solve.gain,
                               solved.solve.iterations);
    }
  } catch (const ConfigError& e) {
    row.error = e.what();  // already tagged per violation
    row.error_kind = e.kind();
  } catch (const Error& e) {
    row.error = std::string(to_string(e.kind())) + ": " + e.what();
    row.error_kind = e.kind();
  }
  return row;
}

std::vector<SweepRow> run_rows(std::vector<SweepRow> pending, const RewardSpec& spec,
                               const SweepOptions& opts,
                               const std::function<void(const SweepRow&)>& on_row) {
  std::vector<SweepRow> todo;
  for (auto& r : pending) {
    if (!opts.completed.contains(sweep_key(r))) todo.push_back(std::move(r));
  }
  std::vector<SweepRow> out;
  out.reserve(todo.size());
  run_ordered(
      todo.size(), opts.jobs, [&](std::size_t i) { return run_point(todo[i], spec, opts); },
      [&](const SweepRow& row) {
        if (on_row) on_row(row);
        out.push_back(row);
      });
  return out;
}

std::string modes_label(const std::vector<int>& modes) {
  std::string s;
  for (int m : modes) s += (s.empty() ? "" : "+") + std::to_string(m);
  return s;
}

}  // namespace

std::vector<SweepRow> sweep_bmax(const SystemConfig& base, const RewardSpec& spec,
                                 const std::vector<int>& b_values, const SweepOptions& opts,
                                 const std::function<void(const SweepRow&)>& on_row) {
  check_reward_spec(spec);
  check_increasing(std::vector<double>(b_values.begin(), b_values.end()), "b_max");

  std::vector<std::vector<int>> subsets;
  const int M = static_cast<int>(base.modes.size());
  for (int m = 1; m <= M; ++m) subsets.push_back({m});
  if (M > 1) {
    std::vector<int> all;
    for (int m = 1; m <= M; ++m) all.push_back(m);
    subsets.push_back(all);
  }

  struct RecoveryVariant {
    std::string label;
    RecoveryModel model;
  };
  std::vector<RecoveryVariant> recoveries;
  if (base.recovery.enabled()) {
    const auto p_values =
        opts.p_rec_values.empty() ? std::vector<double>{base.recovery.p_rec} : opts.p_rec_values;
    for (double p : p_values) recoveries.push_back({"on", {base.recovery.n_rec, p}});
  }
  recoveries.push_back({"off", {0, base.recovery.p_rec}});

  std::vector<SweepRow> pending;
  for (int b : b_values) {
    for (const auto& rec : recoveries) {
      for (const auto& subset : subsets) {
        SweepRow row;
        row.recovery = rec.label;
        row.modes = modes_label(subset);
        row.variant = "rec-" + rec.label +
                      (rec.label == "on" ? "(p_rec=" + format_number(rec.model.p_rec) + ")" : "") +
                      ":modes=" + row.modes;
        row.param = b;
        row.config = base;
        row.config.b_max = b;
        row.config.recovery = rec.model;
        row.config.modes.clear();
        for (int m : subset) row.config.modes.push_back(base.modes[m - 1]);
        row.objective = objective_name(spec);
        row.alpha = objective_alpha(spec);
        pending.push_back(std::move(row));
      }
    }
  }
  return run_rows(std::move(pending), spec, opts, on_row);
}

std::vector<SweepRow> sweep_alpha(const SystemConfig& base, const std::vector<double>& alphas,
                                  const SweepOptions& opts,
                                  const std::function<void(const SweepRow&)>& on_row) {
  check_increasing(alphas, "alpha");
  const auto p_values =
      opts.p_rec_values.empty() ? std::vector<double>{base.recovery.p_rec} : opts.p_rec_values;
  std::vector<int> all;
  for (int m = 1; m <= static_cast<int>(base.modes.size()); ++m) all.push_back(m);

  // One task per (alpha, p_rec); the spec differs per row so rows are run
  // through run_point individually.
  std::vector<SweepRow> pending;
  std::vector<RewardSpec> specs;
  for (double a : alphas) {
    const RewardSpec spec = Weighted{a};
    check_reward_spec(spec);
    for (double p : p_values) {
      SweepRow row;
      row.recovery = base.recovery.enabled() ? "on" : "off";
      row.modes = modes_label(all);
      row.variant = "p_rec=" + format_number(p);
      row.param = a;
      row.config = base;
      row.config.recovery.p_rec = p;
      row.objective = "weighted";
      row.alpha = a;
      if (!opts.completed.contains(sweep_key(row))) {
        pending.push_back(std::move(row));
        specs.push_back(spec);
      }
    }
  }
  std::vector<SweepRow> out;
  run_ordered(
      pending.size(), opts.jobs, [&](std::size_t i) { return run_point(pending[i], specs[i], opts); },
      [&](const SweepRow& row) {
        if (on_row) on_row(row);
        out.push_back(row);
      });
  return out;
}

void write_sweep_header(std::ostream& os) {
  os << "variant,recovery,modes,param,objective,alpha,b_max,p_rec,n_rec,a_max,avg_age,"
        "peak_hit_prob,avg_tx_power,avg_battery,gain,iterations,x_below_cap,y_cap,config_hash,"
        "error\n";
}

void write_sweep_row(std::ostream& os, const SweepRow& row) {
  os << row.variant << ',' << row.recovery << ',' << row.modes << ',' << format_number(row.param)
     << ',' << row.objective << ',' << format_number(row.alpha) << ',' << row.config.b_max << ','
     << format_number(row.config.recovery.p_rec) << ',' << row.config.recovery.n_rec << ','
     << row.config.a_max << ',';
  if (row.record) {
    const Metrics& m = row.record->metrics;
    os << format_number(m.avg_age) << ',' << format_number(m.peak_hit_prob) << ','
       << format_number(m.avg_tx_power) << ',' << format_number(m.avg_battery) << ','
       << format_number(row.record->gain) << ',' << row.record->iterations << ','
       << format_number(m.below_cap_age) << ','
       << format_number(row.config.a_max * m.peak_hit_prob) << ',';
  } else {
    os << ",,,,,,,,";
  }
  os << config_hash(row.config) << ',' << sanitize(row.error) << '\n';
}

std::set<std::string> read_completed_keys(std::istream& is) {
  std::set<std::string> keys;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (line.back() == ',') cols.emplace_back();
    if (cols.size() < 20 || !cols[19].empty()) continue;  // failed rows are retried
    keys.insert(cols[0] + "|" + cols[3]);
  }
  return keys;
}

}  // namespace ehaoi
