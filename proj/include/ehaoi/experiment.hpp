#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ehaoi/approx.hpp"
#include "ehaoi/instance.hpp"

namespace ehaoi {

/// One metrics CSV row:
/// objective,alpha,b_max,p_rec,n_rec,avg_age,peak_hit_prob,avg_tx_power,avg_battery,gain,iterations
struct MetricsRecord {
  std::string objective;
  double alpha = 0.0;  // NaN unless weighted
  int b_max = 0;
  double p_rec = 0.0;
  int n_rec = 0;
  Metrics metrics;
  double gain = 0.0;
  std::size_t iterations = 0;
};

MetricsRecord make_record(const SystemConfig& cfg, const RewardSpec& spec, const Metrics& m,
                          double gain, std::size_t iterations);

/// Shortest round-trip-safe text for doubles used in every CSV; NaN prints empty.
std::string format_number(double x);

void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const MetricsRecord& rec);

struct SweepOptions {
  unsigned jobs = 1;
  SolverOptions solver;
  SteadyStateOptions steady;
  /// Recovery probabilities for the recovery-enabled variants; empty means
  /// the base config's value.
  std::vector<double> p_rec_values;
  /// Run the age-cap search per point for the average-age objective instead
  /// of using the config's a_max.
  bool approx_amax = false;
  ApproxOptions approx;
  /// Rows whose key (see sweep_key) is in this set are skipped.
  std::set<std::string> completed;
};

struct SweepRow {
  std::string variant;
  std::string recovery;  // "on" / "off"
  std::string modes;     // e.g. "1+2"
  double param = 0.0;    // b_max or alpha
  SystemConfig config;
  std::string objective;
  double alpha = 0.0;
  std::optional<MetricsRecord> record;
  std::string error;
  std::optional<ErrorKind> error_kind;
};

std::string sweep_key(const SweepRow& row);

/// B_max sweep over recovery on/off and mode subsets ({m} for each mode plus
/// all modes). Rows are produced in (b_max, variant) order; `on_row` is
/// called in that order as soon as each row and all rows before it are done.
std::vector<SweepRow> sweep_bmax(const SystemConfig& base, const RewardSpec& spec,
                                 const std::vector<int>& b_values, const SweepOptions& opts,
                                 const std::function<void(const SweepRow&)>& on_row = {});

/// Weighted-objective sweep over alpha, one variant per recovery probability.
std::vector<SweepRow> sweep_alpha(const SystemConfig& base, const std::vector<double>& alphas,
                                  const SweepOptions& opts,
                                  const std::function<void(const SweepRow&)>& on_row = {});

void write_sweep_header(std::ostream& os);
void write_sweep_row(std::ostream& os, const SweepRow& row);

/// Keys of rows already present in a sweep CSV (for resuming).
std::set<std::string> read_completed_keys(std::istream& is);

}  // namespace ehaoi
