#include "ehaoi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ehaoi/chain.hpp"

namespace ehaoi {

std::string_view to_string(TxOutcome outcome) {
  switch (outcome) {
    case TxOutcome::kNone: return "none";
    case TxOutcome::kSuccess: return "success";
    case TxOutcome::kError: return "error";
  }
  return "?";
}

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

// SplitMix64; each noise source starts from its own hashed (seed, source) key.
Simulator::Stream::Stream(std::uint64_t seed, NoiseSource source)
    : state_(mix64(seed ^ mix64(static_cast<std::uint64_t>(source) * kGolden))) {}

double Simulator::Stream::uniform() {
  state_ += kGolden;
  return static_cast<double>(mix64(state_) >> 11) * 0x1.0p-53;
}

Simulator::Simulator(const ScaledConfig& cfg, const StateSpace& space, const Policy& policy,
                     std::uint64_t seed)
    : cfg_(cfg),
      space_(space),
      policy_(policy),
      error_(seed, NoiseSource::kTxError),
      recovery_(seed, NoiseSource::kRecovery),
      harvester_(seed, NoiseSource::kHarvester) {}

State Simulator::step(const State& s, std::uint64_t slot, TraceEvent& ev) {
  const Action d = policy_[space_.encode(s)];
  ev = TraceEvent{slot, s, d, TxOutcome::kNone, 0, cfg_.harvest_power[s.harvester], 0};
  const int aged = std::min(s.age + 1, cfg_.a_max);
  State next = s;

  if (!d.is_idle()) {
    const int m = d.mode();
    ev.spent = cfg_.mode_power[m - 1];
    if (s.battery + ev.harvested - ev.spent < 0) {
      std::ostringstream os;
      os << "policy transmits with mode " << m << " at battery " << s.battery << " (slot " << slot
         << ")";
      throw Error(ErrorKind::kInfeasiblePolicyAction, os.str());
    }
    const bool lost = error_.uniform() < cfg_.mode_error_prob[m - 1];
    ev.outcome = lost ? TxOutcome::kError : TxOutcome::kSuccess;
    next.age = lost ? aged : 1;
    next.mode = SystemMode::just_tx(m);
  } else {
    next.age = aged;
    next.mode = SystemMode::long_idle();
    const bool in_window =
        cfg_.n_rec > 0 && (s.mode.kind == SystemMode::Kind::kJustTx ||
                           (s.mode.kind == SystemMode::Kind::kPostTx && s.mode.idle_slots < cfg_.n_rec));
    if (in_window) {
      const int m = s.mode.tx_mode;
      next.mode = SystemMode::post_tx(m, s.mode.kind == SystemMode::Kind::kJustTx ? 1
                                                                                : s.mode.idle_slots + 1);
      if (recovery_.uniform() < cfg_.p_rec) ev.recovered = cfg_.recovery_increment[m - 1];
    }
  }

  next.battery = std::min(s.battery + ev.harvested + ev.recovered - ev.spent, cfg_.b_max);

  const auto& row = cfg_.harvester_transition[s.harvester];
  const double u = harvester_.uniform();
  double acc = 0.0;
  int j = 0;
  const int last = static_cast<int>(row.size()) - 1;
  for (; j < last; ++j) {
    acc += row[j];
    if (u < acc) break;
  }
  // Never land on a zero-probability state through rounding at the tail.
  while (j > 0 && row[j] == 0.0) --j;
  next.harvester = j;
  return next;
}

namespace {

struct BatchAccumulator {
  std::vector<double> sums;
  double total = 0.0;
};

Estimate finish(const BatchAccumulator& acc, std::uint64_t slots, std::uint64_t batch_len,
                std::size_t batches) {
  Estimate e;
  e.mean = acc.total / static_cast<double>(slots);
  if (batches < 2 || batch_len == 0) return e;
  double mean_b = 0.0;
  for (std::size_t b = 0; b < batches; ++b) mean_b += acc.sums[b] / static_cast<double>(batch_len);
  mean_b /= static_cast<double>(batches);
  double var = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const double x = acc.sums[b] / static_cast<double>(batch_len) - mean_b;
    var += x * x;
  }
  var /= static_cast<double>(batches - 1);
  e.std_error = std::sqrt(var / static_cast<double>(batches));
  return e;
}

void check_sim(const SimConfig& sim, const StateSpace& space, const Policy& policy) {
  if (sim.horizon <= sim.burn_in) {
    throw Error(ErrorKind::kOutOfRange, "horizon must exceed burn_in");
  }
  if (policy.size() != space.size()) {
    throw Error(ErrorKind::kInfeasiblePolicyAction, "policy size does not match the state space");
  }
  if (sim.start && !space.contains(*sim.start)) {
    throw Error(ErrorKind::kOutOfRange, "start state outside the state space");
  }
}

}  // namespace

EmpiricalMetrics simulate(const ScaledConfig& cfg, const StateSpace& space, const Policy& policy,
                          const SimConfig& sim) {
  check_sim(sim, space, policy);
  Simulator simulator(cfg, space, policy, sim.seed);
  State s = sim.start.value_or(canonical_start_state(space));

  const std::uint64_t slots = sim.horizon - sim.burn_in;
  const std::size_t batches = std::max<std::size_t>(1, std::min<std::uint64_t>(sim.batches, slots));
  const std::uint64_t batch_len = slots / batches;

  EmpiricalMetrics out;
  out.slots = slots;
  out.visit_counts.assign(space.size(), 0);
  BatchAccumulator age{std::vector<double>(batches, 0.0)}, peak = age, power = age, battery = age;

  TraceEvent ev;
  for (std::uint64_t t = 0; t < sim.horizon; ++t) {
    State next = simulator.step(s, t, ev);
    if (t >= sim.burn_in) {
      const std::uint64_t k = t - sim.burn_in;
      ++out.visit_counts[index_of(space.encode(s))];
      const double x_age = s.age;
      const double x_peak = s.age == cfg.a_max ? 1.0 : 0.0;
      const double x_power = cfg.descale(ev.spent);
      const double x_battery = cfg.descale(s.battery);
      age.total += x_age;
      peak.total += x_peak;
      power.total += x_power;
      battery.total += x_battery;
      const std::uint64_t b = k / batch_len;
      if (b < batches) {
        age.sums[b] += x_age;
        peak.sums[b] += x_peak;
        power.sums[b] += x_power;
        battery.sums[b] += x_battery;
      }
    }
    s = next;
  }
  out.avg_age = finish(age, slots, batch_len, batches);
  out.peak_hit_prob = finish(peak, slots, batch_len, batches);
  out.avg_tx_power = finish(power, slots, batch_len, batches);
  out.avg_battery = finish(battery, slots, batch_len, batches);
  return out;
}

std::vector<TraceEvent> trace(const ScaledConfig& cfg, const StateSpace& space,
                              const Policy& policy, const SimConfig& sim) {
  check_sim(sim, space, policy);
  Simulator simulator(cfg, space, policy, sim.seed);
  State s = sim.start.value_or(canonical_start_state(space));
  std::vector<TraceEvent> events(sim.horizon);
  for (std::uint64_t t = 0; t < sim.horizon; ++t) s = simulator.step(s, t, events[t]);
  return events;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEvent>& events,
                     const ScaledConfig& cfg) {
  os << "slot,age,mode,harvester,battery,action,outcome,recovered,harvested\n";
  for (const auto& e : events) {
    os << e.slot << ',' << e.state.age << ',' << to_string(e.state.mode) << ','
       << e.state.harvester << ',' << cfg.descale(e.state.battery) << ',' << e.action.index() << ','
       << to_string(e.outcome) << ',' << cfg.descale(e.recovered) << ','
       << cfg.descale(e.harvested) << '\n';
  }
}

}  // namespace ehaoi
