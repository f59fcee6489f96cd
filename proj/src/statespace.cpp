#include "ehaoi/statespace.hpp"

#include <algorithm>
#include <cassert>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace ehaoi {

std::string to_string(SystemMode mode) {
  switch (mode.kind) {
    case SystemMode::Kind::kLongIdle: return "0";
    case SystemMode::Kind::kJustTx: return std::to_string(mode.tx_mode);
    case SystemMode::Kind::kPostTx:
      return std::to_string(mode.tx_mode) + "^" + std::to_string(mode.idle_slots);
  }
  return "?";
}

// ---------------------------------------------------------------------------
// StateSpace

StateSpace::StateSpace(int a_max, int num_tx_modes, int n_rec, int num_harvester_states,
                       int b_max_scaled)
    : a_max_(a_max),
      num_tx_modes_(num_tx_modes),
      n_rec_(n_rec),
      num_harvester_(num_harvester_states),
      b_max_(b_max_scaled) {
  size_ = static_cast<std::size_t>(a_max_) * static_cast<std::size_t>(num_system_modes()) *
          static_cast<std::size_t>(num_harvester_) * static_cast<std::size_t>(b_max_ + 1);
}

int StateSpace::mode_index(SystemMode mode) const {
  switch (mode.kind) {
    case SystemMode::Kind::kLongIdle: return 0;
    case SystemMode::Kind::kJustTx: return mode.tx_mode;
    case SystemMode::Kind::kPostTx:
      return num_tx_modes_ + (mode.tx_mode - 1) * n_rec_ + mode.idle_slots;
  }
  return -1;
}

SystemMode StateSpace::mode_at(int index) const {
  if (index == 0) return SystemMode::long_idle();
  if (index <= num_tx_modes_) return SystemMode::just_tx(index);
  const int k = index - num_tx_modes_ - 1;
  return SystemMode::post_tx(k / n_rec_ + 1, k % n_rec_ + 1);
}

bool StateSpace::contains(const State& s) const {
  if (s.age < 1 || s.age > a_max_) return false;
  if (s.harvester < 0 || s.harvester >= num_harvester_) return false;
  if (s.battery < 0 || s.battery > b_max_) return false;
  switch (s.mode.kind) {
    case SystemMode::Kind::kLongIdle: return true;
    case SystemMode::Kind::kJustTx:
      return s.mode.tx_mode >= 1 && s.mode.tx_mode <= num_tx_modes_;
    case SystemMode::Kind::kPostTx:
      return s.mode.tx_mode >= 1 && s.mode.tx_mode <= num_tx_modes_ && s.mode.idle_slots >= 1 &&
             s.mode.idle_slots <= n_rec_;
  }
  return false;
}

StateId StateSpace::encode(const State& s) const {
  assert(contains(s));
  std::size_t id = static_cast<std::size_t>(s.age - 1);
  id = id * num_system_modes() + mode_index(s.mode);
  id = id * num_harvester_ + s.harvester;
  id = id * (b_max_ + 1) + s.battery;
  return state_id(id);
}

State StateSpace::decode(StateId sid) const {
  std::size_t id = index_of(sid);
  State s;
  s.battery = static_cast<int>(id % (b_max_ + 1));
  id /= (b_max_ + 1);
  s.harvester = static_cast<int>(id % num_harvester_);
  id /= num_harvester_;
  s.mode = mode_at(static_cast<int>(id % num_system_modes()));
  id /= num_system_modes();
  s.age = static_cast<int>(id) + 1;
  return s;
}

StateSpace enumerate_states(const ScaledConfig& cfg, std::size_t cap) {
  StateSpace space(cfg.a_max, cfg.num_modes(), cfg.n_rec, cfg.num_harvester_states(), cfg.b_max);
  // Guard the size computation itself against overflow before comparing.
  const double approx = static_cast<double>(cfg.a_max) * space.num_system_modes() *
                        cfg.num_harvester_states() * (static_cast<double>(cfg.b_max) + 1.0);
  if (approx > static_cast<double>(cap) || space.size() > cap) {
    std::ostringstream os;
    os << "state space has " << approx << " states, cap is " << cap;
    throw Error(ErrorKind::kStateSpaceTooLarge, os.str());
  }
  return space;
}

// ---------------------------------------------------------------------------
// Single-state semantics

std::vector<Action> feasible_actions(const State& s, const ScaledConfig& cfg) {
  std::vector<Action> out{Action::idle()};
  const int available = s.battery + cfg.harvest_power[s.harvester];
  for (int m = 1; m <= cfg.num_modes(); ++m) {
    if (available - cfg.mode_power[m - 1] >= 0) out.push_back(Action::tx(m));
  }
  return out;
}

namespace {

void add_outcome(std::vector<Outcome>& out, const State& next, double prob) {
  if (prob <= 0.0) return;
  for (auto& o : out) {
    if (o.next == next) {
      o.prob += prob;
      return;
    }
  }
  out.push_back({next, prob});
}

}  // namespace

std::vector<Outcome> transition(const State& s, Action d, const ScaledConfig& cfg) {
  const auto feasible = feasible_actions(s, cfg);
  if (std::find(feasible.begin(), feasible.end(), d) == feasible.end()) {
    std::ostringstream os;
    os << "action " << d.index() << " infeasible at (age " << s.age << ", mode "
       << to_string(s.mode) << ", harvester " << s.harvester << ", battery " << s.battery << ")";
    throw Error(ErrorKind::kInfeasibleAction, os.str());
  }

  const int aged = std::min(s.age + 1, cfg.a_max);
  const int harvest = cfg.harvest_power[s.harvester];
  const auto& q = cfg.harvester_transition[s.harvester];
  std::vector<Outcome> out;

  if (d.is_idle()) {
    const int plain = std::min(s.battery + harvest, cfg.b_max);
    SystemMode next_mode = SystemMode::long_idle();
    bool recovering = false;
    int m = s.mode.tx_mode;
    if (cfg.n_rec > 0) {
      if (s.mode.kind == SystemMode::Kind::kJustTx) {
        next_mode = SystemMode::post_tx(m, 1);
        recovering = true;
      } else if (s.mode.kind == SystemMode::Kind::kPostTx && s.mode.idle_slots < cfg.n_rec) {
        next_mode = SystemMode::post_tx(m, s.mode.idle_slots + 1);
        recovering = true;
      }
    }
    for (int j = 0; j < cfg.num_harvester_states(); ++j) {
      if (!recovering) {
        add_outcome(out, {aged, next_mode, j, plain}, q[j]);
        continue;
      }
      const int recovered = std::min(s.battery + harvest + cfg.recovery_increment[m - 1], cfg.b_max);
      add_outcome(out, {aged, next_mode, j, recovered}, q[j] * cfg.p_rec);
      add_outcome(out, {aged, next_mode, j, plain}, q[j] * (1.0 - cfg.p_rec));
    }
    return out;
  }

  const int m = d.mode();
  const double err = cfg.mode_error_prob[m - 1];
  const int after_tx = std::min(s.battery + harvest - cfg.mode_power[m - 1], cfg.b_max);
  for (int j = 0; j < cfg.num_harvester_states(); ++j) {
    add_outcome(out, {1, SystemMode::just_tx(m), j, after_tx}, q[j] * (1.0 - err));
    add_outcome(out, {aged, SystemMode::just_tx(m), j, after_tx}, q[j] * err);
  }
  return out;
}

// ---------------------------------------------------------------------------
// TransitionKernel

std::span<const Action> TransitionKernel::actions(StateId s) const {
  const auto first = slot_offset_[index_of(s)];
  return {actions_.data() + first, slot_offset_[index_of(s) + 1] - first};
}

std::span<const Transition> TransitionKernel::row_at(std::size_t slot) const {
  const auto first = entry_offset_[slot];
  return {entries_.data() + first, entry_offset_[slot + 1] - first};
}

bool TransitionKernel::is_feasible(StateId s, Action a) const {
  for (auto slot = first_slot(s); slot < end_slot(s); ++slot) {
    if (actions_[slot] == a) return true;
  }
  return false;
}

std::span<const Transition> TransitionKernel::row(StateId s, Action a) const {
  for (auto slot = first_slot(s); slot < end_slot(s); ++slot) {
    if (actions_[slot] == a) return row_at(slot);
  }
  std::ostringstream os;
  os << "no kernel row for state " << index_of(s) << " action " << a.index();
  throw Error(ErrorKind::kInfeasibleAction, os.str());
}

namespace {

struct KernelChunk {
  std::vector<std::size_t> rows_per_state;
  std::vector<Action> actions;
  std::vector<std::size_t> entries_per_row;
  std::vector<Transition> entries;
};

// Builds rows for states [begin, end) directly from the mixed-radix layout.
KernelChunk build_chunk(const ScaledConfig& cfg, const StateSpace& space, std::size_t begin,
                        std::size_t end) {
  KernelChunk chunk;
  const int num_h = cfg.num_harvester_states();
  const int num_b = cfg.b_max + 1;
  const int num_t = space.num_system_modes();
  const int M = cfg.num_modes();

  // Per harvester state: successors with positive probability.
  std::vector<std::vector<std::pair<int, double>>> successors(num_h);
  for (int i = 0; i < num_h; ++i) {
    for (int j = 0; j < num_h; ++j) {
      if (cfg.harvester_transition[i][j] > 0.0) {
        successors[i].emplace_back(j, cfg.harvester_transition[i][j]);
      }
    }
  }

  auto id_of = [&](int age, int t, int h, int b) {
    return state_id(((static_cast<std::size_t>(age - 1) * num_t + t) * num_h + h) * num_b + b);
  };

  std::vector<Transition> row;
  auto flush_row = [&](Action a) {
    std::sort(row.begin(), row.end(),
              [](const Transition& x, const Transition& y) { return x.next < y.next; });
    // Merge coinciding successors (battery clamp can make branches collide).
    std::size_t w = 0;
    for (std::size_t r = 0; r < row.size(); ++r) {
      if (w > 0 && row[w - 1].next == row[r].next) {
        row[w - 1].prob += row[r].prob;
      } else {
        row[w++] = row[r];
      }
    }
    row.resize(w);
    chunk.actions.push_back(a);
    chunk.entries_per_row.push_back(row.size());
    chunk.entries.insert(chunk.entries.end(), row.begin(), row.end());
    row.clear();
  };

  for (std::size_t id = begin; id < end; ++id) {
    const int b = static_cast<int>(id % num_b);
    const int h = static_cast<int>((id / num_b) % num_h);
    const int t = static_cast<int>((id / num_b / num_h) % num_t);
    const int age = static_cast<int>(id / num_b / num_h / num_t) + 1;
    const int next_age = age < cfg.a_max ? age + 1 : cfg.a_max;
    const int harvest = cfg.harvest_power[h];
    std::size_t rows = 0;

    // Idle. Mode index layout: 0 long idle, 1..M just transmitted,
    // M + (m-1)*n_rec + j for the j-th recovery slot of mode m.
    {
      int next_t = 0;
      int source_mode = 0;
      if (cfg.n_rec > 0 && t >= 1 && t <= M) {
        source_mode = t;
        next_t = M + (t - 1) * cfg.n_rec + 1;
      } else if (t > M) {
        const int k = t - M - 1;
        const int j = k % cfg.n_rec + 1;
        if (j < cfg.n_rec) {
          source_mode = k / cfg.n_rec + 1;
          next_t = t + 1;
        }
      }
      const int plain = std::min(b + harvest, cfg.b_max);
      for (const auto& [j, q] : successors[h]) {
        if (source_mode == 0) {
          row.push_back({id_of(next_age, next_t, j, plain), q});
        } else {
          const int boosted =
              std::min(b + harvest + cfg.recovery_increment[source_mode - 1], cfg.b_max);
          if (cfg.p_rec > 0.0) row.push_back({id_of(next_age, next_t, j, boosted), q * cfg.p_rec});
          if (cfg.p_rec < 1.0) {
            row.push_back({id_of(next_age, next_t, j, plain), q * (1.0 - cfg.p_rec)});
          }
        }
      }
      flush_row(Action::idle());
      ++rows;
    }

    for (int m = 1; m <= M; ++m) {
      const int left = b + harvest - cfg.mode_power[m - 1];
      if (left < 0) continue;
      const int bt = std::min(left, cfg.b_max);
      const double err = cfg.mode_error_prob[m - 1];
      for (const auto& [j, q] : successors[h]) {
        if (err < 1.0) row.push_back({id_of(1, m, j, bt), q * (1.0 - err)});
        if (err > 0.0) row.push_back({id_of(next_age, m, j, bt), q * err});
      }
      flush_row(Action::tx(m));
      ++rows;
    }
    chunk.rows_per_state.push_back(rows);
  }
  return chunk;
}

}  // namespace

TransitionKernel build_kernel(const ScaledConfig& cfg, const StateSpace& space, unsigned workers) {
  const std::size_t n = space.size();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));

  std::vector<KernelChunk> chunks(workers);
  if (workers == 1) {
    chunks[0] = build_chunk(cfg, space, 0, n);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      threads.emplace_back(
          [&, w, begin, end] { chunks[w] = build_chunk(cfg, space, begin, end); });
    }
    for (auto& t : threads) t.join();
  }

  TransitionKernel k;
  k.space_ = space;
  k.slot_offset_.reserve(n + 1);
  k.slot_offset_.push_back(0);
  k.entry_offset_.push_back(0);
  for (auto& c : chunks) {
    for (auto r : c.rows_per_state) k.slot_offset_.push_back(k.slot_offset_.back() + r);
    for (auto e : c.entries_per_row) k.entry_offset_.push_back(k.entry_offset_.back() + e);
    k.actions_.insert(k.actions_.end(), c.actions.begin(), c.actions.end());
    k.entries_.insert(k.entries_.end(), c.entries.begin(), c.entries.end());
    c = KernelChunk{};
  }
  return k;
}

void write_kernel(std::ostream& os, const TransitionKernel& kernel) {
  const auto old_precision = os.precision(17);
  for (std::size_t s = 0; s < kernel.num_states(); ++s) {
    const StateId sid = state_id(s);
    for (auto slot = kernel.first_slot(sid); slot < kernel.end_slot(sid); ++slot) {
      const int a = kernel.action_at(slot).index();
      for (const auto& t : kernel.row_at(slot)) {
        os << s << ' ' << a << ' ' << index_of(t.next) << ' ' << t.prob << '\n';
      }
    }
  }
  os.precision(old_precision);
}

}  // namespace ehaoi
