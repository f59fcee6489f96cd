#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "ehaoi/statespace.hpp"
#include "fixtures.hpp"

using namespace ehaoi;
using namespace ehaoi::testing;

namespace {

ScaledConfig scaled(const SystemConfig& c) { return scale_energies(validate_config(c)); }

double prob_of(const std::vector<Outcome>& out, const State& s) {
  for (const auto& o : out) {
    if (o.next == s) return o.prob;
  }
  return 0.0;
}

double total(const std::vector<Outcome>& out) {
  double t = 0.0;
  for (const auto& o : out) t += o.prob;
  return t;
}

// Structural invariants of one transition row, checked from first principles.
void check_row_invariants(const State& s, Action d, const std::vector<Outcome>& out,
                          const ScaledConfig& cfg) {
  const int aged = std::min(s.age + 1, cfg.a_max);
  for (const auto& o : out) {
    const State& n = o.next;
    CHECK(o.prob > 0.0);
    CHECK((n.age == 1 || n.age == aged));
    if (n.age == 1 && aged != 1) CHECK_FALSE(d.is_idle());
    CHECK(n.battery >= 0);
    CHECK(n.battery <= cfg.b_max);
    CHECK(cfg.harvester_transition[s.harvester][n.harvester] > 0.0);
    if (!d.is_idle()) {
      CHECK(n.mode == SystemMode::just_tx(d.mode()));
      const int b_t = s.battery + cfg.harvest_power[s.harvester] - cfg.mode_power[d.mode() - 1];
      CHECK(b_t >= 0);
      CHECK(n.battery == std::min(b_t, cfg.b_max));
    } else {
      CHECK(n.mode.kind != SystemMode::Kind::kJustTx);
      if (n.mode.kind == SystemMode::Kind::kPostTx) {
        CHECK(cfg.n_rec > 0);
        if (n.mode.idle_slots == 1) {
          CHECK(s.mode == SystemMode::just_tx(n.mode.tx_mode));
        } else {
          CHECK(s.mode == SystemMode::post_tx(n.mode.tx_mode, n.mode.idle_slots - 1));
        }
      }
      const int plain = std::min(s.battery + cfg.harvest_power[s.harvester], cfg.b_max);
      if (n.mode.kind == SystemMode::Kind::kPostTx) {
        const int rec = std::min(s.battery + cfg.harvest_power[s.harvester] +
                                     cfg.recovery_increment[n.mode.tx_mode - 1],
                                 cfg.b_max);
        CHECK((n.battery == plain || n.battery == rec));
      } else {
        CHECK(n.battery == plain);
      }
    }
  }
  CHECK(std::abs(total(out) - 1.0) <= 1e-12);
}

State random_state(const StateSpace& space, std::mt19937_64& rng) {
  return space.decode(
      state_id(std::uniform_int_distribution<std::size_t>(0, space.size() - 1)(rng)));
}

}  // namespace

TEST_CASE("state space sizes follow the product formula") {
  const ScaledConfig big = scaled(two_mode_preset(10, 0.5));
  CHECK(enumerate_states(big).size() == 20u * 7u * 2u * 21u);
  CHECK(enumerate_states(big).size() == 5880u);
  CHECK(enumerate_states(scaled(tiny18())).size() == 18u);
}

TEST_CASE("state cap is enforced") {
  const ScaledConfig big = scaled(two_mode_preset(10, 0.5));
  CHECK_THROWS_AS(enumerate_states(big, 5000), Error);
  try {
    enumerate_states(big, 5000);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kStateSpaceTooLarge);
  }
}

TEST_CASE("encode and decode are inverse") {
  const ScaledConfig cfg = scaled(two_mode_preset(10, 0.5));
  const StateSpace space = enumerate_states(cfg);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const State s = space.decode(state_id(i));
    REQUIRE(space.contains(s));
    CHECK(index_of(space.encode(s)) == i);
  }
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    State s;
    s.age = std::uniform_int_distribution<int>(1, 20)(rng);
    s.mode = space.mode_at(std::uniform_int_distribution<int>(0, 6)(rng));
    s.harvester = std::uniform_int_distribution<int>(0, 1)(rng);
    s.battery = std::uniform_int_distribution<int>(0, 20)(rng);
    CHECK(space.decode(space.encode(s)) == s);
  }
}

TEST_CASE("mode labels") {
  CHECK(to_string(SystemMode::long_idle()) == "0");
  CHECK(to_string(SystemMode::just_tx(2)) == "2");
  CHECK(to_string(SystemMode::post_tx(1, 2)) == "1^2");
}

TEST_CASE("feasible actions") {
  // Config units: battery 3, on-state harvest 2, powers 2 and 4; scale 2.
  const ScaledConfig cfg = scaled(sample_path_setup());
  const State on3{4, SystemMode::long_idle(), 1, 6};
  CHECK(feasible_actions(on3, cfg) ==
        std::vector<Action>{Action::idle(), Action::tx(1), Action::tx(2)});
  const State empty{4, SystemMode::long_idle(), 0, 0};
  CHECK(feasible_actions(empty, cfg) == std::vector<Action>{Action::idle()});
  // Battery plus harvest exactly equal to the power.
  const State exact{4, SystemMode::long_idle(), 0, 4};
  CHECK(feasible_actions(exact, cfg) == std::vector<Action>{Action::idle(), Action::tx(1)});
  const auto out = transition(exact, Action::tx(1), cfg);
  for (const auto& o : out) CHECK(o.next.battery == 0);
}

TEST_CASE("idle right after a transmission with recovery") {
  const ScaledConfig cfg = scaled(sample_path_setup(0.8));
  // Config battery 2 is 4 in scaled units; increment_1 = 2 scaled units.
  const State s{5, SystemMode::just_tx(1), 0, 4};
  const auto out = transition(s, Action::idle(), cfg);
  CHECK(out.size() == 4);
  CHECK(prob_of(out, {6, SystemMode::post_tx(1, 1), 0, 6}) == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(prob_of(out, {6, SystemMode::post_tx(1, 1), 0, 4}) == doctest::Approx(0.18).epsilon(1e-14));
  CHECK(prob_of(out, {6, SystemMode::post_tx(1, 1), 1, 6}) == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(prob_of(out, {6, SystemMode::post_tx(1, 1), 1, 4}) == doctest::Approx(0.02).epsilon(1e-14));
}

TEST_CASE("idle at the end of the recovery window") {
  const ScaledConfig cfg = scaled(sample_path_setup(0.8));
  for (int h = 0; h < 2; ++h) {
    const State s{3, SystemMode::post_tx(2, 2), h, 4};
    const auto out = transition(s, Action::idle(), cfg);
    CHECK(out.size() == 2);
    for (const auto& o : out) {
      CHECK(o.next.mode == SystemMode::long_idle());
      CHECK(o.next.battery == std::min(4 + cfg.harvest_power[h], cfg.b_max));
    }
    CHECK(total(out) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("transmit branches from long idle") {
  SystemConfig c = two_mode_preset(10, 0.5);
  const ScaledConfig cfg = scaled(c);
  // Scaled power of mode 2 is 12; battery 12 in the off state leaves 0.
  const State s{4, SystemMode::long_idle(), 0, 12};
  const auto out = transition(s, Action::tx(2), cfg);
  // Hand enumeration: success 0.999 and failure 0.001 times q(off, .) = 0.9 / 0.1.
  CHECK(out.size() == 4);
  const auto j2 = SystemMode::just_tx(2);
  CHECK(prob_of(out, {1, j2, 0, 0}) == doctest::Approx(0.8991).epsilon(1e-13));
  CHECK(prob_of(out, {1, j2, 1, 0}) == doctest::Approx(0.0999).epsilon(1e-13));
  CHECK(prob_of(out, {5, j2, 0, 0}) == doctest::Approx(0.0009).epsilon(1e-12));
  CHECK(prob_of(out, {5, j2, 1, 0}) == doctest::Approx(0.0001).epsilon(1e-12));
  double success = prob_of(out, {1, j2, 0, 0}) + prob_of(out, {1, j2, 1, 0});
  CHECK(success == doctest::Approx(0.999).epsilon(1e-14));
}

TEST_CASE("failure from inside the recovery window ages the packet") {
  const ScaledConfig cfg = scaled(sample_path_setup(0.8));
  const State s{3, SystemMode::post_tx(1, 1), 1, 8};
  const auto out = transition(s, Action::tx(2), cfg);
  double fail = 0.0;
  for (const auto& o : out) {
    CHECK((o.next.age == 1 || o.next.age == 4));
    if (o.next.age == 4) fail += o.prob;
  }
  CHECK(fail == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("age saturates at the cap") {
  const ScaledConfig cfg = scaled(tiny18());
  const State s{3, SystemMode::long_idle(), 0, 0};
  const auto out = transition(s, Action::idle(), cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].next == State{3, SystemMode::long_idle(), 0, 1});
  CHECK(out[0].prob == 1.0);
}

TEST_CASE("infeasible action throws") {
  const ScaledConfig cfg = scaled(tiny18());
  const State s{1, SystemMode::long_idle(), 0, 0};
  CHECK_THROWS_AS(transition(s, Action::tx(1), cfg), Error);
  CHECK_THROWS_AS(transition(s, Action::tx(2), cfg), Error);
}

TEST_CASE("recovery returns the full transmission energy") {
  // No harvest, room in the battery, every recovery draw succeeds.
  for (int n_rec = 1; n_rec <= 3; ++n_rec) {
    SystemConfig c;
    c.b_max = 20;
    c.a_max = 10;
    c.modes = {{3, 0.2}, {5, 0.1}};
    c.harvester = {{{1.0}}, {0}};
    c.recovery = {n_rec, 0.7};
    const ScaledConfig cfg = scaled(c);
    for (int m = 1; m <= 2; ++m) {
      State s{2, SystemMode::just_tx(m), 0, 0};
      const int start = s.battery;
      for (int j = 1; j <= n_rec; ++j) {
        const auto out = transition(s, Action::idle(), cfg);
        const auto best = std::max_element(out.begin(), out.end(), [](auto& a, auto& b) {
          return a.next.battery < b.next.battery;
        });
        CHECK(best->next.mode == SystemMode::post_tx(m, j));
        s = best->next;
      }
      CHECK(s.battery - start == cfg.mode_power[m - 1]);
      const auto last = transition(s, Action::idle(), cfg);
      CHECK(last.size() == 1);
      CHECK(last[0].next.mode == SystemMode::long_idle());
      CHECK(last[0].next.battery == s.battery);
    }
  }
}

TEST_CASE("18-state kernel") {
  const Instance inst = make_instance(tiny18());
  const auto& k = inst.kernel;
  CHECK(k.num_states() == 18);
  std::size_t idle_rows = 0;
  for (std::size_t s = 0; s < 18; ++s) {
    for (auto slot = k.first_slot(state_id(s)); slot < k.end_slot(state_id(s)); ++slot) {
      if (k.action_at(slot).is_idle()) ++idle_rows;
      double sum = 0.0;
      for (const auto& t : k.row_at(slot)) sum += t.prob;
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    // battery + 1 >= 2 is the only condition for Tx.
    const State st = k.space().decode(state_id(s));
    CHECK(k.is_feasible(state_id(s), Action::tx(1)) == (st.battery >= 1));
  }
  CHECK(idle_rows == 18);
  CHECK(k.num_rows() == 18 + 12);
}

TEST_CASE("certain recovery leaves one branch per harvester state") {
  const Instance inst = make_instance(sample_path_setup(1.0));
  const auto& k = inst.kernel;
  std::size_t checked = 0;
  for (std::size_t s = 0; s < k.num_states(); ++s) {
    const State st = k.space().decode(state_id(s));
    const bool window = st.mode.kind == SystemMode::Kind::kJustTx ||
                        (st.mode.kind == SystemMode::Kind::kPostTx && st.mode.idle_slots < 2);
    if (!window) continue;
    CHECK(k.row(state_id(s), Action::idle()).size() == 2);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("batched kernel matches single-state transitions") {
  const Instance inst = make_instance(two_mode_preset(10, 0.6));
  REQUIRE(inst.space.size() == 5880);
  std::mt19937_64 rng(17);
  int pairs = 0;
  while (pairs < 1000) {
    const State s = random_state(inst.space, rng);
    const auto acts = feasible_actions(s, inst.cfg);
    const Action d = acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)];
    auto expected = transition(s, d, inst.cfg);
    std::sort(expected.begin(), expected.end(), [&](const Outcome& a, const Outcome& b) {
      return inst.space.encode(a.next) < inst.space.encode(b.next);
    });
    const auto row = inst.kernel.row(inst.space.encode(s), d);
    REQUIRE(row.size() == expected.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      CHECK(row[i].next == inst.space.encode(expected[i].next));
      CHECK(row[i].prob == doctest::Approx(expected[i].prob).epsilon(1e-15));
    }
    ++pairs;
  }
  // Feasible sets agree everywhere.
  for (std::size_t i = 0; i < inst.space.size(); ++i) {
    const auto acts = feasible_actions(inst.space.decode(state_id(i)), inst.cfg);
    const auto row_acts = inst.kernel.actions(state_id(i));
    CHECK(std::equal(acts.begin(), acts.end(), row_acts.begin(), row_acts.end()));
  }
}

TEST_CASE("kernel does not depend on the worker count") {
  const SystemConfig c = two_mode_preset(7, 0.3);
  const Instance one = make_instance(c, 1);
  const Instance four = make_instance(c, 4);
  std::ostringstream a, b;
  write_kernel(a, one.kernel);
  write_kernel(b, four.kernel);
  CHECK(a.str() == b.str());
  CHECK(a.str().size() > 0);
}

TEST_CASE("kernel export format") {
  const Instance inst = make_instance(tiny18());
  std::ostringstream os;
  write_kernel(os, inst.kernel);
  std::istringstream in(os.str());
  std::size_t lines = 0;
  std::size_t sid, action, next;
  double p;
  while (in >> sid >> action >> next >> p) {
    CHECK(inst.kernel.is_feasible(state_id(sid), Action::from_index(static_cast<int>(action))));
    ++lines;
  }
  CHECK(lines == inst.kernel.num_entries());
}

TEST_CASE("random instances satisfy the row invariants") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 30; ++i) {
    const SystemConfig c = random_config(rng);
    const ScaledConfig cfg = scaled(c);
    const StateSpace space = enumerate_states(cfg);
    for (std::size_t id = 0; id < space.size(); ++id) {
      const State s = space.decode(state_id(id));
      for (Action d : feasible_actions(s, cfg)) check_row_invariants(s, d, transition(s, d, cfg), cfg);
    }
  }
}
