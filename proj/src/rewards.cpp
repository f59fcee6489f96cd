#include "ehaoi/rewards.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ehaoi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void check_reward_spec(const RewardSpec& spec) {
  std::visit(overloaded{
                 [](const PeakHit& p) {
                   if (!(p.r_prime < 0.0) || !std::isfinite(p.r_prime)) {
                     std::ostringstream os;
                     os << "r_prime must be negative, got " << p.r_prime;
                     throw Error(ErrorKind::kOutOfRange, os.str());
                   }
                 },
                 [](const AverageAge&) {},
                 [](const Weighted& w) {
                   if (!(w.alpha >= 0.0 && w.alpha <= 1.0)) {
                     std::ostringstream os;
                     os << "alpha must lie in [0, 1], got " << w.alpha;
                     throw Error(ErrorKind::kOutOfRange, os.str());
                   }
                 },
             },
             spec);
}

std::string objective_name(const RewardSpec& spec) {
  return std::visit(overloaded{
                        [](const PeakHit&) { return std::string("peak"); },
                        [](const AverageAge&) { return std::string("avg"); },
                        [](const Weighted&) { return std::string("weighted"); },
                    },
                    spec);
}

double objective_alpha(const RewardSpec& spec) {
  if (const auto* w = std::get_if<Weighted>(&spec)) return w->alpha;
  return std::numeric_limits<double>::quiet_NaN();
}

double reward(const State& s, const RewardSpec& spec, int a_max) {
  return std::visit(overloaded{
                        [&](const PeakHit& p) { return s.age == a_max ? p.r_prime : 0.0; },
                        [&](const AverageAge&) { return -static_cast<double>(s.age); },
                        [&](const Weighted& w) {
                          return s.age == a_max ? -static_cast<double>(a_max)
                                                : -w.alpha * static_cast<double>(s.age);
                        },
                    },
                    spec);
}

std::vector<double> reward_vector(const StateSpace& space, const RewardSpec& spec) {
  std::vector<double> r(space.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = reward(space.decode(state_id(i)), spec, space.a_max());
  }
  return r;
}

}  // namespace ehaoi
