#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "casimir_mems/dynamics.hpp"
#include "casimir_mems/error.hpp"

using namespace casimir_mems;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double R = 100e-6;
constexpr double b = 131.0e-6;
constexpr double tau = 8.8168e-16;

// Q = 100: settling takes hundreds rather than tens of thousands of periods.
TorsionalOscillator desk_osc() {
  return TorsionalOscillator::from_frequency(7.1e-17, 2753.47, 7150).desk_scaled(71.5);
}

ForceLaw casimir() { return ForceLaw::casimir_sphere_plate({}, R); }

Trajectory synthetic(double omega, double phase, int spp, int periods, auto theta) {
  Trajectory t;
  t.omega = omega;
  t.phase = phase;
  t.samples_per_period = spp;
  const double dt = 2 * M_PI / omega / spp;
  for (int j = 0; j <= spp * periods; ++j) {
    const double time = 0.123 + j * dt;
    t.time.push_back(time);
    t.theta.push_back(theta(time));
    t.theta_dot.push_back(0.0);
  }
  return t;
}

SweepProtocol protocol(SweepKind kind, std::vector<double> schedule, const TorsionalOscillator& osc) {
  SweepProtocol p;
  p.kind = kind;
  p.schedule = std::move(schedule);
  p.settle_cycles = SweepProtocol::default_settle_cycles(osc);
  p.measure_cycles = 20;
  return p;
}

}  // namespace

TEST_CASE("lock-in extraction") {
  const double w = 1000.0, phi_d = 0.4;
  SECTION("pure cosine") {
    const auto seg = synthetic(w, phi_d, 64, 20, [&](double t) { return 2.5e-4 * std::cos(w * t + phi_d - 0.7); });
    const auto s = extract_steady_amplitude(seg, w);
    CHECK_THAT(s.amplitude, WithinRel(2.5e-4, 1e-9));
    CHECK_THAT(s.phase, WithinAbs(-0.7, 1e-9));
    CHECK(s.converged);
  }
  SECTION("third harmonic is rejected") {
    const auto seg = synthetic(w, phi_d, 64, 20, [&](double t) {
      return 1e-5 * std::cos(w * t + phi_d + 1.0) + 1e-6 * std::cos(3 * (w * t + phi_d) + 0.3);
    });
    CHECK_THAT(extract_steady_amplitude(seg, w).amplitude, WithinRel(1e-5, 1e-6));
  }
  SECTION("a ramping amplitude does not converge") {
    const auto seg = synthetic(w, phi_d, 64, 20, [&](double t) { return (1.0 + 50.0 * (t - 0.123)) * std::cos(w * t); });
    CHECK_FALSE(extract_steady_amplitude(seg, w).converged);
  }
  SECTION("too short") {
    const auto seg = synthetic(w, phi_d, 64, 1, [](double) { return 0.0; });
    CHECK_THROWS_AS(extract_steady_amplitude(seg, w), InsufficientDataError);
  }
}

TEST_CASE("free linear resonance") {
  const auto osc = desk_osc();
  const DriveConfig drive{tau, osc.omega0, 0.0};
  const double period = 2 * M_PI / osc.omega0;
  const auto traj = integrate(osc, {b, 1e-3}, ForceLaw{}, drive, {}, (8 * osc.quality_Q + 20) * period);
  REQUIRE(traj.samples_per_period == 64);
  CHECK(traj.size() == static_cast<std::size_t>(64 * (8 * osc.quality_Q + 20)) + 1);

  Trajectory tail = traj;
  const std::size_t keep = 64 * 20 + 1;
  tail.time.erase(tail.time.begin(), tail.time.end() - keep);
  tail.theta.erase(tail.theta.begin(), tail.theta.end() - keep);
  tail.theta_dot.erase(tail.theta_dot.begin(), tail.theta_dot.end() - keep);
  const auto s = extract_steady_amplitude(tail, osc.omega0);
  CHECK_THAT(s.amplitude, WithinRel(tau / (2 * osc.inertia_I * osc.omega0 * osc.gamma), 1e-3));
  CHECK_THAT(s.phase, WithinAbs(-M_PI / 2, 1e-3));
  CHECK(s.converged);
}

TEST_CASE("ring-down decays at gamma") {
  const auto osc = desk_osc();
  const double wd = std::sqrt(osc.omega0 * osc.omega0 - osc.gamma * osc.gamma);
  // The sample grid follows the drive frequency, so use wd with zero torque.
  const auto traj = integrate(osc, {b, 1e-3}, ForceLaw{}, {0.0, wd, 0.0}, {1e-6, 0.0, 0.0}, 50 * 2 * M_PI / wd);
  const double t50 = traj.time.back();
  const double measured = -std::log(traj.theta.back() / traj.theta.front()) / t50;
  CHECK_THAT(measured, WithinRel(osc.gamma, 5e-3));
  // Zero crossings are spaced by half a damped period.
  int crossings = 0;
  for (std::size_t i = 1; i < traj.size(); ++i) crossings += (traj.theta[i - 1] > 0) != (traj.theta[i] > 0);
  CHECK(crossings == 100);
}

TEST_CASE("energy is conserved without damping or drive") {
  auto osc = TorsionalOscillator::from_frequency(7.1e-17, 2753.47, 1e15);
  const Coupling c{b, 120e-9};
  const auto law = casimir();
  // Dormand-Prince is not symplectic: truncation dissipation accumulates over
  // many cycles, so the invariant is checked at tolerances well below default.
  IntegrationOptions opt;
  opt.rtol = 1e-13;
  opt.atol_theta = 1e-19;
  const double period = 2 * M_PI / osc.omega0;
  const auto traj = integrate(osc, c, law, {0.0, osc.omega0, 0.0}, {1e-4, 0.0, 0.0}, 1000 * period, opt);
  const double e0 = oscillator_energy(osc, c, law, traj.theta.front(), traj.theta_dot.front());
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); i += 97)
    worst = std::max(worst, std::abs(oscillator_energy(osc, c, law, traj.theta[i], traj.theta_dot[i]) - e0) / e0);
  CHECK(worst < 1e-8);
}

TEST_CASE("no-sphere limit") {
  const auto osc = TorsionalOscillator::from_frequency(7.1e-17, 2753.47, 7150);
  const auto shift = linearized_shift(osc, b, casimir().derivative(3.3e-6, 1));
  CHECK(std::abs(shift.shift_Hz()) < 0.01);
}

TEST_CASE("pull-in is reported with a time stamp") {
  const auto osc = desk_osc();
  const double z = 20e-9;
  SECTION("initial state inside the threshold") {
    CHECK_THROWS_AS(integrate(osc, {b, z}, casimir(), {0.0, osc.omega0, 0.0}, {z / b, 0.0, 0.0}, 1e-3), PullInError);
  }
  SECTION("snap during integration") {
    try {
      integrate(osc, {b, z}, casimir(), {0.0, osc.omega0, 0.0}, {0.0, 5e-4 * osc.omega0, 0.0}, 1e-2);
      FAIL("expected pull-in");
    } catch (const PullInError& e) {
      CHECK(e.time() > 0.0);
      CHECK(e.gap() < 1e-9);
      CHECK(e.code() == "pull_in");
    }
  }
}

TEST_CASE("input validation") {
  const auto osc = desk_osc();
  IntegrationOptions opt;
  opt.samples_per_period = 32;
  CHECK_THROWS_AS(integrate(osc, {b, 1e-6}, casimir(), {tau, osc.omega0, 0.0}, {}, 1e-3, opt), DomainError);
  CHECK_THROWS_AS(integrate(osc, {b, 1e-6}, casimir(), {tau, -1.0, 0.0}, {}, 1e-3), DomainError);
  CHECK_THROWS_AS(integrate(osc, {b, 1e-6}, casimir(), {tau, osc.omega0, 0.0}, {}, 0.0), DomainError);

  auto p = protocol(SweepKind::frequency, {osc.omega0, osc.omega0 + 1}, osc);
  p.settle_cycles = 0.99 * SweepProtocol::minimum_settle_cycles(osc);
  CHECK_THROWS_AS(swept_frequency(osc, {b, 1e-6}, casimir(), tau, p), DomainError);
  p = protocol(SweepKind::frequency, {osc.omega0, osc.omega0 + 1, osc.omega0}, osc);
  CHECK_THROWS_AS(swept_frequency(osc, {b, 1e-6}, casimir(), tau, p), DomainError);
  p = protocol(SweepKind::distance, {1e-6, 2e-6}, osc);
  CHECK_THROWS_AS(swept_frequency(osc, {b, 1e-6}, casimir(), tau, p), DomainError);
  CHECK(SweepProtocol::default_settle_cycles(osc) == 8 * osc.quality_Q);
  CHECK_THAT(SweepProtocol::minimum_settle_cycles(osc), WithinRel(10 * osc.quality_Q / M_PI, 1e-15));
}

TEST_CASE("frequency sweeps far from the sphere") {
  const auto osc = desk_osc();
  std::vector<double> up;
  for (int i = 0; i < 9; ++i) up.push_back(osc.omega0 + (i - 4) * osc.gamma);
  auto down = up;
  std::reverse(down.begin(), down.end());
  const Coupling c{b, 3.3e-6};
  const auto ru = swept_frequency(osc, c, casimir(), tau, protocol(SweepKind::frequency, up, osc));
  const auto rd = swept_frequency(osc, c, casimir(), tau, protocol(SweepKind::frequency, down, osc));
  REQUIRE(ru.points.size() == 9);
  CHECK(ru.direction == SweepDirection::up);
  CHECK(rd.direction == SweepDirection::down);
  CHECK(direction_label(ru.kind, ru.direction) == "up");
  for (int i = 0; i < 9; ++i) {
    CHECK(ru.points[i].setpoint == up[i]);
    CHECK_THAT(ru.points[i].amplitude, WithinRel(rd.points[8 - i].amplitude, 1e-3));
    CHECK(ru.points[i].converged);
    // Linear Lorentzian amplitude.
    const double w = up[i];
    const double lin = tau / osc.inertia_I /
                       std::hypot(osc.omega0 * osc.omega0 - w * w, 2 * osc.gamma * w);
    CHECK_THAT(ru.points[i].amplitude, WithinRel(lin, 2e-3));
  }
  CHECK(ru.last_segment.size() == 64 * 20 + 1);
  CHECK(ru.final_state.time == ru.last_segment.time.back());
}

TEST_CASE("sweeps are bitwise reproducible") {
  const auto osc = desk_osc();
  const auto t = taylor_coefficients(osc, b, casimir(), 141e-9);
  const auto p = protocol(SweepKind::frequency, {t.omega1 - 2 * osc.gamma, t.omega1, t.omega1 + osc.gamma}, osc);
  const auto a = swept_frequency(osc, {b, 141e-9}, casimir(), tau, p);
  const auto c = swept_frequency(osc, {b, 141e-9}, casimir(), tau, p);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].amplitude == c.points[i].amplitude);
    CHECK(a.points[i].phase == c.points[i].phase);
  }
  CHECK(a.final_state.theta == c.final_state.theta);
}

TEST_CASE("distance sweeps far from the sphere agree") {
  const auto osc = desk_osc();
  const double w = osc.omega0 + 71.5 * 2 * M_PI * (2748.0 - 2753.47);
  const std::vector<double> approach{3.5e-6, 3.4e-6, 3.3e-6};
  const std::vector<double> retract{3.3e-6, 3.4e-6, 3.5e-6};
  const auto ra = swept_distance(osc, b, casimir(), tau, w, protocol(SweepKind::distance, approach, osc));
  const auto rr = swept_distance(osc, b, casimir(), tau, w, protocol(SweepKind::distance, retract, osc), {},
                                 ra.final_state);
  CHECK(direction_label(ra.kind, ra.direction) == "approach");
  CHECK(direction_label(rr.kind, rr.direction) == "retract");
  for (int i = 0; i < 3; ++i) CHECK_THAT(ra.points[i].amplitude, WithinRel(rr.points[2 - i].amplitude, 1e-3));
}

TEST_CASE("sweep errors name the setpoint") {
  const auto osc = desk_osc();
  // Driving hard at 20 nm snaps the plate.
  const auto p = protocol(SweepKind::distance, {20e-9}, osc);
  try {
    swept_distance(osc, b, casimir(), 1e3 * tau, osc.omega0, p);
    FAIL("expected pull-in");
  } catch (const PullInError& e) {
    CHECK_THAT(std::string(e.what()), ContainsSubstring("distance setpoint"));
  }
}
