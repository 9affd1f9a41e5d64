#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "casimir_mems/calibration.hpp"
#include "casimir_mems/error.hpp"

using namespace casimir_mems;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double R = 100e-6;
constexpr double b = 131.0e-6;
constexpr double z0 = 122.4e-9;
constexpr double z1 = 85.9e-9;
constexpr double V = 0.4085;
constexpr double V0 = 0.075;

TorsionalOscillator paper_osc() { return TorsionalOscillator::from_frequency(7.1e-17, 2753.47, 7150); }

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

ShiftTruth electrostatic_truth() {
  ShiftTruth t;
  t.kind = ShiftKind::electrostatic;
  t.osc = paper_osc();
  t.radius_R = R;
  t.lever_b = b;
  t.offset = z0;
  t.voltage_V = V;
  t.residual_V0 = V0;
  return t;
}

ShiftTruth casimir_truth() {
  ShiftTruth t;
  t.kind = ShiftKind::casimir;
  t.osc = paper_osc();
  t.radius_R = R;
  t.lever_b = b;
  t.offset = z1;
  return t;
}

double percentile95(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(std::ceil(0.95 * v.size())) - 1];
}

}  // namespace

TEST_CASE("residual voltage from the parabola vertex") {
  SECTION("exact parabola") {
    const auto scan = synthesize_voltage_scan(V0, -12.0, 2753.0, grid(-0.5, 0.5, 11), 0.0, 1);
    CHECK_THAT(fit_residual_voltage(scan), WithinAbs(V0, 1e-12));
  }
  SECTION("symmetric points about zero") {
    std::vector<VoltagePoint> pts;
    for (double v : {-0.3, -0.1, 0.1, 0.3}) pts.push_back({v, 100.0 - 5.0 * v * v});
    CHECK_THAT(fit_residual_voltage(pts), WithinAbs(0.0, 1e-14));
  }
  SECTION("noisy scan") {
    const auto volts = grid(-0.5, 0.5, 21);
    std::vector<double> err;
    for (std::uint64_t seed = 1; seed <= 100; ++seed)
      err.push_back(std::abs(fit_residual_voltage(synthesize_voltage_scan(V0, -12.0, 2753.0, volts, 0.01, seed)) - V0));
    CHECK(percentile95(err) < 1e-3);
  }
  SECTION("failures") {
    std::vector<VoltagePoint> two{{0.1, 1.0}, {0.1, 1.1}, {0.2, 0.9}};
    CHECK_THROWS_MATCHES(fit_residual_voltage(two), FitError,
                         Catch::Matchers::Predicate<FitError>([](const FitError& e) { return e.code() == "rank"; }));
    const auto up = synthesize_voltage_scan(V0, +3.0, 2753.0, grid(-0.5, 0.5, 7), 0.0, 1);
    CHECK_THROWS_MATCHES(fit_residual_voltage(up), FitError,
                         Catch::Matchers::Predicate<FitError>([](const FitError& e) { return e.code() == "not_a_maximum"; }));
  }
}

TEST_CASE("shift models match the first-order expression") {
  const auto osc = paper_osc();
  const PhysicalConstants k;
  const double w0 = 2 * M_PI * 2753.47;
  const double I = 7.1e-17;

  const double fprime_el = k.epsilon0 * M_PI * R * (V - V0) * (V - V0) / (z0 * z0);
  const double expect_el = -b * b * fprime_el / (4 * M_PI * I * w0);
  CHECK_THAT(electrostatic_shift_model(osc, k, R, b, z0, V - V0, 0.0), WithinRel(expect_el, 1e-12));
  CHECK_THAT(expect_el, WithinAbs(-22.958, 1e-3));

  const double z = 20e-9 + z1;
  const double fprime_c = M_PI * M_PI * M_PI * k.hbar * k.c * R / (120 * std::pow(z, 4));
  CHECK_THAT(casimir_shift_model(osc, k, R, b, z1, 20e-9), WithinRel(-b * b * fprime_c / (4 * M_PI * I * w0), 1e-12));

  SECTION("scaling") {
    const double s1 = electrostatic_shift_model(osc, k, R, b, z0, 0.2, 50e-9);
    const double s2 = electrostatic_shift_model(osc, k, R, b, z0, 0.4, 50e-9);
    CHECK_THAT(s2 / s1, WithinRel(4.0, 1e-12));
    const double r1 = casimir_shift_model(osc, k, R, b, z1, 50e-9);
    const double r2 = casimir_shift_model(osc, k, 2 * R, b, z1, 50e-9);
    CHECK_THAT(r2 / r1, WithinRel(2.0, 1e-12));
    CHECK(s1 < 0.0);
    CHECK(r1 < 0.0);
  }
}

TEST_CASE("electrostatic geometry fit") {
  const auto truth = electrostatic_truth();
  const auto dz = grid(0.0, 500e-9, 30);

  SECTION("noiseless round trip") {
    const auto data = synthesize_shift_dataset(truth, dz, 0.0, 1);
    const auto fit = fit_electrostatic_geometry(data, truth.osc, R, V, V0);
    CHECK(fit.converged);
    CHECK_THAT(fit.value("z0"), WithinRel(z0, 1e-6));
    CHECK_THAT(fit.value("b"), WithinRel(b, 1e-6));
    CHECK(fit.residual_rms < 1e-9);
    for (const auto& p : fit.parameters) CHECK_FALSE(p.at_bound);
    REQUIRE(fit.covariance.has_value());
    CHECK(fit.covariance->size() == 4);
  }
  SECTION("round trip across the parameter box") {
    for (double zt : {5e-9, 122.4e-9, 2e-6}) {
      for (double bt : {10e-6, 131e-6, 800e-6}) {
        auto t = truth;
        t.offset = zt;
        t.lever_b = bt;
        const auto fit = fit_electrostatic_geometry(synthesize_shift_dataset(t, dz, 0.0, 1), t.osc, R, V, V0);
        CAPTURE(zt, bt);
        CHECK_THAT(fit.value("z0"), WithinRel(zt, 1e-6));
        CHECK_THAT(fit.value("b"), WithinRel(bt, 1e-6));
      }
    }
  }
  SECTION("relative noise") {
    std::vector<double> ez0, eb;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto data = synthesize_shift_dataset(truth, dz, 0.01, seed, NoiseModel::relative);
      const auto fit = fit_electrostatic_geometry(data, truth.osc, R, V, V0);
      ez0.push_back(std::abs(fit.value("z0") / z0 - 1));
      eb.push_back(std::abs(fit.value("b") / b - 1));
    }
    CHECK(percentile95(ez0) < 0.02);
    CHECK(percentile95(eb) < 0.02);
  }
  SECTION("no signal at the residual voltage") {
    const auto data = synthesize_shift_dataset(truth, dz, 0.0, 1);
    CHECK_THROWS_AS(fit_electrostatic_geometry(data, truth.osc, R, V0, V0), DomainError);
  }
  SECTION("wrong dataset kind") {
    const auto data = synthesize_shift_dataset(casimir_truth(), dz, 0.0, 1);
    CHECK_THROWS_AS(fit_electrostatic_geometry(data, truth.osc, R, V, V0), DomainError);
  }
  SECTION("rms history never increases") {
    const auto data = synthesize_shift_dataset(truth, dz, 0.05, 3);
    const auto fit = fit_electrostatic_geometry(data, truth.osc, R, V, V0);
    REQUIRE_FALSE(fit.rms_history.empty());
    for (std::size_t i = 1; i < fit.rms_history.size(); ++i)
      CHECK(fit.rms_history[i] <= fit.rms_history[i - 1] * (1 + 1e-12));
  }
}

TEST_CASE("Casimir offset fit") {
  const auto truth = casimir_truth();
  const auto dz = grid(0.0, 500e-9, 30);

  SECTION("noiseless round trip") {
    const auto data = synthesize_shift_dataset(truth, dz, 0.0, 1);
    const auto fit = fit_casimir_offset(data, truth.osc, R, b);
    CHECK(fit.converged);
    CHECK_THAT(fit.value("z1"), WithinRel(z1, 1e-8));
    CHECK_FALSE(fit.parameter("z1").at_bound);
    for (double zt : {15e-9, 400e-9, 900e-9}) {
      auto t = truth;
      t.offset = zt;
      CHECK_THAT(fit_casimir_offset(synthesize_shift_dataset(t, dz, 0.0, 1), t.osc, R, b).value("z1"),
                 WithinRel(zt, 1e-6));
    }
  }
  SECTION("relative noise") {
    std::vector<double> e;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto data = synthesize_shift_dataset(truth, dz, 0.01, seed, NoiseModel::relative);
      e.push_back(std::abs(fit_casimir_offset(data, truth.osc, R, b).value("z1") / z1 - 1));
    }
    CHECK(percentile95(e) < 0.015);
  }
  SECTION("a constant frequency offset degrades the fit") {
    auto data = synthesize_shift_dataset(truth, dz, 0.0, 1);
    const double clean = fit_casimir_offset(data, truth.osc, R, b).residual_rms;
    for (auto& p : data.points) p.freq_shift += 0.5;
    const auto biased = fit_casimir_offset(data, truth.osc, R, b);
    CHECK(biased.residual_rms > 100 * std::max(clean, 1e-6));
    CHECK(std::abs(biased.value("z1") / z1 - 1) > 1e-3);
  }
  SECTION("bounds are reported") {
    auto data = synthesize_shift_dataset(truth, dz, 0.0, 1);
    for (auto& p : data.points) p.freq_shift *= 1e-9;
    const auto fit = fit_casimir_offset(data, truth.osc, R, b);
    CHECK(fit.parameter("z1").at_bound);
    CHECK_THAT(fit.value("z1"), WithinRel(1e-6, 1e-9));
  }
  SECTION("unknown parameter") {
    const auto data = synthesize_shift_dataset(truth, dz, 0.0, 1);
    CHECK_THROWS_AS(fit_casimir_offset(data, truth.osc, R, b).value("z0"), std::out_of_range);
  }
}

TEST_CASE("synthetic data") {
  const auto truth = casimir_truth();
  const auto dz = grid(0.0, 500e-9, 30);
  const auto a = synthesize_shift_dataset(truth, dz, 0.01, 42);
  const auto c = synthesize_shift_dataset(truth, dz, 0.01, 42);
  const auto d = synthesize_shift_dataset(truth, dz, 0.01, 43);
  REQUIRE(a.points.size() == 30);
  bool differs = false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].freq_shift == c.points[i].freq_shift);
    differs = differs || a.points[i].freq_shift != d.points[i].freq_shift;
  }
  CHECK(differs);
  CHECK(a.noise_sigma == 0.01);
  CHECK_THROWS_AS(synthesize_shift_dataset(truth, dz, -1.0, 1), DomainError);
  const std::vector<double> bad{-1e-9};
  CHECK_THROWS_AS(synthesize_shift_dataset(truth, bad, 0.0, 1), DomainError);

  ShiftDataset unsorted;
  unsorted.points = {{2e-9, -1.0}, {1e-9, -1.0}, {3e-9, -1.0}};
  CHECK_THROWS_AS(unsorted.validate(3), DomainError);
  unsorted.points = {{1e-9, -1.0}, {2e-9, -1.0}};
  CHECK_THROWS_AS(unsorted.validate(3), DomainError);
}
