#include <catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "casimir_mems/integrator.hpp"

using namespace casimir_mems;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// y'' = -w^2 y as a first-order system.
struct Harmonic {
  double w;
  bool operator()(double, const OdeVector<2>& y, OdeVector<2>& dy) const {
    dy[0] = y[1];
    dy[1] = -w * w * y[0];
    return true;
  }
};

OdeTolerances<2> tolerances(double rtol, double atol) {
  OdeTolerances<2> t;
  t.rtol = rtol;
  t.atol = {atol, atol};
  return t;
}

auto no_sample = [](double, const OdeVector<2>&) {};
auto no_accept = [](double, const OdeVector<2>&) {};

}  // namespace

TEST_CASE("harmonic oscillator end state") {
  const double w = 2 * M_PI;
  DormandPrince<2, Harmonic> dp(Harmonic{w}, 0.0, {1.0, 0.0}, tolerances(1e-10, 1e-14), 1e-3);
  REQUIRE(dp.advance(10.25, nullptr, no_sample, no_accept) == AdvanceStatus::reached);
  CHECK(dp.time() == 10.25);
  CHECK_THAT(dp.state()[0], WithinAbs(std::cos(w * 10.25), 1e-8));
  CHECK_THAT(dp.state()[1], WithinAbs(-w * std::sin(w * 10.25), 1e-7));
  CHECK(dp.statistics().accepted > 0);
}

TEST_CASE("global error tracks the tolerance") {
  const double w = 1.0;
  double prev = INFINITY;
  for (double rtol : {1e-5, 1e-7, 1e-9, 1e-11}) {
    DormandPrince<2, Harmonic> dp(Harmonic{w}, 0.0, {1.0, 0.0}, tolerances(rtol, rtol * 1e-3), 1e-2);
    dp.advance(20.0, nullptr, no_sample, no_accept);
    const double err = std::hypot(dp.state()[0] - std::cos(20.0), dp.state()[1] + std::sin(20.0));
    CHECK(err < 200 * rtol);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("dense output on a uniform grid") {
  const double w = 3.0;
  DormandPrince<2, Harmonic> dp(Harmonic{w}, 0.0, {1.0, 0.0}, tolerances(1e-10, 1e-14), 1e-3);
  SampleGrid grid{0.0, 0.01, 1};  // t = 0 is the initial state itself
  std::vector<double> ts, ys;
  dp.advance(5.0, &grid, [&](double t, const OdeVector<2>& y) {
    ts.push_back(t);
    ys.push_back(y[0]);
  }, no_accept);
  REQUIRE(ts.size() == 500);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK_THAT(ts[i], WithinRel(0.01 * static_cast<double>(i + 1), 1e-14));
    CHECK_THAT(ys[i], WithinAbs(std::cos(w * ts[i]), 2e-8));
  }
  CHECK(grid.next_index == 501);

  SECTION("a second advance continues the grid") {
    dp.advance(5.5, &grid, [&](double t, const OdeVector<2>& y) { CHECK_THAT(y[0], WithinAbs(std::cos(w * t), 2e-8)); },
               no_accept);
    CHECK(grid.next_index == 551);
  }
}

TEST_CASE("steps are split at an inadmissible region") {
  // Evaluations with y[0] > 1.5 are rejected; the exact solution stays below 1.5.
  int refused = 0;
  auto rhs = [&](double, const OdeVector<1>& y, OdeVector<1>& dy) {
    if (y[0] > 1.5) {
      ++refused;
      return false;
    }
    dy[0] = 1.0 - y[0];
    return true;
  };
  OdeTolerances<1> tol;
  tol.rtol = 1e-10;
  tol.atol = {1e-14};
  DormandPrince<1, decltype(rhs)> dp(rhs, 0.0, {0.0}, tol, 100.0);
  REQUIRE(dp.advance(3.0, nullptr, [](double, const OdeVector<1>&) {}, [](double, const OdeVector<1>&) {}) ==
          AdvanceStatus::reached);
  CHECK_THAT(dp.state()[0], WithinRel(1.0 - std::exp(-3.0), 1e-9));
  CHECK(refused > 0);
}

TEST_CASE("step-size underflow is reported") {
  auto rhs = [](double, const OdeVector<1>&, OdeVector<1>&) { return false; };
  OdeTolerances<1> tol;
  tol.atol = {1e-12};
  tol.min_step = 1e-6;
  DormandPrince<1, decltype(rhs)> dp(rhs, 0.0, {0.0}, tol, 1e-3);
  CHECK(dp.advance(1.0, nullptr, [](double, const OdeVector<1>&) {}, [](double, const OdeVector<1>&) {}) ==
        AdvanceStatus::step_underflow);
}

TEST_CASE("accepted-step callback may abort") {
  DormandPrince<2, Harmonic> dp(Harmonic{1.0}, 0.0, {1.0, 0.0}, tolerances(1e-9, 1e-12), 1e-2);
  int calls = 0;
  CHECK_THROWS_AS(dp.advance(10.0, nullptr, no_sample,
                             [&](double t, const OdeVector<2>&) {
                               ++calls;
                               if (t > 1.0) throw std::runtime_error("stop");
                             }),
                  std::runtime_error);
  CHECK(calls > 1);
  CHECK(dp.time() > 1.0);
  CHECK(dp.time() < 10.0);
}

TEST_CASE("max_step is respected") {
  auto tol = tolerances(1e-6, 1e-9);
  tol.max_step = 0.01;
  DormandPrince<2, Harmonic> dp(Harmonic{1.0}, 0.0, {1.0, 0.0}, tol, 1.0);
  double last = 0.0, biggest = 0.0;
  dp.advance(1.0, nullptr, no_sample, [&](double t, const OdeVector<2>&) {
    biggest = std::max(biggest, t - last);
    last = t;
  });
  CHECK(biggest <= 0.01 * (1 + 1e-12));
}

TEST_CASE("identical runs are bitwise identical") {
  auto run = [] {
    DormandPrince<2, Harmonic> dp(Harmonic{7.0}, 0.0, {0.3, 0.1}, tolerances(1e-9, 1e-13), 1e-3);
    dp.advance(12.345, nullptr, no_sample, no_accept);
    return dp.state();
  };
  const auto a = run(), b = run();
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
}
