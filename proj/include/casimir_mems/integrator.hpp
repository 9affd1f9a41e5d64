#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta pair with step-size control and
// the classic fourth-order continuous extension for dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace casimir_mems {

template <std::size_t N>
using OdeVector = std::array<double, N>;

template <std::size_t N>
struct OdeTolerances {
  double rtol = 1e-9;
  OdeVector<N> atol{};
  double max_step = std::numeric_limits<double>::infinity();
  /// Step sizes below this raise the `on_underflow` path.
  double min_step = 0.0;
};

struct OdeStatistics {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t evaluations = 0;
};

/// Uniform sample times origin + j * spacing, j = next_index, ...
struct SampleGrid {
  double origin = 0.0;
  double spacing = 0.0;
  std::int64_t next_index = 0;

  double time(std::int64_t j) const noexcept { return origin + static_cast<double>(j) * spacing; }
};

enum class AdvanceStatus { reached, step_underflow };

/// `Rhs` is callable as bool(double t, const OdeVector<N>& y, OdeVector<N>& dydt);
/// returning false marks the point as inadmissible and the step is retried
/// with a quarter of the step size.
template <std::size_t N, class Rhs>
class DormandPrince {
public:
  using Vec = OdeVector<N>;

  DormandPrince(Rhs rhs, double t0, const Vec& y0, const OdeTolerances<N>& tol, double first_step)
      : rhs_(std::move(rhs)), tol_(tol), t_(t0), y_(y0), h_(first_step) {
    evaluate(t_, y_, k1_);
  }

  double time() const noexcept { return t_; }
  const Vec& state() const noexcept { return y_; }
  const Vec& derivative() const noexcept { return k1_; }
  const OdeStatistics& statistics() const noexcept { return stats_; }

  /// Integrate up to exactly t_end. For every grid time in (t, t_end],
  /// `sample(t_s, y_s)` receives the dense-output state; after every
  /// accepted step `accepted(t, y)` is called (it may throw to abort).
  template <class Sample, class Accepted>
  AdvanceStatus advance(double t_end, SampleGrid* grid, Sample&& sample, Accepted&& accepted) {
    while (t_ < t_end) {
      double h = std::min(h_, tol_.max_step);
      bool last = false;
      if (t_ + 1.01 * h >= t_end) {
        h = t_end - t_;
        last = true;
      }
      bool step_rejected = false;
      for (;;) {
        if (h < tol_.min_step && !last) return AdvanceStatus::step_underflow;
        double err = 0.0;
        const bool admissible = attempt(h, err);
        if (!admissible) {
          ++stats_.rejected;
          h *= 0.25;
          last = false;
          step_rejected = true;
          continue;
        }
        if (err <= 1.0) {
          const double t_old = t_;
          const Vec y_old = y_;
          t_ = last ? t_end : t_ + h;
          y_ = y_new_;
          k1_prev_ = k1_;
          k1_ = k7_;
          ++stats_.accepted;
          if (grid != nullptr) emit(*grid, t_old, y_old, h, sample);
          accepted(t_, y_);
          double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
          fac = std::clamp(fac, 0.2, step_rejected ? 1.0 : 10.0);
          if (!last) h_ = h * fac;
          break;
        }
        ++stats_.rejected;
        step_rejected = true;
        last = false;
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      }
    }
    return AdvanceStatus::reached;
  }

private:
  bool evaluate(double t, const Vec& y, Vec& out) {
    ++stats_.evaluations;
    return rhs_(t, y, out);
  }

  bool attempt(double h, double& err) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    Vec tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1_[i];
    if (!evaluate(t_ + c2 * h, tmp, k2_)) return false;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    if (!evaluate(t_ + c3 * h, tmp, k3_)) return false;
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    if (!evaluate(t_ + c4 * h, tmp, k4_)) return false;
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    if (!evaluate(t_ + c5 * h, tmp, k5_)) return false;
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                            a65 * k5_[i]);
    if (!evaluate(t_ + h, tmp, k6_)) return false;
    for (std::size_t i = 0; i < N; ++i)
      y_new_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                               a76 * k6_[i]);
    if (!evaluate(t_ + h, y_new_, k7_)) return false;

    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                            e7 * k7_[i]);
      const double scale = tol_.atol[i] + tol_.rtol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
      sum += (e / scale) * (e / scale);
    }
    err = std::sqrt(sum / static_cast<double>(N));
    return std::isfinite(err);
  }

  template <class Sample>
  void emit(SampleGrid& grid, double t_old, const Vec& y_old, double h, Sample& sample) {
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    bool prepared = false;
    Vec r2{}, r3{}, r4{}, r5{};
    for (;;) {
      const double ts = grid.time(grid.next_index);
      if (ts > t_) break;
      if (ts < t_old) {
        ++grid.next_index;
        continue;
      }
      if (!prepared) {
        for (std::size_t i = 0; i < N; ++i) {
          const double ydiff = y_[i] - y_old[i];
          const double bspl = h * k1_old(i) - ydiff;
          r2[i] = ydiff;
          r3[i] = bspl;
          r4[i] = ydiff - h * k7_[i] - bspl;
          r5[i] = h * (d1 * k1_old(i) + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                       d7 * k7_[i]);
        }
        prepared = true;
      }
      const double s = (ts - t_old) / h;
      const double s1 = 1.0 - s;
      Vec ys;
      for (std::size_t i = 0; i < N; ++i)
        ys[i] = y_old[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
      sample(ts, ys);
      ++grid.next_index;
    }
  }

  // k1 of the step just taken; k1_ already holds the next step's FSAL value.
  double k1_old(std::size_t i) const noexcept { return k1_prev_[i]; }

  Rhs rhs_;
  OdeTolerances<N> tol_;
  double t_;
  Vec y_;
  double h_;
  Vec k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{}, y_new_{};
  Vec k1_prev_{};
  OdeStatistics stats_;
};

}  // namespace casimir_mems
