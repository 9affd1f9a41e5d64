#include "casimir_mems/resonance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "casimir_mems/error.hpp"

namespace casimir_mems {
namespace {

constexpr double kCriticalNonlinearity = 1.5396007178390020;  // 8 / (3 sqrt 3)
constexpr int kWindowScanPoints = 200001;

void require_positive(const char* field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "must be positive and finite, got " << v;
    throw DomainError(field, os.str());
  }
}

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

// The amplitude equation in units of the linear peak: with y0 = tau^2 /
// (4 I^2 w1^2 lambda^2), u = A^2 / y0, delta = (w - w1) / lambda and
// g = kappa y0 / lambda it reads
//   P(u) = g^2 u^3 - 2 delta g u^2 + (delta^2 + 1) u - 1 = 0,
// and every real root lies in (0, 1].
struct ReducedCubic {
  double g;
  double delta;

  double value(double u) const noexcept {
    return ((g * g * u - 2.0 * delta * g) * u + (delta * delta + 1.0)) * u - 1.0;
  }
  double slope(double u) const noexcept {
    return (3.0 * g * g * u - 4.0 * delta * g) * u + (delta * delta + 1.0);
  }

  // Critical points of P, ascending, when real and distinct.
  std::optional<std::array<double, 2>> critical_points() const noexcept {
    if (g == 0.0) return std::nullopt;
    const double disc = delta * delta - 3.0;
    if (disc <= 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    double a = (2.0 * delta - s) / (3.0 * g);
    double b = (2.0 * delta + s) / (3.0 * g);
    if (a > b) std::swap(a, b);
    return std::array<double, 2>{a, b};
  }

  // Three real roots iff the local maximum is above zero and the local
  // minimum below it (leading coefficient positive).
  int root_count() const noexcept {
    const auto cp = critical_points();
    if (!cp) return 1;
    const double at_max = value((*cp)[0]);
    const double at_min = value((*cp)[1]);
    return (at_max > 0.0 && at_min < 0.0) ? 3 : 1;
  }

  // Closed-form roots of the monic cubic, ascending.
  std::vector<double> closed_form_roots() const {
    const double a = -2.0 * delta / g;
    const double b = (delta * delta + 1.0) / (g * g);
    const double c = -1.0 / (g * g);
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double shift = -a / 3.0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    std::vector<double> roots;
    if (disc < 0.0 && p < 0.0) {
      const double m = 2.0 * std::sqrt(-p / 3.0);
      const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(theta - kTwoPi * k / 3.0) + shift);
    } else {
      const double s = std::sqrt(std::max(disc, 0.0));
      const double big = -std::copysign(std::cbrt(std::abs(q) / 2.0 + s), q);
      const double t = big + (big != 0.0 ? -p / (3.0 * big) : 0.0);
      roots.push_back(t + shift);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
  }

  // Newton from `guess`, kept inside [lo, hi] with bisection fallback.
  double polish(double guess, double lo, double hi) const noexcept {
    double flo = value(lo);
    double u = std::clamp(guess, lo, hi);
    for (int it = 0; it < 200; ++it) {
      const double f = value(u);
      if (f == 0.0) return u;
      if ((f < 0.0) == (flo < 0.0)) {
        lo = u;
        flo = f;
      } else {
        hi = u;
      }
      const double d = slope(u);
      double next = (d != 0.0) ? u - f / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - u) <= 4e-16 * std::abs(u) || hi - lo <= 4e-16 * std::abs(u)) return next;
      u = next;
    }
    return u;
  }

  std::vector<double> roots() const {
    if (g == 0.0) return {1.0 / (delta * delta + 1.0)};
    const int count = root_count();
    std::vector<double> guess;
    if (std::abs(g) >= 1e-3) guess = closed_form_roots();
    std::vector<double> out;
    if (count == 3) {
      const auto cp = *critical_points();
      const std::array<std::pair<double, double>, 3> brackets{
          {{0.0, cp[0]}, {cp[0], cp[1]}, {cp[1], 1.0}}};
      for (int i = 0; i < 3; ++i) {
        const double gi = guess.size() == 3 ? guess[i] : 0.5 * (brackets[i].first + brackets[i].second);
        out.push_back(polish(gi, brackets[i].first, brackets[i].second));
      }
    } else {
      // P(0) = -1 < 0 and P(1) = (g - delta)^2 >= 0 bracket the single root.
      double gi = 1.0 / (delta * delta + 1.0);
      if (guess.size() == 1) gi = guess[0];
      out.push_back(polish(gi, 0.0, 1.0));
    }
    return out;
  }
};

struct Reduced {
  double y0;      // rad^2
  double lambda;  // 1/s
  double g;
};

Reduced reduce(const TaylorCoefficients& coeffs, const TorsionalOscillator& osc, double tau) {
  const double a_lin = tau / (2.0 * osc.inertia_I * coeffs.omega1 * osc.gamma);
  const double y0 = a_lin * a_lin;
  return {y0, osc.gamma, coeffs.kappa * y0 / osc.gamma};
}

}  // namespace

TorsionalOscillator TorsionalOscillator::from_frequency(double inertia_I, double f0_Hz,
                                                        double quality_Q) {
  require_positive("inertia_I", inertia_I);
  require_positive("f0_Hz", f0_Hz);
  require_positive("quality_Q", quality_Q);
  TorsionalOscillator o;
  o.inertia_I = inertia_I;
  o.omega0 = kTwoPi * f0_Hz;
  o.spring_k = inertia_I * o.omega0 * o.omega0;
  o.quality_Q = quality_Q;
  o.gamma = o.omega0 / (2.0 * quality_Q);
  o.validate();
  return o;
}

TorsionalOscillator TorsionalOscillator::from_stiffness(double spring_k, double inertia_I,
                                                        double quality_Q) {
  require_positive("spring_k", spring_k);
  require_positive("inertia_I", inertia_I);
  require_positive("quality_Q", quality_Q);
  TorsionalOscillator o;
  o.spring_k = spring_k;
  o.inertia_I = inertia_I;
  o.omega0 = std::sqrt(spring_k / inertia_I);
  o.quality_Q = quality_Q;
  o.gamma = o.omega0 / (2.0 * quality_Q);
  o.validate();
  return o;
}

void TorsionalOscillator::validate() const {
  require_positive("spring_k", spring_k);
  require_positive("inertia_I", inertia_I);
  require_positive("omega0", omega0);
  require_positive("gamma", gamma);
  require_positive("quality_Q", quality_Q);
  if (!close_rel(omega0, std::sqrt(spring_k / inertia_I), 1e-9))
    throw DomainError("omega0", "must equal sqrt(spring_k / inertia_I)");
  if (!close_rel(gamma, omega0 / (2.0 * quality_Q), 1e-9))
    throw DomainError("gamma", "must equal omega0 / (2 quality_Q)");
  if (!(gamma < omega0)) throw DomainError("gamma", "oscillator must be underdamped");
}

TorsionalOscillator TorsionalOscillator::desk_scaled(double factor) const {
  require_positive("desk_scale", factor);
  TorsionalOscillator o = *this;
  o.quality_Q = quality_Q / factor;
  o.inertia_I = inertia_I / factor;
  o.spring_k = o.inertia_I * omega0 * omega0;
  o.gamma = omega0 / (2.0 * o.quality_Q);
  o.validate();
  return o;
}

double TaylorCoefficients::kappa_from(double omega1, double alpha, double beta) noexcept {
  return 3.0 * beta / (8.0 * omega1) - 5.0 * alpha * alpha / (12.0 * omega1 * omega1 * omega1);
}

TaylorCoefficients taylor_coefficients(const TorsionalOscillator& osc, double lever_b,
                                       const ForceLaw& force_law, double z) {
  osc.validate();
  require_positive("lever_b", lever_b);
  require_positive("z", z);
  const double f1 = force_law.derivative(z, 1);
  const double f2 = force_law.derivative(z, 2);
  const double f3 = force_law.derivative(z, 3);
  const double b2 = lever_b * lever_b;
  const double inertia = osc.inertia_I;

  TaylorCoefficients t;
  t.source_z = z;
  t.omega1 = linearized_shift(osc, lever_b, f1).omega1;
  t.alpha = b2 * lever_b * f2 / (2.0 * inertia);
  t.beta = -b2 * b2 * f3 / (6.0 * inertia);
  t.kappa = TaylorCoefficients::kappa_from(t.omega1, t.alpha, t.beta);
  return t;
}

FrequencyShift linearized_shift(const TorsionalOscillator& osc, double lever_b,
                                double force_gradient) {
  osc.validate();
  require_positive("lever_b", lever_b);
  const double w0 = osc.omega0;
  const double coupling = lever_b * lever_b * force_gradient / osc.inertia_I;
  const double stiffness = w0 * w0 - coupling;
  if (!(stiffness > 0.0)) {
    std::ostringstream os;
    os << "effective stiffness w0^2 - b^2 F'/I = " << stiffness
       << " s^-2 is not positive; the plate snaps toward the sphere";
    throw InstabilityError(os.str());
  }
  if (!(std::abs(coupling / (w0 * w0)) < 1.0))
    throw DomainError("force_gradient", "outside the perturbative regime |b^2 F'/(I w0^2)| < 1");
  FrequencyShift s;
  s.omega0 = w0;
  s.omega1 = w0 * (1.0 - coupling / (2.0 * w0 * w0));
  s.omega_exact = std::sqrt(stiffness);
  return s;
}

double linear_peak_amplitude(const TaylorCoefficients& coeffs, const TorsionalOscillator& osc,
                             double torque_tau) noexcept {
  return torque_tau / (2.0 * osc.inertia_I * coeffs.omega1 * osc.gamma);
}

AmplitudeSolution steady_state_amplitudes(const TaylorCoefficients& coeffs,
                                          const TorsionalOscillator& osc, const DriveConfig& drive) {
  osc.validate();
  if (!(drive.torque_tau >= 0.0) || !std::isfinite(drive.torque_tau))
    throw DomainError("torque_tau", "must be non-negative and finite");
  require_positive("omega", drive.omega);
  require_positive("omega1", coeffs.omega1);

  AmplitudeSolution sol;
  sol.omega = drive.omega;
  if (drive.torque_tau == 0.0) {
    sol.roots.push_back({0.0, true});
    return sol;
  }
  const Reduced r = reduce(coeffs, osc, drive.torque_tau);
  const ReducedCubic cubic{r.g, (drive.omega - coeffs.omega1) / r.lambda};
  const std::vector<double> u = cubic.roots();
  for (double v : u) sol.roots.push_back({std::sqrt(v * r.y0), true});
  if (sol.roots.size() == 3) {
    sol.roots[1].stable = false;
    const double gap_lo = (u[1] - u[0]) / u[1];
    const double gap_hi = (u[2] - u[1]) / u[2];
    sol.near_degenerate = std::min(gap_lo, gap_hi) < 1e-6;
  } else if (const auto cp = cubic.critical_points()) {
    // One root, but a tangency is close by.
    const double at_max = cubic.value((*cp)[0]);
    const double at_min = cubic.value((*cp)[1]);
    sol.near_degenerate = std::abs(at_max) < 1e-9 || std::abs(at_min) < 1e-9;
  }
  return sol;
}

double amplitude_equation_residual(const TaylorCoefficients& coeffs, const TorsionalOscillator& osc,
                                   const DriveConfig& drive, double amplitude) {
  const double y = amplitude * amplitude;
  const double detune = drive.omega - coeffs.omega1 - coeffs.kappa * y;
  const double lhs = y * (detune * detune + osc.gamma * osc.gamma);
  const double rhs = drive.torque_tau * drive.torque_tau /
                     (4.0 * osc.inertia_I * osc.inertia_I * coeffs.omega1 * coeffs.omega1);
  return std::abs(lhs - rhs) / rhs;
}

std::string_view to_string(SweepDirection d) noexcept {
  return d == SweepDirection::up ? "up" : "down";
}

std::string_view to_string(Branch b) noexcept {
  switch (b) {
    case Branch::single: return "single";
    case Branch::lower: return "lower";
    case Branch::upper: return "upper";
  }
  return "single";
}

ResponseCurve response_curve(const TaylorCoefficients& coeffs, const TorsionalOscillator& osc,
                             double torque_tau, std::span<const double> omega_grid,
                             SweepDirection direction) {
  std::vector<double> grid(omega_grid.begin(), omega_grid.end());
  if (grid.size() >= 2) {
    const bool ascending = grid[1] > grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if ((grid[i] > grid[i - 1]) != ascending || grid[i] == grid[i - 1])
        throw DomainError("omega_grid", "must be strictly monotone");
    }
    if (!ascending) std::reverse(grid.begin(), grid.end());
  }
  if (direction == SweepDirection::down) std::reverse(grid.begin(), grid.end());

  ResponseCurve curve;
  curve.direction = direction;
  curve.points.reserve(grid.size());
  std::optional<double> previous;
  for (double w : grid) {
    const AmplitudeSolution sol = steady_state_amplitudes(coeffs, osc, {torque_tau, w});
    ResponsePoint p;
    p.omega = w;
    p.n_roots = static_cast<int>(sol.roots.size());
    if (sol.roots.size() == 1) {
      p.amplitude = sol.roots[0].amplitude;
      p.branch = Branch::single;
    } else {
      // Stay on the branch whose basin (split by the unstable root) holds
      // the previous amplitude. A fresh sweep starts from rest.
      const double prev = previous.value_or(0.0);
      const bool upper = prev > sol.roots[1].amplitude;
      p.amplitude = upper ? sol.roots[2].amplitude : sol.roots[0].amplitude;
      p.branch = upper ? Branch::upper : Branch::lower;
    }
    p.stable = true;
    previous = p.amplitude;
    curve.points.push_back(p);
  }
  return curve;
}

std::optional<HysteresisWindow> hysteresis_window(const TaylorCoefficients& coeffs,
                                                  const TorsionalOscillator& osc, double torque_tau) {
  osc.validate();
  if (!(torque_tau > 0.0)) return std::nullopt;
  const Reduced r = reduce(coeffs, osc, torque_tau);
  if (!(std::abs(r.g) > kCriticalNonlinearity)) return std::nullopt;

  // Every root has u <= 1, so the window lies within |delta| <= 3|g|.
  const double span = 3.0 * std::abs(r.g) + 2.0;
  auto count_at = [&](double delta) { return ReducedCubic{r.g, delta}.root_count(); };

  std::optional<double> inside;
  for (int i = 0; i < kWindowScanPoints; ++i) {
    const double delta = -span + 2.0 * span * i / (kWindowScanPoints - 1);
    if (count_at(delta) == 3) {
      inside = delta;
      break;
    }
  }
  if (!inside) return std::nullopt;

  auto edge = [&](double in, double out) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (in + out);
      if (mid == in || mid == out) break;
      if (count_at(mid) == 3)
        in = mid;
      else
        out = mid;
    }
    return 0.5 * (in + out);
  };
  const double lo = edge(*inside, -span);
  const double hi = edge(*inside, span);
  return HysteresisWindow{coeffs.omega1 + r.lambda * lo, coeffs.omega1 + r.lambda * hi};
}

}  // namespace casimir_mems
