#pragma once

// Driven torsional oscillator with the external force Taylor-expanded to
// third order about the working gap: linear frequency shift, quadratic and
// cubic nonlinearities, and the steady-state amplitude equation
//   A^2 [ (w - w1 - kappa A^2)^2 + lambda^2 ] = tau^2 / (4 I^2 w1^2).

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "casimir_mems/forces.hpp"

namespace casimir_mems {

struct TorsionalOscillator {
  double spring_k = 0.0;   // N m / rad
  double inertia_I = 0.0;  // kg m^2
  double omega0 = 0.0;     // rad / s
  double gamma = 0.0;      // 1 / s, amplitude damping rate (the lambda of the amplitude equation)
  double quality_Q = 0.0;

  /// k = I w0^2, gamma = w0 / (2 Q).
  static TorsionalOscillator from_frequency(double inertia_I, double f0_Hz, double quality_Q);
  /// w0 = sqrt(k / I), gamma = w0 / (2 Q).
  static TorsionalOscillator from_stiffness(double spring_k, double inertia_I, double quality_Q);

  void validate() const;

  double f0_Hz() const noexcept { return omega0 / kTwoPi; }

  /// Similarity transform for reduced-Q runs: Q, I and k divided by
  /// `factor`, w0 unchanged. At fixed torque, plate amplitude and gap, every
  /// force-induced frequency shift grows by `factor` together with the
  /// linewidth, so shifts measured in linewidths are preserved. So is the
  /// cubic part of |kappa| A^2 / lambda; the alpha^2 part grows by factor^2.
  TorsionalOscillator desk_scaled(double factor) const;
};

struct DriveConfig {
  double torque_tau = 0.0;  // N m amplitude
  double omega = 0.0;       // rad / s
  double phase = 0.0;       // rad; torque = tau cos(omega t + phase)
};

struct TaylorCoefficients {
  double omega1 = 0.0;  // rad / s
  double alpha = 0.0;   // rad^-1 s^-2
  double beta = 0.0;    // rad^-2 s^-2
  double kappa = 0.0;   // rad^-2 s^-1
  double source_z = 0.0;

  static double kappa_from(double omega1, double alpha, double beta) noexcept;
};

TaylorCoefficients taylor_coefficients(const TorsionalOscillator& osc, double lever_b,
                                       const ForceLaw& force_law, double z);

struct FrequencyShift {
  double omega1 = 0.0;       // first-order shifted frequency
  double omega_exact = 0.0;  // sqrt(w0^2 - b^2 F' / I)
  double omega0 = 0.0;

  double shift() const noexcept { return omega1 - omega0; }
  double shift_Hz() const noexcept { return shift() / kTwoPi; }
};

/// Throws InstabilityError when w0^2 - b^2 F'/I <= 0.
FrequencyShift linearized_shift(const TorsionalOscillator& osc, double lever_b, double force_gradient);

struct AmplitudeRoot {
  double amplitude = 0.0;  // rad
  bool stable = true;
};

struct AmplitudeSolution {
  std::vector<AmplitudeRoot> roots;  // ascending, 1 or 3 entries
  double omega = 0.0;
  /// Two roots nearly coincide (within 1e-6 relative): the count may flip
  /// under rounding.
  bool near_degenerate = false;
};

AmplitudeSolution steady_state_amplitudes(const TaylorCoefficients& coeffs,
                                          const TorsionalOscillator& osc, const DriveConfig& drive);

/// |LHS - RHS| / RHS of the amplitude equation at amplitude A.
double amplitude_equation_residual(const TaylorCoefficients& coeffs, const TorsionalOscillator& osc,
                                   const DriveConfig& drive, double amplitude);

/// Linear-resonance amplitude tau / (2 I w1 lambda), the maximum of the response.
double linear_peak_amplitude(const TaylorCoefficients& coeffs, const TorsionalOscillator& osc,
                             double torque_tau) noexcept;

enum class SweepDirection { up, down };
enum class Branch { single, lower, upper };

std::string_view to_string(SweepDirection d) noexcept;
std::string_view to_string(Branch b) noexcept;

struct ResponsePoint {
  double omega = 0.0;
  double amplitude = 0.0;
  int n_roots = 1;
  Branch branch = Branch::single;
  bool stable = true;
};

struct ResponseCurve {
  SweepDirection direction = SweepDirection::up;
  std::vector<ResponsePoint> points;  // in sweep order
};

/// Quasi-static branch following. `omega_grid` must be strictly monotone;
/// it is traversed in ascending order for an up sweep and descending for a
/// down sweep.
ResponseCurve response_curve(const TaylorCoefficients& coeffs, const TorsionalOscillator& osc,
                             double torque_tau, std::span<const double> omega_grid,
                             SweepDirection direction);

struct HysteresisWindow {
  double omega_low = 0.0;
  double omega_high = 0.0;

  double width() const noexcept { return omega_high - omega_low; }
};

/// Frequency interval with three amplitude roots, or nullopt when the
/// response is single valued everywhere.
std::optional<HysteresisWindow> hysteresis_window(const TaylorCoefficients& coeffs,
                                                  const TorsionalOscillator& osc, double torque_tau);

}  // namespace casimir_mems
