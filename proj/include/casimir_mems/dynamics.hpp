#pragma once

// Time-domain integration of the torsional oscillator with the full,
// un-expanded external force, plus quasi-static frequency and distance
// sweeps that carry the oscillator state from one setpoint to the next.
//
// Equation of motion (theta > 0 moves the plate toward the sphere):
//   I theta'' + 2 I gamma theta' + k theta
//       = tau cos(w t + phase) - b [F(z - b theta) - F(z)]
// where z is the gap at the undriven equilibrium.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "casimir_mems/forces.hpp"
#include "casimir_mems/resonance.hpp"

namespace casimir_mems {

struct OscillatorState {
  double theta = 0.0;      // rad
  double theta_dot = 0.0;  // rad / s
  double time = 0.0;       // s
};

/// Lever arm and equilibrium gap of the sphere-plate coupling.
struct Coupling {
  double lever_b = 0.0;  // m
  double gap_z = 0.0;    // m

  /// Uses the Casimir gap delta_z + z1.
  static Coupling from_geometry(const SpherePlateGeometry& geom) noexcept {
    return {geom.lever_b, geom.casimir_gap()};
  }
};

struct IntegrationOptions {
  double rtol = 1e-9;
  double atol_theta = 1e-14;      // rad; the rate tolerance is atol_theta * omega
  int samples_per_period = 64;
  double contact_threshold = 1e-9;  // m
  /// Step sizes below this fraction of a drive period are a stiffness failure.
  double min_step_periods = 1e-10;
};

struct Trajectory {
  std::vector<double> time;
  std::vector<double> theta;
  std::vector<double> theta_dot;
  double omega = 0.0;  // drive frequency used to lay out samples
  double phase = 0.0;  // drive phase at t = 0
  int samples_per_period = 0;

  std::size_t size() const noexcept { return time.size(); }
  OscillatorState back() const { return {theta.back(), theta_dot.back(), time.back()}; }
};

/// Integrates for `duration` seconds. Samples are laid on the uniform grid
/// initial.time + j T / samples_per_period and include the initial state.
/// Throws PullInError when the gap drops below the contact threshold and
/// StiffnessError on step-size underflow.
Trajectory integrate(const TorsionalOscillator& osc, const Coupling& coupling,
                     const ForceLaw& force_law, const DriveConfig& drive,
                     const OscillatorState& initial, double duration,
                     const IntegrationOptions& options = {});

struct SteadyAmplitude {
  double amplitude = 0.0;  // rad
  double phase = 0.0;      // rad, theta ~ A cos(w t + drive_phase + phase)
  bool converged = false;
};

/// Lock-in estimate: projection onto cos and sin over whole periods. The two
/// halves of the segment are compared; converged when they agree to 0.2%.
/// Throws InsufficientDataError with fewer than two full periods.
SteadyAmplitude extract_steady_amplitude(const Trajectory& segment, double omega);

enum class SweepKind { frequency, distance };

std::string_view to_string(SweepKind k) noexcept;

struct SweepProtocol {
  SweepKind kind = SweepKind::frequency;
  std::vector<double> schedule;  // rad/s or m, traversed in order
  double settle_cycles = 0.0;    // drive periods before each measurement
  int measure_cycles = 20;

  /// Default settling time: 8 Q drive periods.
  static double default_settle_cycles(const TorsionalOscillator& osc) noexcept {
    return 8.0 * osc.quality_Q;
  }
  /// Shortest accepted settling: 10 Q / pi periods (transient below e^-10).
  static double minimum_settle_cycles(const TorsionalOscillator& osc) noexcept;

  void validate(const TorsionalOscillator& osc) const;
  /// up: frequency increasing or gap increasing (retract).
  SweepDirection direction() const;
};

struct SweepPoint {
  double setpoint = 0.0;
  double amplitude = 0.0;  // rad
  double phase = 0.0;      // rad
  bool converged = false;
};

struct SweepResult {
  SweepKind kind = SweepKind::frequency;
  SweepDirection direction = SweepDirection::up;
  std::vector<SweepPoint> points;
  OscillatorState final_state{};
  Trajectory last_segment;  // measurement window of the final setpoint
};

/// Frequency sweep at a fixed gap `coupling.gap_z`.
SweepResult swept_frequency(const TorsionalOscillator& osc, const Coupling& coupling,
                            const ForceLaw& force_law, double torque_tau,
                            const SweepProtocol& protocol, const IntegrationOptions& options = {},
                            const OscillatorState& initial = {});

/// Distance sweep at a fixed drive frequency; the schedule holds gaps.
SweepResult swept_distance(const TorsionalOscillator& osc, double lever_b,
                           const ForceLaw& force_law, double torque_tau, double omega_fixed,
                           const SweepProtocol& protocol, const IntegrationOptions& options = {},
                           const OscillatorState& initial = {});

/// Label for CSV output: up/down for frequency sweeps, retract/approach for
/// distance sweeps.
std::string_view direction_label(SweepKind kind, SweepDirection direction) noexcept;

/// Total energy I theta'^2 / 2 + k theta^2 / 2 + V(theta), with V the
/// coupling potential relative to theta = 0.
double oscillator_energy(const TorsionalOscillator& osc, const Coupling& coupling,
                         const ForceLaw& force_law, double theta, double theta_dot);

}  // namespace casimir_mems
