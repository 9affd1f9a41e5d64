#pragma once

// Calibration workflow for the sphere-plate oscillator: residual voltage
// from the vertex of the frequency-vs-voltage parabola, contact offset z0
// and lever arm b from electrostatic frequency shifts, and the Casimir
// offset z1 from Casimir frequency shifts. The shift model is the
// first-order one, delta_f = -b^2 F'(z) / (4 pi I w0).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "casimir_mems/forces.hpp"
#include "casimir_mems/resonance.hpp"

namespace casimir_mems {

enum class ShiftKind { electrostatic, casimir };

std::string_view to_string(ShiftKind k) noexcept;

struct ShiftPoint {
  double delta_z = 0.0;     // m
  double freq_shift = 0.0;  // Hz
};

struct ShiftDataset {
  std::vector<ShiftPoint> points;  // sorted by delta_z
  ShiftKind kind = ShiftKind::casimir;
  std::optional<double> applied_V;    // electrostatic only
  std::optional<double> noise_sigma;  // synthetic only

  /// delta_z >= 0, sorted, at least `min_points` entries.
  void validate(std::size_t min_points) const;
};

struct FitParameter {
  std::string name;
  std::string unit;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool at_bound = false;
};

struct FitResult {
  std::vector<FitParameter> parameters;
  double residual_rms = 0.0;  // Hz
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Row-major covariance in parameter units, when the Jacobian has full rank.
  std::optional<std::vector<double>> covariance;
  /// Residual rms after every accepted iteration of the winning start.
  std::vector<double> rms_history;

  /// Throws std::out_of_range for an unknown name.
  double value(std::string_view name) const;
  const FitParameter& parameter(std::string_view name) const;
};

struct VoltagePoint {
  double voltage = 0.0;    // V
  double frequency = 0.0;  // Hz
};

/// Vertex of the least-squares parabola f = a (V - V0)^2 + c. Throws
/// FitError("rank") with fewer than three distinct voltages and
/// FitError("not_a_maximum") when a >= 0.
double fit_residual_voltage(std::span<const VoltagePoint> points);

/// -b^2 eps0 pi R bias^2 / (4 pi I w0 (delta_z + z0)^2), in Hz, where
/// bias_V = V - V0.
double electrostatic_shift_model(const TorsionalOscillator& osc, const PhysicalConstants& constants,
                                 double radius_R, double lever_b, double z0, double bias_V,
                                 double delta_z);

/// -b^2 pi^3 hbar c R / (4 pi I w0 120 (delta_z + z1)^4), in Hz.
double casimir_shift_model(const TorsionalOscillator& osc, const PhysicalConstants& constants,
                           double radius_R, double lever_b, double z1, double delta_z);

struct FitOptions {
  int max_iterations = 500;
  double parameter_tolerance = 1e-10;  // relative step
  double gradient_tolerance = 1e-12;   // relative to |J| |r|
  int starts_per_parameter = 4;
};

/// Fits (z0, b) with z0 in [1 nm, 10 um] and b in [1 um, 1 mm].
FitResult fit_electrostatic_geometry(const ShiftDataset& dataset, const TorsionalOscillator& osc,
                                     double radius_R, double voltage_V, double residual_V0,
                                     const PhysicalConstants& constants = {},
                                     const FitOptions& options = {});

/// Fits z1 in [10 nm, 1 um] with b held fixed.
FitResult fit_casimir_offset(const ShiftDataset& dataset, const TorsionalOscillator& osc,
                             double radius_R, double lever_b,
                             const PhysicalConstants& constants = {},
                             const FitOptions& options = {});

enum class NoiseModel { additive, relative };

struct ShiftTruth {
  ShiftKind kind = ShiftKind::casimir;
  TorsionalOscillator osc{};
  PhysicalConstants constants{};
  double radius_R = 0.0;
  double lever_b = 0.0;
  double offset = 0.0;        // z0 or z1
  double voltage_V = 0.0;     // electrostatic only
  double residual_V0 = 0.0;   // electrostatic only
};

/// Model curve on `delta_z_grid` plus Gaussian noise. With
/// NoiseModel::relative, `noise_sigma` is a fraction of each point's shift.
/// Deterministic for a fixed seed.
ShiftDataset synthesize_shift_dataset(const ShiftTruth& truth, std::span<const double> delta_z_grid,
                                      double noise_sigma, std::uint64_t seed,
                                      NoiseModel noise = NoiseModel::additive);

/// Frequency-vs-voltage scan f = f_base + a (V - V0)^2 with additive noise.
std::vector<VoltagePoint> synthesize_voltage_scan(double residual_V0, double curvature_Hz_per_V2,
                                                  double base_Hz, std::span<const double> voltages,
                                                  double noise_sigma_Hz, std::uint64_t seed);

}  // namespace casimir_mems
