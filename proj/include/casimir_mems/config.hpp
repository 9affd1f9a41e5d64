#pragma once

// Flat `key = value` experiment configuration. Dimensional keys carry their
// SI unit as a suffix (sphere_radius_m, f0_Hz, ...). Unknown keys are
// rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "casimir_mems/constants.hpp"
#include "casimir_mems/dynamics.hpp"
#include "casimir_mems/forces.hpp"
#include "casimir_mems/resonance.hpp"
#include "casimir_mems/statics.hpp"

namespace casimir_mems {

struct ExperimentConfig {
  // constants
  double hbar_J_s = 1.054571817e-34;
  double c_m_per_s = 2.99792458e8;
  double epsilon0_F_per_m = 8.8541878128e-12;

  // oscillator (built from inertia, f0 and Q; the stated stiffness is only cross-checked)
  double inertia_kg_m2 = 7.1e-17;
  double f0_Hz = 2753.47;
  double quality_Q = 7150.0;
  double stated_spring_k_Nm_per_rad = 2.1e-8;
  double desk_scale = 1.0;

  // sphere-plate geometry
  double sphere_radius_m = 100e-6;
  double lever_b_m = 131.0e-6;
  double z0_m = 122.4e-9;
  double z1_m = 85.9e-9;
  double separation_z_m = 98e-9;

  // electrostatics
  double applied_V_V = 0.4085;
  double residual_V0_V = 0.075;

  // drive: torque = torque_per_V * excitation
  double excitation_V = 55.5e-6;
  double torque_per_V_Nm_per_V = 1.5886098805980894e-11;

  // spring + sphere statics model
  double statics_spring_k_N_per_m = 0.019;
  double statics_separation_d_m = 40e-9;
  std::int64_t potential_points = 401;

  // frequency-shift curves
  double shift_delta_z_start_m = 0.0;
  double shift_delta_z_stop_m = 500e-9;
  std::int64_t shift_points = 51;

  // frequency grid for response and freq-sweep
  double sweep_f_start_Hz = 2725.0;
  double sweep_f_stop_Hz = 2760.0;
  std::int64_t sweep_points = 141;

  // time-domain integration and sweep protocol
  double settle_cycles_per_Q = 8.0;
  std::int64_t measure_cycles = 20;
  std::int64_t samples_per_period = 64;
  double rtol = 1e-9;
  double atol_theta_rad = 1e-14;
  double contact_threshold_m = 1e-9;

  // distance sweep: approach far -> near, then retract near -> far
  double fixed_f_Hz = 2748.0;
  double dist_z_far_m = 200e-9;
  double dist_z_near_m = 95e-9;
  std::int64_t dist_points = 43;

  // calibration
  std::string fit_kind = "electrostatic";  // electrostatic | casimir | voltage
  std::string fit_input_csv = "";
  std::string synth_kind = "electrostatic";  // electrostatic | casimir
  double synth_delta_z_start_m = 0.0;
  double synth_delta_z_stop_m = 500e-9;
  std::int64_t synth_points = 30;
  double noise_sigma_Hz = 0.0;
  std::string noise_model = "additive";  // additive | relative (sigma as a fraction)
  std::uint64_t seed = 1;

  // output
  std::string output_dir = "out";
  std::string output_prefix = "";
  std::int64_t write_trajectory = 0;

  bool operator==(const ExperimentConfig&) const = default;

  /// Cross-field checks (positivity, enumerations, grid sizes).
  void validate() const;

  PhysicalConstants constants() const;
  /// Oscillator from inertia, f0 and Q, then desk-scaled.
  TorsionalOscillator oscillator() const;
  double torque() const noexcept { return torque_per_V_Nm_per_V * excitation_V; }
  SpherePlateGeometry geometry() const;
  SpringSphereModel statics_model() const;
  IntegrationOptions integration_options() const;
  /// Drive frequency for distance sweeps, moved away from f0 by desk_scale
  /// so its detuning in linewidths is preserved.
  double scaled_fixed_omega() const;
  /// Frequency grid endpoints in rad/s, likewise scaled about f0.
  std::vector<double> omega_grid() const;
};

/// Every key the parser accepts, in canonical order.
std::vector<std::string_view> config_keys();

/// Parses `key = value` text. `#` starts a comment. Throws ConfigError
/// naming the line and key.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` override.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// Canonical text form; parse_config(format_config(c)) == c.
std::string format_config(const ExperimentConfig& config);

/// The parameter set of the experiment reproduced by this toolkit.
ExperimentConfig default_paper_config();

}  // namespace casimir_mems
