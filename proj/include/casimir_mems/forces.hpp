#pragma once

// Perfect-conductor Casimir and electrostatic force laws between a sphere
// and a plate, with analytic spatial derivatives.
//
// Sign convention: z is the sphere-to-plate gap and a force pulling the
// plate toward the sphere is negative. Every law here is a sum of terms
// -K / z^n, so derivatives of any order are closed form.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "casimir_mems/constants.hpp"

namespace casimir_mems {

/// Highest derivative order exposed by the force laws.
inline constexpr int kMaxDerivativeOrder = 6;

/// Gaps at or above radius / kProximityRatio are flagged as outside the
/// proximity (z << R) regime.
inline constexpr double kProximityRatio = 50.0;

struct SpherePlateGeometry {
  double radius_R = 0.0;  // m
  double lever_b = 0.0;   // m, lateral distance of the sphere from the rotation axis
  double z0 = 0.0;        // m, electrostatic contact offset
  double z1 = 0.0;        // m, Casimir contact offset
  double delta_z = 0.0;   // m, piezo extension above the offset

  double electrostatic_gap() const noexcept { return delta_z + z0; }
  double casimir_gap() const noexcept { return delta_z + z1; }

  void validate() const;
};

struct ParallelPlateGeometry {
  double area_A = 0.0;  // m^2
  double gap_z = 0.0;   // m
};

struct ElectrostaticConfig {
  double voltage_V = 0.0;    // V applied to the sphere
  double residual_V0 = 0.0;  // V

  double bias() const noexcept { return voltage_V - residual_V0; }
};

/// One term F(z) = -coefficient / z^exponent.
struct PowerLawTerm {
  double coefficient = 0.0;
  int exponent = 1;

  double force(double z) const noexcept;

  /// d^order F / dz^order for order >= 0. No range check.
  double derivative(double z, int order) const noexcept;

  /// Coefficient c and power p such that the derivative equals c / z^p.
  PowerLawTerm derivative_term(int order) const noexcept;
};

/// A sum of inverse-power terms. Default constructed = no external force.
class ForceLaw {
public:
  ForceLaw() = default;

  static ForceLaw casimir_sphere_plate(const PhysicalConstants& constants, double radius_R);
  static ForceLaw casimir_parallel_plate(const PhysicalConstants& constants, double area_A);
  static ForceLaw electrostatic_sphere_plate(const PhysicalConstants& constants, double radius_R,
                                             const ElectrostaticConfig& config);

  ForceLaw& operator+=(const ForceLaw& other);
  friend ForceLaw operator+(ForceLaw a, const ForceLaw& b) { return a += b; }

  bool empty() const noexcept { return terms_.empty(); }
  std::span<const PowerLawTerm> terms() const noexcept { return terms_; }

  double force(double z) const noexcept;

  /// Order 0 is the force itself. Throws UnsupportedOrderError outside
  /// [0, kMaxDerivativeOrder] and DomainError for z <= 0.
  double derivative(double z, int order) const;

  /// Batched derivative over a grid of gaps; uses the active SIMD kernels.
  void derivative_batch(std::span<const double> z, int order, std::span<double> out) const;

  /// Interaction energy E with -dE/dz = force (zero at infinite separation).
  double energy(double z) const noexcept;

private:
  explicit ForceLaw(PowerLawTerm term) : terms_{term} {}

  std::vector<PowerLawTerm> terms_;
};

/// -pi^3 hbar c R / (360 z^3)
double casimir_sphere_plate(const PhysicalConstants& constants, double radius_R, double z);

/// d^order/dz^order of casimir_sphere_plate, order in [1, 6].
double casimir_sphere_plate_derivative(const PhysicalConstants& constants, double radius_R,
                                       double z, int order);

/// eps0 pi R (V - V0)^2 / (delta_z + z0)^2
double electrostatic_gradient(const PhysicalConstants& constants, double radius_R,
                              const ElectrostaticConfig& config, double delta_z, double z0);

/// -pi^2 hbar c A / (240 z^4)
double casimir_parallel_plate(const PhysicalConstants& constants, const ParallelPlateGeometry& geom);

/// -pi^3 hbar c R / (720 z^2)
double casimir_interaction_energy(const PhysicalConstants& constants, double radius_R, double z);

/// pi^3 hbar c R / 360
double casimir_sphere_plate_constant(const PhysicalConstants& constants, double radius_R);

/// Warning text when z is not small compared to R (z >= R / 50).
std::optional<std::string> proximity_warning(double radius_R, double z);

}  // namespace casimir_mems
