#pragma once

// One-dimensional spring + Casimir model: a plate on a Hooke spring facing
// a fixed sphere. x is the plate displacement toward the sphere, so the gap
// is d - x.

#include <optional>
#include <span>
#include <vector>

#include "casimir_mems/constants.hpp"

namespace casimir_mems {

struct SpringSphereModel {
  double spring_k = 0.0;      // N/m
  double sphere_R = 0.0;      // m
  double separation_d = 0.0;  // m, sphere to spring-equilibrium position
  PhysicalConstants constants{};

  void validate() const;

  /// C = pi^3 hbar c R / 360, so the Casimir force at gap u is -C/u^3.
  double casimir_constant() const noexcept;
};

struct PotentialTerms {
  double spring = 0.0;   // J
  double casimir = 0.0;  // J
  double total = 0.0;    // J
};

/// U(x) = k x^2 / 2 - C / (2 (d - x)^2). Throws DomainError outside [0, d).
PotentialTerms total_potential(const SpringSphereModel& model, double x);

/// dU/dx = k x - C / (d - x)^3.
double potential_gradient(const SpringSphereModel& model, double x);

/// Batched potential over displacements in [0, d).
void potential_curve(const SpringSphereModel& model, std::span<const double> x,
                     std::span<double> spring, std::span<double> casimir, std::span<double> total);

enum class EquilibriumKind { stable_minimum, unstable_maximum };

struct Equilibrium {
  double x = 0.0;  // m
  EquilibriumKind kind = EquilibriumKind::stable_minimum;
};

struct EquilibriumSet {
  std::vector<Equilibrium> points;      // sorted by x
  std::optional<double> barrier_height;  // J, U(maximum) - U(minimum)
  bool bistable = false;
  /// The two roots fused (tangency) or sit within rounding of it.
  bool degenerate = false;
  std::optional<double> tangent_x;
  /// U -> -inf at contact; the contact "global minimum" is not represented.
  bool contact_truncated = true;
};

/// Roots of dU/dx in (0, d), classified by the sign of U''.
EquilibriumSet find_equilibria(const SpringSphereModel& model);

/// Separation above which the model has a local minimum and a barrier:
/// d_c = (4/3) (3C/k)^(1/4).
double critical_separation(double spring_k, double sphere_R, const PhysicalConstants& constants = {});

}  // namespace casimir_mems
