#pragma once

namespace casimir_mems {

/// Fundamental constants in SI units (CODATA 2018).
struct PhysicalConstants {
  double hbar = 1.054571817e-34;     // J s
  double c = 2.99792458e8;           // m / s
  double epsilon0 = 8.8541878128e-12;  // F / m

  /// Throws DomainError naming the first non-positive or non-finite field.
  void validate() const;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace casimir_mems
