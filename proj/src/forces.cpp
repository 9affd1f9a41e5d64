#include "casimir_mems/forces.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "casimir_mems/error.hpp"
#include "casimir_mems/simd/kernels.hpp"

namespace casimir_mems {
namespace {

void require_positive(const char* field, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << "must be positive and finite, got " << value;
    throw DomainError(field, os.str());
  }
}

// Rising factorial n (n+1) ... (n+m-1).
double rising_factorial(int n, int m) noexcept {
  double r = 1.0;
  for (int k = 0; k < m; ++k) r *= static_cast<double>(n + k);
  return r;
}

double ipow(double z, int n) noexcept {
  double p = z;
  for (int k = 1; k < n; ++k) p *= z;
  return p;
}

}  // namespace

void PhysicalConstants::validate() const {
  require_positive("hbar", hbar);
  require_positive("c", c);
  require_positive("epsilon0", epsilon0);
}

void SpherePlateGeometry::validate() const {
  require_positive("radius_R", radius_R);
  require_positive("lever_b", lever_b);
  require_positive("z0", z0);
  require_positive("z1", z1);
  if (!std::isfinite(delta_z)) throw DomainError("delta_z", "must be finite");
  require_positive("electrostatic_gap", electrostatic_gap());
  require_positive("casimir_gap", casimir_gap());
}

double PowerLawTerm::force(double z) const noexcept {
  return -coefficient / ipow(z, exponent);
}

PowerLawTerm PowerLawTerm::derivative_term(int order) const noexcept {
  // d^m/dz^m (-K z^-n) = -K (-1)^m (n)_m z^-(n+m)
  const double sign = (order % 2 == 0) ? -1.0 : 1.0;
  return {sign * coefficient * rising_factorial(exponent, order), exponent + order};
}

double PowerLawTerm::derivative(double z, int order) const noexcept {
  const PowerLawTerm d = derivative_term(order);
  return d.coefficient / ipow(z, d.exponent);
}

ForceLaw ForceLaw::casimir_sphere_plate(const PhysicalConstants& constants, double radius_R) {
  constants.validate();
  require_positive("radius_R", radius_R);
  return ForceLaw(PowerLawTerm{casimir_sphere_plate_constant(constants, radius_R), 3});
}

ForceLaw ForceLaw::casimir_parallel_plate(const PhysicalConstants& constants, double area_A) {
  constants.validate();
  require_positive("area_A", area_A);
  const double k = kPi * kPi * constants.hbar * constants.c * area_A / 240.0;
  return ForceLaw(PowerLawTerm{k, 4});
}

ForceLaw ForceLaw::electrostatic_sphere_plate(const PhysicalConstants& constants, double radius_R,
                                              const ElectrostaticConfig& config) {
  constants.validate();
  require_positive("radius_R", radius_R);
  const double v = config.bias();
  if (!std::isfinite(v)) throw DomainError("voltage_V", "must be finite");
  // F = -eps0 pi R (V - V0)^2 / z, whose gradient is the familiar 1/z^2 law.
  return ForceLaw(PowerLawTerm{constants.epsilon0 * kPi * radius_R * v * v, 1});
}

ForceLaw& ForceLaw::operator+=(const ForceLaw& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

double ForceLaw::force(double z) const noexcept {
  double f = 0.0;
  for (const auto& t : terms_) f += t.force(z);
  return f;
}

double ForceLaw::derivative(double z, int order) const {
  if (order < 0 || order > kMaxDerivativeOrder) throw UnsupportedOrderError(order);
  require_positive("z", z);
  double d = 0.0;
  for (const auto& t : terms_) d += t.derivative(z, order);
  return d;
}

void ForceLaw::derivative_batch(std::span<const double> z, int order, std::span<double> out) const {
  if (order < 0 || order > kMaxDerivativeOrder) throw UnsupportedOrderError(order);
  for (double v : z) require_positive("z", v);
  if (terms_.empty()) {
    for (auto& o : out) o = 0.0;
    return;
  }
  bool first = true;
  for (const auto& t : terms_) {
    const PowerLawTerm d = t.derivative_term(order);
    simd::inverse_power(z, d.coefficient, d.exponent, 0.0, out,
                        first ? simd::Accumulate::no : simd::Accumulate::yes);
    first = false;
  }
}

double ForceLaw::energy(double z) const noexcept {
  // E = -K / ((n-1) z^(n-1)) for n > 1. The n = 1 term has a logarithmic
  // potential with no finite reference at infinity; it is measured from z = 1 m.
  double e = 0.0;
  for (const auto& t : terms_) {
    if (t.exponent == 1)
      e += t.coefficient * std::log(z);
    else
      e += -t.coefficient / ((t.exponent - 1) * ipow(z, t.exponent - 1));
  }
  return e;
}

double casimir_sphere_plate_constant(const PhysicalConstants& constants, double radius_R) {
  return kPi * kPi * kPi * constants.hbar * constants.c * radius_R / 360.0;
}

double casimir_sphere_plate(const PhysicalConstants& constants, double radius_R, double z) {
  constants.validate();
  require_positive("radius_R", radius_R);
  require_positive("z", z);
  const double k = casimir_sphere_plate_constant(constants, radius_R);
  return -k / (z * z * z);
}

double casimir_sphere_plate_derivative(const PhysicalConstants& constants, double radius_R,
                                       double z, int order) {
  if (order < 1 || order > kMaxDerivativeOrder) throw UnsupportedOrderError(order);
  constants.validate();
  require_positive("radius_R", radius_R);
  require_positive("z", z);
  const PowerLawTerm base{casimir_sphere_plate_constant(constants, radius_R), 3};
  return base.derivative(z, order);
}

double electrostatic_gradient(const PhysicalConstants& constants, double radius_R,
                              const ElectrostaticConfig& config, double delta_z, double z0) {
  constants.validate();
  require_positive("radius_R", radius_R);
  const double gap = delta_z + z0;
  require_positive("delta_z + z0", gap);
  const double v = config.bias();
  return constants.epsilon0 * kPi * radius_R * v * v / (gap * gap);
}

double casimir_parallel_plate(const PhysicalConstants& constants, const ParallelPlateGeometry& geom) {
  constants.validate();
  require_positive("area_A", geom.area_A);
  require_positive("gap_z", geom.gap_z);
  const double z2 = geom.gap_z * geom.gap_z;
  return -kPi * kPi * constants.hbar * constants.c * geom.area_A / (240.0 * z2 * z2);
}

double casimir_interaction_energy(const PhysicalConstants& constants, double radius_R, double z) {
  constants.validate();
  require_positive("radius_R", radius_R);
  require_positive("z", z);
  return -casimir_sphere_plate_constant(constants, radius_R) / (2.0 * z * z);
}

std::optional<std::string> proximity_warning(double radius_R, double z) {
  if (z < radius_R / kProximityRatio) return std::nullopt;
  std::ostringstream os;
  os.precision(4);
  os << "gap " << z << " m is not small compared to sphere radius " << radius_R
     << " m (z >= R/" << kProximityRatio << "); proximity-force law is inaccurate";
  return os.str();
}

}  // namespace casimir_mems
