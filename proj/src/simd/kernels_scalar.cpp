#include "tables.hpp"

namespace casimir_mems::simd::detail {
namespace {

// Repeated multiplication, left to right. The SIMD variants mirror this order.
inline double ipow(double g, int exponent) {
  double p = g;
  for (int k = 1; k < exponent; ++k) p = p * g;
  return p;
}

void inverse_power(const double* gap, std::size_t n, double coeff, int exponent, double offset,
                   double* out, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = coeff / ipow(gap[i] + offset, exponent);
    out[i] = accumulate ? out[i] + v : v;
  }
}

void spring_casimir_gradient(const double* x, std::size_t n, double k, double c, double d,
                             double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double u = d - x[i];
    out[i] = k * x[i] - c / (u * u * u);
  }
}

void spring_casimir_potential(const double* x, std::size_t n, double k, double c, double d,
                              double* spring, double* casimir, double* total) {
  const double half_k = 0.5 * k;
  const double half_c = 0.5 * c;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = d - x[i];
    const double s = half_k * x[i] * x[i];
    const double e = -(half_c / (u * u));
    spring[i] = s;
    casimir[i] = e;
    total[i] = s + e;
  }
}

}  // namespace

const KernelTable scalar_table{&inverse_power, &spring_casimir_gradient, &spring_casimir_potential};

}  // namespace casimir_mems::simd::detail
