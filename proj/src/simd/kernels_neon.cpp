#include <arm_neon.h>

#include "tables.hpp"

namespace casimir_mems::simd::detail {
namespace {

inline float64x2_t ipow(float64x2_t g, int exponent) {
  float64x2_t p = g;
  for (int k = 1; k < exponent; ++k) p = vmulq_f64(p, g);
  return p;
}

inline double ipow_scalar(double g, int exponent) {
  double p = g;
  for (int k = 1; k < exponent; ++k) p = p * g;
  return p;
}

void inverse_power(const double* gap, std::size_t n, double coeff, int exponent, double offset,
                   double* out, bool accumulate) {
  const float64x2_t vc = vdupq_n_f64(coeff);
  const float64x2_t voff = vdupq_n_f64(offset);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vaddq_f64(vld1q_f64(gap + i), voff);
    float64x2_t v = vdivq_f64(vc, ipow(g, exponent));
    if (accumulate) v = vaddq_f64(vld1q_f64(out + i), v);
    vst1q_f64(out + i, v);
  }
  for (; i < n; ++i) {
    const double v = coeff / ipow_scalar(gap[i] + offset, exponent);
    out[i] = accumulate ? out[i] + v : v;
  }
}

void spring_casimir_gradient(const double* x, std::size_t n, double k, double c, double d,
                             double* out) {
  const float64x2_t vk = vdupq_n_f64(k);
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t vd = vdupq_n_f64(d);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xv = vld1q_f64(x + i);
    const float64x2_t u = vsubq_f64(vd, xv);
    const float64x2_t u3 = vmulq_f64(vmulq_f64(u, u), u);
    vst1q_f64(out + i, vsubq_f64(vmulq_f64(vk, xv), vdivq_f64(vc, u3)));
  }
  for (; i < n; ++i) {
    const double u = d - x[i];
    out[i] = k * x[i] - c / (u * u * u);
  }
}

void spring_casimir_potential(const double* x, std::size_t n, double k, double c, double d,
                              double* spring, double* casimir, double* total) {
  const double half_k = 0.5 * k;
  const double half_c = 0.5 * c;
  const float64x2_t vhk = vdupq_n_f64(half_k);
  const float64x2_t vhc = vdupq_n_f64(half_c);
  const float64x2_t vd = vdupq_n_f64(d);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xv = vld1q_f64(x + i);
    const float64x2_t u = vsubq_f64(vd, xv);
    const float64x2_t s = vmulq_f64(vmulq_f64(vhk, xv), xv);
    const float64x2_t e = vnegq_f64(vdivq_f64(vhc, vmulq_f64(u, u)));
    vst1q_f64(spring + i, s);
    vst1q_f64(casimir + i, e);
    vst1q_f64(total + i, vaddq_f64(s, e));
  }
  for (; i < n; ++i) {
    const double u = d - x[i];
    const double s = half_k * x[i] * x[i];
    const double e = -(half_c / (u * u));
    spring[i] = s;
    casimir[i] = e;
    total[i] = s + e;
  }
}

}  // namespace

const KernelTable neon_table{&inverse_power, &spring_casimir_gradient, &spring_casimir_potential};

}  // namespace casimir_mems::simd::detail
