#include <immintrin.h>

#include "tables.hpp"

namespace casimir_mems::simd::detail {
namespace {

inline __m256d ipow(__m256d g, int exponent) {
  __m256d p = g;
  for (int k = 1; k < exponent; ++k) p = _mm256_mul_pd(p, g);
  return p;
}

inline double ipow_scalar(double g, int exponent) {
  double p = g;
  for (int k = 1; k < exponent; ++k) p = p * g;
  return p;
}

void inverse_power(const double* gap, std::size_t n, double coeff, int exponent, double offset,
                   double* out, bool accumulate) {
  const __m256d vc = _mm256_set1_pd(coeff);
  const __m256d voff = _mm256_set1_pd(offset);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_add_pd(_mm256_loadu_pd(gap + i), voff);
    __m256d v = _mm256_div_pd(vc, ipow(g, exponent));
    if (accumulate) v = _mm256_add_pd(_mm256_loadu_pd(out + i), v);
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) {
    const double v = coeff / ipow_scalar(gap[i] + offset, exponent);
    out[i] = accumulate ? out[i] + v : v;
  }
}

void spring_casimir_gradient(const double* x, std::size_t n, double k, double c, double d,
                             double* out) {
  const __m256d vk = _mm256_set1_pd(k);
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vd = _mm256_set1_pd(d);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d u = _mm256_sub_pd(vd, xv);
    const __m256d u3 = _mm256_mul_pd(_mm256_mul_pd(u, u), u);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_mul_pd(vk, xv), _mm256_div_pd(vc, u3)));
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
  const __m256d vhk = _mm256_set1_pd(half_k);
  const __m256d vhc = _mm256_set1_pd(half_c);
  const __m256d vd = _mm256_set1_pd(d);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d u = _mm256_sub_pd(vd, xv);
    const __m256d s = _mm256_mul_pd(_mm256_mul_pd(vhk, xv), xv);
    const __m256d e = _mm256_xor_pd(_mm256_div_pd(vhc, _mm256_mul_pd(u, u)), sign);
    _mm256_storeu_pd(spring + i, s);
    _mm256_storeu_pd(casimir + i, e);
    _mm256_storeu_pd(total + i, _mm256_add_pd(s, e));
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

const KernelTable avx2_table{&inverse_power, &spring_casimir_gradient, &spring_casimir_potential};

}  // namespace casimir_mems::simd::detail
