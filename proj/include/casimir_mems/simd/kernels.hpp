#pragma once

// Batch kernels for the inverse-power force laws. Each kernel has a scalar
// reference implementation and SIMD variants (AVX2 on x86-64, NEON on
// aarch64) chosen at runtime. The variants perform the same IEEE operations
// in the same order, so results are bitwise identical to the reference.

#include <cstddef>
#include <span>
#include <string_view>

namespace casimir_mems::simd {

enum class Isa { scalar, avx2, neon };

/// Highest power handled by inverse_power.
inline constexpr int kMaxExponent = 16;

struct KernelTable {
  // out[i] (+)= coeff / (gap[i] + offset)^exponent
  void (*inverse_power)(const double* gap, std::size_t n, double coeff, int exponent,
                        double offset, double* out, bool accumulate);
  // out[i] = k x[i] - c / (d - x[i])^3
  void (*spring_casimir_gradient)(const double* x, std::size_t n, double k, double c,
                                  double d, double* out);
  // spring = k x^2 / 2, casimir = -c / (2 (d - x)^2), total = spring + casimir
  void (*spring_casimir_potential)(const double* x, std::size_t n, double k, double c,
                                   double d, double* spring, double* casimir, double* total);
};

/// True when the running CPU and the build both support `isa`.
bool isa_supported(Isa isa) noexcept;

/// The ISA used by the free functions below. Initialised from the
/// CASIMIR_MEMS_SIMD environment variable (scalar|avx2|neon|auto), else the
/// best supported one.
Isa active_isa() noexcept;

/// Switch the active ISA. Throws std::invalid_argument when unsupported.
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa) noexcept;

const KernelTable& kernels(Isa isa);

enum class Accumulate { no, yes };

void inverse_power(std::span<const double> gap, double coeff, int exponent, double offset,
                   std::span<double> out, Accumulate mode = Accumulate::no);

void spring_casimir_gradient(std::span<const double> x, double k, double c, double d,
                             std::span<double> out);

void spring_casimir_potential(std::span<const double> x, double k, double c, double d,
                              std::span<double> spring, std::span<double> casimir,
                              std::span<double> total);

}  // namespace casimir_mems::simd
