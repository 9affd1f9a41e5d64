#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "tables.hpp"

namespace casimir_mems::simd {
namespace {

Isa best_supported() noexcept {
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa initial_isa() noexcept {
  const char* env = std::getenv("CASIMIR_MEMS_SIMD");
  if (env != nullptr) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
    if (v == "neon" && isa_supported(Isa::neon)) return Isa::neon;
  }
  return best_supported();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

void check_sizes(std::size_t in, std::size_t out) {
  if (in != out) throw std::invalid_argument("simd kernel: input and output spans differ in size");
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(CASIMIR_MEMS_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(CASIMIR_MEMS_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument("SIMD variant not supported here: " + std::string(isa_name(isa)));
  active().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

const KernelTable& kernels(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument("SIMD variant not supported here: " + std::string(isa_name(isa)));
  switch (isa) {
#if defined(CASIMIR_MEMS_HAVE_AVX2)
    case Isa::avx2: return detail::avx2_table;
#endif
#if defined(CASIMIR_MEMS_HAVE_NEON)
    case Isa::neon: return detail::neon_table;
#endif
    default: return detail::scalar_table;
  }
}

void inverse_power(std::span<const double> gap, double coeff, int exponent, double offset,
                   std::span<double> out, Accumulate mode) {
  check_sizes(gap.size(), out.size());
  if (exponent < 1 || exponent > kMaxExponent)
    throw std::invalid_argument("inverse_power: exponent " + std::to_string(exponent) +
                                " outside [1, " + std::to_string(kMaxExponent) + "]");
  kernels(active_isa()).inverse_power(gap.data(), gap.size(), coeff, exponent, offset, out.data(),
                                      mode == Accumulate::yes);
}

void spring_casimir_gradient(std::span<const double> x, double k, double c, double d,
                             std::span<double> out) {
  check_sizes(x.size(), out.size());
  kernels(active_isa()).spring_casimir_gradient(x.data(), x.size(), k, c, d, out.data());
}

void spring_casimir_potential(std::span<const double> x, double k, double c, double d,
                              std::span<double> spring, std::span<double> casimir,
                              std::span<double> total) {
  check_sizes(x.size(), spring.size());
  check_sizes(x.size(), casimir.size());
  check_sizes(x.size(), total.size());
  kernels(active_isa()).spring_casimir_potential(x.data(), x.size(), k, c, d, spring.data(),
                                                 casimir.data(), total.data());
}

}  // namespace casimir_mems::simd
