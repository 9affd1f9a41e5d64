#include <catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "casimir_mems/forces.hpp"
#include "casimir_mems/simd/kernels.hpp"
#include "casimir_mems/statics.hpp"

using namespace casimir_mems;
using simd::Isa;

namespace {

std::vector<Isa> supported_variants() {
  std::vector<Isa> v;
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (simd::isa_supported(isa)) v.push_back(isa);
  return v;
}

std::vector<double> log_uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::vector<double> v(n);
  for (auto& x : v) x = std::exp(u(rng));
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

struct IsaGuard {
  Isa saved = simd::active_isa();
  ~IsaGuard() { simd::set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar variant is always available") {
  CHECK(simd::isa_supported(Isa::scalar));
  CHECK(simd::isa_name(Isa::scalar) == "scalar");
  CHECK_NOTHROW(simd::kernels(Isa::scalar));
}

TEST_CASE("unsupported variants are refused") {
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (simd::isa_supported(isa)) continue;
    CHECK_THROWS_AS(simd::set_active_isa(isa), std::invalid_argument);
    CHECK_THROWS_AS(simd::kernels(isa), std::invalid_argument);
  }
}

TEST_CASE("inverse_power variants match the scalar reference bitwise") {
  const auto& ref = simd::kernels(Isa::scalar);
  for (Isa isa : supported_variants()) {
    const auto& k = simd::kernels(isa);
    INFO(simd::isa_name(isa));
    // Lengths around the vector width exercise the remainder loop.
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 1000u}) {
      const auto gap = log_uniform(n, 1e-9, 1e-4, n + 11);
      for (int e = 1; e <= simd::kMaxExponent; ++e) {
        for (bool acc : {false, true}) {
          std::vector<double> a(n, 0.25), b(n, 0.25);
          ref.inverse_power(gap.data(), n, -2.7e-31, e, 3.5e-8, a.data(), acc);
          k.inverse_power(gap.data(), n, -2.7e-31, e, 3.5e-8, b.data(), acc);
          INFO("n=" << n << " exponent=" << e << " accumulate=" << acc);
          CHECK(bitwise_equal(a, b));
        }
      }
    }
  }
}

TEST_CASE("spring-Casimir kernels match the scalar reference bitwise") {
  const auto& ref = simd::kernels(Isa::scalar);
  const double k = 0.019, c = 2.72e-31, d = 150e-9;
  for (Isa isa : supported_variants()) {
    const auto& kern = simd::kernels(isa);
    for (std::size_t n : {1u, 3u, 4u, 6u, 17u, 513u}) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = d * static_cast<double>(i) / static_cast<double>(n + 1);
      std::vector<double> g1(n), g2(n);
      ref.spring_casimir_gradient(x.data(), n, k, c, d, g1.data());
      kern.spring_casimir_gradient(x.data(), n, k, c, d, g2.data());
      CHECK(bitwise_equal(g1, g2));

      std::vector<double> s1(n), c1(n), t1(n), s2(n), c2(n), t2(n);
      ref.spring_casimir_potential(x.data(), n, k, c, d, s1.data(), c1.data(), t1.data());
      kern.spring_casimir_potential(x.data(), n, k, c, d, s2.data(), c2.data(), t2.data());
      CHECK(bitwise_equal(s1, s2));
      CHECK(bitwise_equal(c1, c2));
      CHECK(bitwise_equal(t1, t2));
    }
  }
}

TEST_CASE("scalar kernels agree with the closed forms") {
  IsaGuard guard;
  simd::set_active_isa(Isa::scalar);
  const std::vector<double> gap{20e-9, 98e-9, 1e-6, 10e-6};
  std::vector<double> out(gap.size());
  simd::inverse_power(gap, 2.0, 3, 1e-9, out);
  for (std::size_t i = 0; i < gap.size(); ++i)
    CHECK_THAT(out[i], Catch::Matchers::WithinRel(2.0 / std::pow(gap[i] + 1e-9, 3), 1e-14));
  simd::inverse_power(gap, 1.0, 1, 0.0, out, simd::Accumulate::yes);
  for (std::size_t i = 0; i < gap.size(); ++i)
    CHECK_THAT(out[i], Catch::Matchers::WithinRel(2.0 / std::pow(gap[i] + 1e-9, 3) + 1.0 / gap[i], 1e-14));
}

TEST_CASE("span wrappers validate their arguments") {
  std::vector<double> in(4, 1e-7), out(3);
  CHECK_THROWS_AS(simd::inverse_power(in, 1.0, 2, 0.0, out), std::invalid_argument);
  std::vector<double> ok(4);
  CHECK_THROWS_AS(simd::inverse_power(in, 1.0, 0, 0.0, ok), std::invalid_argument);
  CHECK_THROWS_AS(simd::inverse_power(in, 1.0, simd::kMaxExponent + 1, 0.0, ok), std::invalid_argument);
}

TEST_CASE("batch force derivatives are independent of the active variant") {
  IsaGuard guard;
  const auto law = ForceLaw::casimir_sphere_plate({}, 100e-6) +
                   ForceLaw::electrostatic_sphere_plate({}, 100e-6, {0.4085, 0.075});
  const auto z = log_uniform(257, 20e-9, 10e-6, 5);
  for (int order = 0; order <= kMaxDerivativeOrder; ++order) {
    simd::set_active_isa(Isa::scalar);
    std::vector<double> ref(z.size());
    law.derivative_batch(z, order, ref);
    for (std::size_t i = 0; i < z.size(); ++i)
      CHECK_THAT(ref[i], Catch::Matchers::WithinRel(law.derivative(z[i], order), 1e-13));
    for (Isa isa : supported_variants()) {
      simd::set_active_isa(isa);
      std::vector<double> v(z.size());
      law.derivative_batch(z, order, v);
      CHECK(bitwise_equal(ref, v));
    }
  }
}

TEST_CASE("potential curves are independent of the active variant") {
  IsaGuard guard;
  const SpringSphereModel model{0.019, 100e-6, 150e-9, {}};
  std::vector<double> x(301);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 149e-9 * static_cast<double>(i) / 300.0;
  simd::set_active_isa(Isa::scalar);
  std::vector<double> s(x.size()), c(x.size()), t(x.size());
  potential_curve(model, x, s, c, t);
  for (Isa isa : supported_variants()) {
    simd::set_active_isa(isa);
    std::vector<double> s2(x.size()), c2(x.size()), t2(x.size());
    potential_curve(model, x, s2, c2, t2);
    CHECK(bitwise_equal(s, s2));
    CHECK(bitwise_equal(c, c2));
    CHECK(bitwise_equal(t, t2));
  }
}
