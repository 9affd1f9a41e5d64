#include "casimir_mems/statics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "casimir_mems/error.hpp"
#include "casimir_mems/forces.hpp"
#include "casimir_mems/simd/kernels.hpp"

namespace casimir_mems {
namespace {

constexpr double kDegenerateSeparation = 1e-12;  // m
constexpr int kScanPointsPerSide = 2048;

void require_positive(const char* field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "must be positive and finite, got " << v;
    throw DomainError(field, os.str());
  }
}

void require_in_domain(const SpringSphereModel& m, double x) {
  if (!(x >= 0.0 && x < m.separation_d)) {
    std::ostringstream os;
    os << "displacement must lie in [0, d) with d = " << m.separation_d << " m, got " << x;
    throw DomainError("displacement_x", os.str());
  }
}

// Bisection to floating-point exhaustion. g(lo) and g(hi) have opposite signs.
template <class G>
double bisect(G&& g, double lo, double hi) {
  double glo = g(lo);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
}

}  // namespace

void SpringSphereModel::validate() const {
  constants.validate();
  require_positive("spring_k", spring_k);
  require_positive("sphere_R", sphere_R);
  require_positive("separation_d", separation_d);
}

double SpringSphereModel::casimir_constant() const noexcept {
  return casimir_sphere_plate_constant(constants, sphere_R);
}

PotentialTerms total_potential(const SpringSphereModel& model, double x) {
  model.validate();
  require_in_domain(model, x);
  PotentialTerms t;
  t.spring = 0.5 * model.spring_k * x * x;
  t.casimir = casimir_interaction_energy(model.constants, model.sphere_R, model.separation_d - x);
  t.total = t.spring + t.casimir;
  return t;
}

double potential_gradient(const SpringSphereModel& model, double x) {
  model.validate();
  require_in_domain(model, x);
  const double u = model.separation_d - x;
  return model.spring_k * x - model.casimir_constant() / (u * u * u);
}

void potential_curve(const SpringSphereModel& model, std::span<const double> x,
                     std::span<double> spring, std::span<double> casimir, std::span<double> total) {
  model.validate();
  for (double v : x) require_in_domain(model, v);
  simd::spring_casimir_potential(x, model.spring_k, model.casimir_constant(), model.separation_d,
                                 spring, casimir, total);
}

EquilibriumSet find_equilibria(const SpringSphereModel& model) {
  model.validate();
  const double d = model.separation_d;
  const double k = model.spring_k;
  const double c = model.casimir_constant();

  // dU/dx is concave on [0, d) with its peak where k = 3C/u^4, so it has at
  // most two roots. The scan is log-spaced from both ends of the interval
  // and always contains x = 0 and the peak.
  std::vector<double> grid;
  grid.reserve(2 * kScanPointsPerSide + 3);
  grid.push_back(0.0);
  const double lo_exp = std::log(d * 1e-15);
  const double hi_exp = std::log(0.5 * d);
  for (int i = 0; i < kScanPointsPerSide; ++i) {
    const double t = static_cast<double>(i) / (kScanPointsPerSide - 1);
    grid.push_back(std::exp(lo_exp + t * (hi_exp - lo_exp)));
  }
  for (int i = 0; i < kScanPointsPerSide; ++i) {
    const double t = static_cast<double>(i) / (kScanPointsPerSide - 1);
    const double x = d - std::exp(hi_exp + t * (lo_exp - hi_exp));
    if (x < d) grid.push_back(x);
  }
  const double u_peak = std::pow(3.0 * c / k, 0.25);
  const double x_peak = d - u_peak;
  if (x_peak > 0.0 && x_peak < d) grid.push_back(x_peak);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> g(grid.size());
  simd::spring_casimir_gradient(grid, k, c, d, g);

  auto gradient = [&](double x) {
    const double u = d - x;
    return k * x - c / (u * u * u);
  };

  EquilibriumSet out;
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (g[i] == 0.0 && i > 0) {
      roots.push_back(grid[i]);
      continue;
    }
    if ((g[i] < 0.0) != (g[i + 1] < 0.0) && g[i + 1] != 0.0)
      roots.push_back(bisect(gradient, grid[i], grid[i + 1]));
  }

  // Tangency: the peak of dU/dx touches zero within rounding.
  if (x_peak > 0.0 && x_peak < d) {
    const double g_peak = gradient(x_peak);
    const double scale = k * x_peak;
    const bool touching = std::abs(g_peak) <= 64.0 * 2.220446049250313e-16 * scale;
    const bool fused = roots.size() == 2 && (roots[1] - roots[0]) < kDegenerateSeparation;
    if (touching || fused) {
      out.degenerate = true;
      out.tangent_x = x_peak;
      return out;
    }
  }

  for (double x : roots) {
    // U'' = k - 3C/(d-x)^4
    const double u = d - x;
    const double curvature = k - 3.0 * c / (u * u * u * u);
    out.points.push_back({x, curvature > 0.0 ? EquilibriumKind::stable_minimum
                                             : EquilibriumKind::unstable_maximum});
  }

  const Equilibrium* minimum = nullptr;
  const Equilibrium* maximum = nullptr;
  for (const auto& p : out.points) {
    if (p.kind == EquilibriumKind::stable_minimum && minimum == nullptr) minimum = &p;
    if (p.kind == EquilibriumKind::unstable_maximum && maximum == nullptr) maximum = &p;
  }
  if (minimum != nullptr && maximum != nullptr) {
    out.bistable = true;
    out.barrier_height =
        total_potential(model, maximum->x).total - total_potential(model, minimum->x).total;
  }
  return out;
}

double critical_separation(double spring_k, double sphere_R, const PhysicalConstants& constants) {
  constants.validate();
  require_positive("spring_k", spring_k);
  require_positive("sphere_R", sphere_R);
  const double c = casimir_sphere_plate_constant(constants, sphere_R);
  return (4.0 / 3.0) * std::pow(3.0 * c / spring_k, 0.25);
}

}  // namespace casimir_mems
