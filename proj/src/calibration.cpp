#include "casimir_mems/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "casimir_mems/error.hpp"
#include "casimir_mems/parallel.hpp"
#include "casimir_mems/simd/kernels.hpp"

namespace casimir_mems {
namespace {

constexpr double kGradientConvergence = 1e-8;

void require_positive(const char* field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "must be positive and finite, got " << v;
    throw DomainError(field, os.str());
  }
}

// Shift prefactor: delta_f = -(b^2 / (4 pi I w0)) F'(z).
double shift_prefactor(const TorsionalOscillator& osc, double lever_b) {
  return lever_b * lever_b / (4.0 * kPi * osc.inertia_I * osc.omega0);
}

// Model f_i = -K(p) / (delta_z_i + offset)^n with K = amplitude_per_b2 * b^2.
// Parameters are fitted in log space; `fixed_b` disables the b column.
struct InversePowerModel {
  std::span<const double> delta_z;
  std::span<const double> data;
  double amplitude_per_b2;
  int exponent;
  std::optional<double> fixed_b;

  std::size_t n_params() const noexcept { return fixed_b ? 1 : 2; }

  // params = {offset, b} or {offset}. Fills residuals and the Jacobian with
  // respect to log-parameters (column-major, m rows).
  void evaluate(std::span<const double> params, std::vector<double>& residual,
                std::vector<double>& jacobian) const {
    const std::size_t m = delta_z.size();
    const double offset = params[0];
    const double b = fixed_b ? *fixed_b : params[1];
    const double amp = amplitude_per_b2 * b * b;
    residual.resize(m);
    jacobian.resize(m * n_params());
    simd::inverse_power(delta_z, -amp, exponent, offset, residual);
    std::span<double> d_offset(jacobian.data(), m);
    simd::inverse_power(delta_z, exponent * amp * offset, exponent + 1, offset, d_offset);
    if (!fixed_b) {
      for (std::size_t i = 0; i < m; ++i) jacobian[m + i] = 2.0 * residual[i];
    }
    for (std::size_t i = 0; i < m; ++i) residual[i] -= data[i];
  }
};

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct LmOutcome {
  std::vector<double> params;
  double rms = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<bool> at_bound;
  std::vector<double> rms_history;
  std::vector<double> jacobian;  // log-space, at the solution
};

double sum_squares(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

// Damped least squares (Levenberg-Marquardt with Marquardt diagonal scaling)
// in log-parameter space, clamped to the bound box.
LmOutcome levenberg_marquardt(const InversePowerModel& model, std::vector<double> start,
                              const Bounds& bounds, const FitOptions& options) {
  const std::size_t n = model.n_params();
  const std::size_t m = model.delta_z.size();
  double data_norm = 0.0;
  for (double v : model.data) data_norm += v * v;
  data_norm = std::sqrt(data_norm);
  if (data_norm == 0.0) data_norm = 1.0;

  std::vector<double> lo(n), hi(n), u(n);
  for (std::size_t j = 0; j < n; ++j) {
    lo[j] = std::log(bounds.lower[j]);
    hi[j] = std::log(bounds.upper[j]);
    u[j] = std::clamp(std::log(start[j]), lo[j], hi[j]);
  }
  auto to_params = [&](const std::vector<double>& logp) {
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = std::exp(logp[j]);
    return p;
  };

  std::vector<double> r, jac;
  std::vector<double> p = to_params(u);
  model.evaluate(p, r, jac);
  double cost = sum_squares(r);

  LmOutcome out;
  out.rms_history.push_back(std::sqrt(cost / m));

  auto normal_equations = [&](Eigen::MatrixXd& jtj, Eigen::VectorXd& g) {
    Eigen::Map<const Eigen::MatrixXd> jm(jac.data(), static_cast<Eigen::Index>(m),
                                         static_cast<Eigen::Index>(n));
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(m));
    jtj = jm.transpose() * jm;
    g = jm.transpose() * rv;
  };

  // Gradient norm relative to |J| |data|, projected onto feasible directions.
  auto gradient_measure = [&](const Eigen::MatrixXd& jtj, const Eigen::VectorXd& g) {
    double gn = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool pinned_lo = u[j] <= lo[j] && g[j] > 0.0;
      const bool pinned_hi = u[j] >= hi[j] && g[j] < 0.0;
      if (!pinned_lo && !pinned_hi) gn += g[j] * g[j];
    }
    return std::sqrt(gn) / (std::sqrt(std::max(jtj.trace(), 1e-300)) * data_norm);
  };

  Eigen::MatrixXd jtj;
  Eigen::VectorXd g;
  normal_equations(jtj, g);
  double mu = 1e-3 * jtj.diagonal().maxCoeff();
  double nu = 2.0;
  bool step_small = false;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (cost == 0.0 || gradient_measure(jtj, g) < options.gradient_tolerance) break;
    Eigen::MatrixXd a = jtj;
    for (std::size_t j = 0; j < n; ++j) a(j, j) += mu * std::max(jtj(j, j), 1e-300);
    const Eigen::VectorXd delta = a.ldlt().solve(-g);

    std::vector<double> u_new(n);
    for (std::size_t j = 0; j < n; ++j) u_new[j] = std::clamp(u[j] + delta[j], lo[j], hi[j]);
    std::vector<double> r_new, jac_new;
    const std::vector<double> p_new = to_params(u_new);
    model.evaluate(p_new, r_new, jac_new);
    const double cost_new = sum_squares(r_new);

    Eigen::VectorXd step(n);
    for (std::size_t j = 0; j < n; ++j) step[j] = u_new[j] - u[j];
    const double predicted = -(2.0 * g.dot(step) + step.dot(jtj * step));

    if (std::isfinite(cost_new) && cost_new < cost) {
      const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : 1.0;
      double max_rel = 0.0;
      for (std::size_t j = 0; j < n; ++j) max_rel = std::max(max_rel, std::abs(std::expm1(step[j])));
      u = u_new;
      p = p_new;
      r = std::move(r_new);
      jac = std::move(jac_new);
      cost = cost_new;
      out.rms_history.push_back(std::sqrt(cost / m));
      normal_equations(jtj, g);
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (max_rel < options.parameter_tolerance) {
        step_small = true;
        ++it;
        break;
      }
    } else {
      // A rejected step that cannot move the parameters means we are done.
      double max_rel = 0.0;
      for (std::size_t j = 0; j < n; ++j) max_rel = std::max(max_rel, std::abs(std::expm1(step[j])));
      if (max_rel < options.parameter_tolerance * 1e-3) {
        step_small = true;
        break;
      }
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) break;
    }
  }

  out.params = p;
  out.rms = std::sqrt(cost / m);
  out.gradient_norm = gradient_measure(jtj, g);
  out.iterations = it;
  out.converged =
      cost == 0.0 || out.gradient_norm < kGradientConvergence ||
      (step_small && out.gradient_norm < 1e3 * kGradientConvergence);
  out.at_bound.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    out.at_bound[j] = u[j] <= lo[j] + 1e-12 || u[j] >= hi[j] - 1e-12;
  out.jacobian = jac;
  return out;
}

std::vector<double> log_spaced_starts(double lo, double hi, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) {
    const double t = (i + 0.5) / count;
    v.push_back(lo * std::pow(hi / lo, t));
  }
  return v;
}

FitResult run_multistart(const InversePowerModel& model, const Bounds& bounds,
                         const std::vector<std::string>& names, const FitOptions& options) {
  const std::size_t n = model.n_params();
  std::vector<std::vector<double>> starts;
  const auto s0 = log_spaced_starts(bounds.lower[0], bounds.upper[0], options.starts_per_parameter);
  if (n == 1) {
    for (double a : s0) starts.push_back({a});
  } else {
    const auto s1 = log_spaced_starts(bounds.lower[1], bounds.upper[1], options.starts_per_parameter);
    for (double a : s0)
      for (double b : s1) starts.push_back({a, b});
  }

  std::vector<LmOutcome> outcomes(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    outcomes[i] = levenberg_marquardt(model, starts[i], bounds, options);
  });

  // Ordered reduction: converged first, then lowest rms, then lowest offset.
  std::size_t best = 0;
  auto better = [&](const LmOutcome& a, const LmOutcome& b) {
    if (a.converged != b.converged) return a.converged;
    const double tol = 1e-9 * std::max(a.rms, b.rms);
    if (std::abs(a.rms - b.rms) > tol) return a.rms < b.rms;
    return a.params[0] < b.params[0];
  };
  for (std::size_t i = 1; i < outcomes.size(); ++i)
    if (better(outcomes[i], outcomes[best])) best = i;
  const LmOutcome& o = outcomes[best];

  FitResult result;
  for (std::size_t j = 0; j < n; ++j)
    result.parameters.push_back(
        {names[j], "m", o.params[j], bounds.lower[j], bounds.upper[j], o.at_bound[j]});
  result.residual_rms = o.rms;
  result.gradient_norm = o.gradient_norm;
  result.converged = o.converged;
  result.iterations = o.iterations;
  result.rms_history = o.rms_history;

  const std::size_t m = model.delta_z.size();
  if (m > n) {
    Eigen::Map<const Eigen::MatrixXd> jm(o.jacobian.data(), static_cast<Eigen::Index>(m),
                                         static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd jtj = jm.transpose() * jm;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.rank() == static_cast<Eigen::Index>(n)) {
      const double sigma2 = o.rms * o.rms * static_cast<double>(m) / static_cast<double>(m - n);
      const Eigen::MatrixXd cov_log = sigma2 * lu.inverse();
      std::vector<double> cov(n * n);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          cov[a * n + b] = cov_log(a, b) * o.params[a] * o.params[b];
      result.covariance = cov;
    }
  }
  return result;
}

std::vector<double> column(const ShiftDataset& d, bool shifts) {
  std::vector<double> v;
  v.reserve(d.points.size());
  for (const auto& p : d.points) v.push_back(shifts ? p.freq_shift : p.delta_z);
  return v;
}

}  // namespace

std::string_view to_string(ShiftKind k) noexcept {
  return k == ShiftKind::electrostatic ? "electrostatic" : "casimir";
}

void ShiftDataset::validate(std::size_t min_points) const {
  if (points.size() < min_points) {
    std::ostringstream os;
    os << "needs at least " << min_points << " points, got " << points.size();
    throw DomainError("points", os.str());
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].delta_z >= 0.0) || !std::isfinite(points[i].delta_z))
      throw DomainError("delta_z", "must be non-negative and finite");
    if (!std::isfinite(points[i].freq_shift)) throw DomainError("freq_shift", "must be finite");
    if (i > 0 && points[i].delta_z < points[i - 1].delta_z)
      throw DomainError("points", "must be sorted by delta_z");
  }
}

const FitParameter& FitResult::parameter(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw std::out_of_range("no fit parameter named " + std::string(name));
}

double FitResult::value(std::string_view name) const { return parameter(name).value; }

double fit_residual_voltage(std::span<const VoltagePoint> points) {
  std::set<double> distinct;
  for (const auto& p : points) {
    if (!std::isfinite(p.voltage) || !std::isfinite(p.frequency))
      throw DomainError("points", "voltage and frequency must be finite");
    distinct.insert(p.voltage);
  }
  if (distinct.size() < 3)
    throw FitError("rank", "need at least three distinct voltages to fit a parabola");

  double mean = 0.0;
  for (const auto& p : points) mean += p.voltage;
  mean /= static_cast<double>(points.size());
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, std::abs(p.voltage - mean));

  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = (points[i].voltage - mean) / scale;
    design(i, 0) = 1.0;
    design(i, 1) = x;
    design(i, 2) = x * x;
    rhs(i) = points[i].frequency;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw FitError("rank", "voltage design matrix is rank deficient");
  const Eigen::VectorXd c = qr.solve(rhs);
  if (!(c(2) < 0.0)) {
    std::ostringstream os;
    os << "fitted curvature " << c(2) / (scale * scale)
       << " Hz/V^2 is not negative; frequency has no maximum";
    throw FitError("not_a_maximum", os.str());
  }
  return mean + scale * (-c(1) / (2.0 * c(2)));
}

double electrostatic_shift_model(const TorsionalOscillator& osc, const PhysicalConstants& constants,
                                 double radius_R, double lever_b, double z0, double bias_V,
                                 double delta_z) {
  const double gradient = electrostatic_gradient(constants, radius_R, {bias_V, 0.0}, delta_z, z0);
  return -shift_prefactor(osc, lever_b) * gradient;
}

double casimir_shift_model(const TorsionalOscillator& osc, const PhysicalConstants& constants,
                           double radius_R, double lever_b, double z1, double delta_z) {
  const double gradient = casimir_sphere_plate_derivative(constants, radius_R, delta_z + z1, 1);
  return -shift_prefactor(osc, lever_b) * gradient;
}

FitResult fit_electrostatic_geometry(const ShiftDataset& dataset, const TorsionalOscillator& osc,
                                     double radius_R, double voltage_V, double residual_V0,
                                     const PhysicalConstants& constants, const FitOptions& options) {
  if (dataset.kind != ShiftKind::electrostatic)
    throw DomainError("dataset.kind", "electrostatic fit needs an electrostatic dataset");
  dataset.validate(4);
  osc.validate();
  constants.validate();
  require_positive("radius_R", radius_R);
  const double bias = voltage_V - residual_V0;
  if (bias == 0.0 || !std::isfinite(bias))
    throw DomainError("voltage_V", "applied voltage equals the residual voltage: no electrostatic signal");

  const std::vector<double> dz = column(dataset, false);
  const std::vector<double> df = column(dataset, true);
  // K = b^2 eps0 pi R V^2 / (4 pi I w0)
  const double per_b2 = constants.epsilon0 * kPi * radius_R * bias * bias * shift_prefactor(osc, 1.0);
  const InversePowerModel model{dz, df, per_b2, 2, std::nullopt};
  const Bounds bounds{{1e-9, 1e-6}, {1e-5, 1e-3}};  // lower {z0, b}, upper {z0, b}
  return run_multistart(model, bounds, {"z0", "b"}, options);
}

FitResult fit_casimir_offset(const ShiftDataset& dataset, const TorsionalOscillator& osc,
                             double radius_R, double lever_b, const PhysicalConstants& constants,
                             const FitOptions& options) {
  if (dataset.kind != ShiftKind::casimir)
    throw DomainError("dataset.kind", "Casimir fit needs a Casimir dataset");
  dataset.validate(2);
  osc.validate();
  constants.validate();
  require_positive("radius_R", radius_R);
  require_positive("lever_b", lever_b);

  const std::vector<double> dz = column(dataset, false);
  const std::vector<double> df = column(dataset, true);
  // F' = 3 C / z^4 with C = pi^3 hbar c R / 360, i.e. pi^3 hbar c R / (120 z^4).
  const double per_b2 = 3.0 * casimir_sphere_plate_constant(constants, radius_R) * shift_prefactor(osc, 1.0);
  const InversePowerModel model{dz, df, per_b2, 4, lever_b};
  const Bounds bounds{{1e-8}, {1e-6}};  // z1
  return run_multistart(model, bounds, {"z1"}, options);
}

ShiftDataset synthesize_shift_dataset(const ShiftTruth& truth, std::span<const double> delta_z_grid,
                                      double noise_sigma, std::uint64_t seed, NoiseModel noise) {
  truth.osc.validate();
  truth.constants.validate();
  require_positive("radius_R", truth.radius_R);
  require_positive("lever_b", truth.lever_b);
  require_positive("offset", truth.offset);
  if (!(noise_sigma >= 0.0)) throw DomainError("noise_sigma", "must be non-negative");

  ShiftDataset d;
  d.kind = truth.kind;
  if (truth.kind == ShiftKind::electrostatic) d.applied_V = truth.voltage_V;
  if (noise_sigma > 0.0) d.noise_sigma = noise_sigma;

  std::vector<double> grid(delta_z_grid.begin(), delta_z_grid.end());
  std::sort(grid.begin(), grid.end());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double dz : grid) {
    if (!(dz >= 0.0)) throw DomainError("delta_z", "must be non-negative");
    double f = truth.kind == ShiftKind::electrostatic
                   ? electrostatic_shift_model(truth.osc, truth.constants, truth.radius_R,
                                               truth.lever_b, truth.offset,
                                               truth.voltage_V - truth.residual_V0, dz)
                   : casimir_shift_model(truth.osc, truth.constants, truth.radius_R, truth.lever_b,
                                         truth.offset, dz);
    if (noise_sigma > 0.0) {
      const double n = normal(rng);
      f = noise == NoiseModel::additive ? f + noise_sigma * n : f * (1.0 + noise_sigma * n);
    }
    d.points.push_back({dz, f});
  }
  return d;
}

std::vector<VoltagePoint> synthesize_voltage_scan(double residual_V0, double curvature_Hz_per_V2,
                                                  double base_Hz, std::span<const double> voltages,
                                                  double noise_sigma_Hz, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<VoltagePoint> out;
  for (double v : voltages) {
    double f = base_Hz + curvature_Hz_per_V2 * (v - residual_V0) * (v - residual_V0);
    if (noise_sigma_Hz > 0.0) f += noise_sigma_Hz * normal(rng);
    out.push_back({v, f});
  }
  return out;
}

}  // namespace casimir_mems
