#include "casimir_mems/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "casimir_mems/calibration.hpp"
#include "casimir_mems/csv.hpp"
#include "casimir_mems/dynamics.hpp"
#include "casimir_mems/error.hpp"
#include "casimir_mems/parallel.hpp"
#include "casimir_mems/statics.hpp"

namespace casimir_mems {

bool is_subcommand(std::string_view name) noexcept {
  return std::find(std::begin(kSubcommands), std::end(kSubcommands), name) != std::end(kSubcommands);
}

std::optional<std::string> RunReport::find(std::string_view key) const {
  for (const auto& [k, v] : derived)
    if (k == key) return v;
  return std::nullopt;
}

std::string format_report(const RunReport& r) {
  std::string out = "subcommand = " + r.subcommand + "\n";
  for (const auto& [k, v] : r.derived) out += "derived." + k + " = " + v + "\n";
  for (std::size_t i = 0; i < r.warnings.size(); ++i)
    out += "warning." + std::to_string(i + 1) + " = " + r.warnings[i] + "\n";
  for (const auto& m : r.manifest) out += "file." + m.path + " = " + std::to_string(m.rows) + "\n";
  std::istringstream echo(format_config(r.config));
  for (std::string line; std::getline(echo, line);) out += "config." + line + "\n";
  return out;
}

std::string format_timings(const RunReport& r) {
  std::string out;
  for (const auto& [k, v] : r.timings) out += "timing." + k + " = " + format_double(v) + "\n";
  return out;
}

ExperimentConfig config_from_report(std::string_view text) {
  std::string echoed;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.starts_with("config.")) {
      echoed += line.substr(7);
      echoed += '\n';
    }
  }
  return parse_config(echoed);
}

namespace {

using Clock = std::chrono::steady_clock;

class Run {
public:
  Run(std::string_view sub, const ExperimentConfig& c) : c_(c) {
    report_.subcommand = std::string(sub);
    report_.config = c;
  }

  void derived(std::string key, double v) { report_.derived.emplace_back(std::move(key), format_double(v)); }
  void derived(std::string key, std::string v) { report_.derived.emplace_back(std::move(key), std::move(v)); }
  void derived_flag(std::string key, bool v) { derived(std::move(key), std::string(v ? "1" : "0")); }
  void warn(std::string w) { report_.warnings.push_back(std::move(w)); }
  void time(std::string key, Clock::time_point since) {
    report_.timings.emplace_back(std::move(key), std::chrono::duration<double>(Clock::now() - since).count());
  }

  // fill writes a complete CSV and returns its data-row count.
  void emit(const std::string& name, const std::function<std::size_t(std::ostream&)>& fill) {
    std::ostringstream buf;
    const std::size_t rows = fill(buf);
    write_file(name, buf.str());
    report_.manifest.push_back({name, rows});
  }

  RunReport finish(Clock::time_point start) {
    time("total_s", start);
    const std::string timing_name = c_.output_prefix + report_.subcommand + "_timing.txt";
    report_.manifest.push_back({timing_name, report_.timings.size()});
    const std::string report_name = c_.output_prefix + report_.subcommand + "_report.txt";
    write_file(report_name, format_report(report_));
    write_file(timing_name, format_timings(report_));
    return report_;
  }

  const ExperimentConfig& config() const { return c_; }

private:
  void write_file(const std::string& name, const std::string& content) const {
    const std::filesystem::path dir(c_.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    if (!f) throw DomainError("output_dir", "cannot write " + (dir / name).string());
  }

  ExperimentConfig c_;
  RunReport report_;
};

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Shift and kappa work in the paper's units; desk_scale only applies to
// resonance curves and time-domain runs.
TorsionalOscillator paper_oscillator(const ExperimentConfig& c) {
  return TorsionalOscillator::from_frequency(c.inertia_kg_m2, c.f0_Hz, c.quality_Q);
}

void oscillator_summary(Run& run, const TorsionalOscillator& osc) {
  const auto& c = run.config();
  run.derived("omega0_rad_per_s", osc.omega0);
  run.derived("gamma_per_s", osc.gamma);
  run.derived("quality_Q", osc.quality_Q);
  run.derived("inertia_kg_m2", osc.inertia_I);
  run.derived("spring_k_Nm_per_rad", osc.spring_k);
  const double f_from_k = std::sqrt(c.stated_spring_k_Nm_per_rad / c.inertia_kg_m2) / kTwoPi;
  run.derived("f0_from_stated_k_Hz", f_from_k);
  const double mismatch = std::abs(f_from_k - c.f0_Hz) / c.f0_Hz;
  if (mismatch > 1e-3)
    run.warn("stated_spring_k_Nm_per_rad and inertia_kg_m2 give f0 = " + fmt_g(f_from_k) +
             " Hz, " + fmt_g(100.0 * mismatch) + "% from f0_Hz; the oscillator is built from f0_Hz");
  if (c.desk_scale != 1.0)
    run.warn("desk_scale = " + fmt_g(c.desk_scale) +
             ": Q and I divided by it, frequency offsets from f0 multiplied by it");
}

void proximity(Run& run, double z) {
  if (auto w = proximity_warning(run.config().sphere_radius_m, z)) run.warn(*w);
}

ForceLaw casimir_law(const ExperimentConfig& c) {
  return ForceLaw::casimir_sphere_plate(c.constants(), c.sphere_radius_m);
}

std::vector<double> linspace(double a, double b, std::int64_t n) {
  std::vector<double> v;
  for (std::int64_t i = 0; i < n; ++i)
    v.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

void run_potential(Run& run) {
  const auto& c = run.config();
  const auto model = c.statics_model();
  model.validate();
  const auto n = static_cast<std::size_t>(c.potential_points);
  std::vector<double> x(n), spring(n), cas(n), total(n);
  // [0, d): the last sample stays one step short of contact.
  for (std::size_t i = 0; i < n; ++i)
    x[i] = model.separation_d * static_cast<double>(i) / static_cast<double>(n);
  potential_curve(model, x, spring, cas, total);
  run.emit(c.output_prefix + "potential.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"x_m", "u_spring_J", "u_casimir_J", "u_total_J"});
    for (std::size_t i = 0; i < n; ++i) w.row(x[i], spring[i], cas[i], total[i]);
    return w.rows();
  });
  run.derived("casimir_constant_J_m", model.casimir_constant());
  run.derived("critical_separation_m",
              critical_separation(model.spring_k, model.sphere_R, model.constants));
}

void run_equilibria(Run& run) {
  const auto& c = run.config();
  const auto model = c.statics_model();
  model.validate();
  const auto set = find_equilibria(model);
  const double dc = critical_separation(model.spring_k, model.sphere_R, model.constants);
  run.derived("separation_d_m", model.separation_d);
  run.derived("critical_separation_m", dc);
  run.derived_flag("bistable", set.bistable);
  run.derived_flag("degenerate", set.degenerate);
  run.derived_flag("contact_truncated", set.contact_truncated);
  run.derived("n_equilibria", std::to_string(set.points.size()));
  if (set.barrier_height) run.derived("barrier_height_J", *set.barrier_height);
  if (set.tangent_x) run.derived("tangent_x_m", *set.tangent_x);
  if (model.separation_d < dc)
    run.warn("separation d = " + fmt_g(model.separation_d) + " m is below the critical separation d_c = " +
             fmt_g(dc) + " m: the model has no local minimum and the sphere collapses to contact");
  run.emit(c.output_prefix + "equilibria.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"x_m", "kind", "u_total_J"});
    for (const auto& p : set.points)
      w.row(p.x, p.kind == EquilibriumKind::stable_minimum ? "stable_minimum" : "unstable_maximum",
            total_potential(model, p.x).total);
    return w.rows();
  });
}

void run_shift(Run& run) {
  const auto& c = run.config();
  const auto osc = paper_oscillator(c);
  oscillator_summary(run, osc);
  const auto constants = c.constants();
  const auto cas = casimir_law(c);
  const auto el = ForceLaw::electrostatic_sphere_plate(constants, c.sphere_radius_m,
                                                       {c.applied_V_V, c.residual_V0_V});
  const auto dz = linspace(c.shift_delta_z_start_m, c.shift_delta_z_stop_m, c.shift_points);
  proximity(run, c.z1_m + dz.front());
  run.emit(c.output_prefix + "shift.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"delta_z_m", "casimir_gap_m", "electrostatic_gap_m", "freq_shift_casimir_Hz",
                     "freq_shift_electrostatic_Hz", "freq_shift_total_Hz"});
    for (double d : dz) {
      const double zc = c.z1_m + d;
      const double ze = c.z0_m + d;
      const double gc = cas.derivative(zc, 1);
      const double ge = el.derivative(ze, 1);
      w.row(d, zc, ze, linearized_shift(osc, c.lever_b_m, gc).shift_Hz(),
            linearized_shift(osc, c.lever_b_m, ge).shift_Hz(),
            linearized_shift(osc, c.lever_b_m, gc + ge).shift_Hz());
    }
    return w.rows();
  });
  const double z = c.separation_z_m;
  run.derived("separation_z_m", z);
  run.derived("freq_shift_casimir_at_separation_Hz",
              linearized_shift(osc, c.lever_b_m, cas.derivative(z, 1)).shift_Hz());
}

void taylor_summary(Run& run, const TaylorCoefficients& t) {
  run.derived("omega1_rad_per_s", t.omega1);
  run.derived("alpha_per_rad_s2", t.alpha);
  run.derived("beta_per_rad2_s2", t.beta);
  run.derived("kappa_per_rad2_s", t.kappa);
}

void run_kappa(Run& run) {
  const auto& c = run.config();
  const auto osc = paper_oscillator(c);
  oscillator_summary(run, osc);
  const double z = c.separation_z_m;
  proximity(run, z);
  const auto law = casimir_law(c);
  const auto t = taylor_coefficients(osc, c.lever_b_m, law, z);
  run.derived("separation_z_m", z);
  taylor_summary(run, t);
  const auto shift = linearized_shift(osc, c.lever_b_m, law.derivative(z, 1));
  run.derived("freq_shift_Hz", shift.shift_Hz());
  run.derived("omega_exact_rad_per_s", shift.omega_exact);
}

void run_response(Run& run) {
  const auto& c = run.config();
  const auto osc = c.oscillator();
  oscillator_summary(run, osc);
  const double z = c.separation_z_m;
  proximity(run, z);
  const auto t = taylor_coefficients(osc, c.lever_b_m, casimir_law(c), z);
  taylor_summary(run, t);
  const double tau = c.torque();
  run.derived("torque_Nm", tau);
  run.derived("linear_peak_amplitude_rad", linear_peak_amplitude(t, osc, tau));
  const auto grid = c.omega_grid();
  const auto up = response_curve(t, osc, tau, grid, SweepDirection::up);
  const auto down = response_curve(t, osc, tau, grid, SweepDirection::down);
  if (const auto win = hysteresis_window(t, osc, tau)) {
    run.derived_flag("hysteretic", true);
    run.derived("window_omega_low_rad_per_s", win->omega_low);
    run.derived("window_omega_high_rad_per_s", win->omega_high);
    run.derived("window_width_Hz", win->width() / kTwoPi);
  } else {
    run.derived_flag("hysteretic", false);
  }
  run.emit(c.output_prefix + "response.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"omega_rad_per_s", "freq_Hz", "amplitude_rad", "amplitude_m_at_sphere", "n_roots",
                     "branch", "stable", "direction"});
    for (const auto* curve : {&up, &down})
      for (const auto& p : curve->points)
        w.row(p.omega, p.omega / kTwoPi, p.amplitude, p.amplitude * c.lever_b_m, p.n_roots,
              to_string(p.branch), p.stable, to_string(curve->direction));
    return w.rows();
  });
}

SweepProtocol protocol_for(const ExperimentConfig& c, const TorsionalOscillator& osc, SweepKind kind,
                           std::vector<double> schedule) {
  SweepProtocol p;
  p.kind = kind;
  p.schedule = std::move(schedule);
  p.settle_cycles = c.settle_cycles_per_Q * osc.quality_Q;
  p.measure_cycles = static_cast<int>(c.measure_cycles);
  return p;
}

void emit_sweep(Run& run, const std::string& name, const SweepResult& r) {
  const auto& c = run.config();
  const std::string_view kind = r.kind == SweepKind::frequency ? "omega_rad_per_s" : "gap_m";
  run.emit(name, [&](std::ostream& os) {
    CsvWriter w(os, {"setpoint_value", "setpoint_kind", "amplitude_rad", "amplitude_m_at_sphere",
                     "phase_rad", "converged", "direction"});
    for (const auto& p : r.points)
      w.row(p.setpoint, kind, p.amplitude, p.amplitude * c.lever_b_m, p.phase, p.converged,
            direction_label(r.kind, r.direction));
    return w.rows();
  });
  std::size_t unconverged = 0;
  for (const auto& p : r.points) unconverged += p.converged ? 0 : 1;
  if (unconverged > 0)
    run.warn(std::to_string(unconverged) + " " + std::string(direction_label(r.kind, r.direction)) +
             " setpoints did not settle to 0.2%; they are kept and flagged converged = 0");
}

void emit_trajectory(Run& run, const std::string& name, const Trajectory& t) {
  run.emit(name, [&](std::ostream& os) {
    CsvWriter w(os, {"time_s", "theta_rad", "theta_dot_rad_per_s"});
    for (std::size_t i = 0; i < t.size(); ++i) w.row(t.time[i], t.theta[i], t.theta_dot[i]);
    return w.rows();
  });
}

void run_freq_sweep(Run& run) {
  const auto& c = run.config();
  const auto osc = c.oscillator();
  oscillator_summary(run, osc);
  const double z = c.separation_z_m;
  proximity(run, z);
  const auto law = casimir_law(c);
  const double tau = c.torque();
  const Coupling coupling{c.lever_b_m, z};
  auto grid = c.omega_grid();
  std::vector<SweepProtocol> protocols;
  protocols.push_back(protocol_for(c, osc, SweepKind::frequency, grid));
  std::reverse(grid.begin(), grid.end());
  protocols.push_back(protocol_for(c, osc, SweepKind::frequency, grid));
  for (const auto& p : protocols) p.validate(osc);

  std::vector<SweepResult> results(2);
  const auto t0 = Clock::now();
  parallel_for(2, [&](std::size_t i) {
    results[i] = swept_frequency(osc, coupling, law, tau, protocols[i], c.integration_options());
  });
  run.time("sweeps_s", t0);

  emit_sweep(run, c.output_prefix + "freq_sweep_up.csv", results[0]);
  emit_sweep(run, c.output_prefix + "freq_sweep_down.csv", results[1]);
  if (c.write_trajectory) {
    emit_trajectory(run, c.output_prefix + "trajectory_up.csv", results[0].last_segment);
    emit_trajectory(run, c.output_prefix + "trajectory_down.csv", results[1].last_segment);
  }

  const auto& up = results[0].points;
  const auto& down = results[1].points;
  const std::size_t n = up.size();
  double max_rel = 0.0;
  std::optional<double> lo, hi;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = up[i];
    const auto& b = down[n - 1 - i];
    const double rel = std::abs(a.amplitude - b.amplitude) / std::max(a.amplitude, b.amplitude);
    max_rel = std::max(max_rel, rel);
    if (rel > 0.05) {
      if (!lo) lo = a.setpoint;
      hi = a.setpoint;
    }
  }
  run.derived("max_relative_up_down_difference", max_rel);
  run.derived_flag("hysteresis_observed", lo.has_value());
  if (lo) {
    run.derived("observed_window_omega_low_rad_per_s", *lo);
    run.derived("observed_window_omega_high_rad_per_s", *hi);
  }
  auto peak = [](const std::vector<SweepPoint>& pts) {
    return std::max_element(pts.begin(), pts.end(),
                            [](const SweepPoint& a, const SweepPoint& b) { return a.amplitude < b.amplitude; })
        ->setpoint;
  };
  run.derived("peak_omega_up_rad_per_s", peak(up));
  run.derived("peak_omega_down_rad_per_s", peak(down));
  const auto t = taylor_coefficients(osc, c.lever_b_m, law, z);
  run.derived("omega1_rad_per_s", t.omega1);
  run.derived("kappa_per_rad2_s", t.kappa);
  if (const auto win = hysteresis_window(t, osc, tau)) {
    run.derived("window_omega_low_rad_per_s", win->omega_low);
    run.derived("window_omega_high_rad_per_s", win->omega_high);
  }
}

void run_dist_sweep(Run& run) {
  const auto& c = run.config();
  const auto osc = c.oscillator();
  oscillator_summary(run, osc);
  proximity(run, c.dist_z_near_m);
  const auto law = casimir_law(c);
  const double tau = c.torque();
  const double omega = c.scaled_fixed_omega();
  run.derived("drive_omega_rad_per_s", omega);
  const auto approach_grid = linspace(c.dist_z_far_m, c.dist_z_near_m, c.dist_points);
  auto retract_grid = approach_grid;
  std::reverse(retract_grid.begin(), retract_grid.end());

  const auto t0 = Clock::now();
  const auto opts = c.integration_options();
  const auto approach = swept_distance(osc, c.lever_b_m, law, tau, omega,
                                       protocol_for(c, osc, SweepKind::distance, approach_grid), opts);
  // Retraction continues from the approach's final state.
  const auto retract = swept_distance(osc, c.lever_b_m, law, tau, omega,
                                      protocol_for(c, osc, SweepKind::distance, retract_grid), opts,
                                      approach.final_state);
  run.time("sweeps_s", t0);

  emit_sweep(run, c.output_prefix + "dist_sweep_approach.csv", approach);
  emit_sweep(run, c.output_prefix + "dist_sweep_retract.csv", retract);
  if (c.write_trajectory) emit_trajectory(run, c.output_prefix + "trajectory_retract.csv", retract.last_segment);

  const std::size_t n = approach.points.size();
  double best = 1.0, best_z = approach.points.front().setpoint;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = approach.points[i].amplitude;
    const double r = retract.points[n - 1 - i].amplitude;
    const double ratio = std::max(a, r) / std::max(std::min(a, r), 1e-300);
    if (ratio > best) {
      best = ratio;
      best_z = approach.points[i].setpoint;
    }
  }
  run.derived("max_approach_retract_ratio", best);
  run.derived("max_ratio_gap_m", best_z);
}

void fit_summary(Run& run, const FitResult& r) {
  for (std::size_t i = 0; i < r.parameters.size(); ++i) {
    const auto& p = r.parameters[i];
    run.derived("fit." + p.name + "_" + p.unit, p.value);
    run.derived_flag("fit." + p.name + "_at_bound", p.at_bound);
    if (r.covariance) {
      const double var = (*r.covariance)[i * r.parameters.size() + i];
      run.derived("fit." + p.name + "_sigma_" + p.unit, std::sqrt(std::max(var, 0.0)));
    }
    if (p.at_bound) run.warn("fitted " + p.name + " sits on its bound");
  }
  run.derived("fit.residual_rms_Hz", r.residual_rms);
  run.derived("fit.gradient_norm", r.gradient_norm);
  run.derived_flag("fit.converged", r.converged);
  run.derived("fit.iterations", std::to_string(r.iterations));
  if (!r.converged) run.warn("fit did not meet its convergence test");
}

void run_fit(Run& run) {
  const auto& c = run.config();
  if (c.fit_input_csv.empty()) throw DomainError("fit_input_csv", "must name a CSV file");
  const auto table = read_csv(c.fit_input_csv);
  const auto constants = c.constants();
  if (c.fit_kind == "voltage") {
    const auto pts = voltage_points_from_csv(table);
    run.derived("fit.residual_V0_V", fit_residual_voltage(pts));
    return;
  }
  const auto osc = paper_oscillator(c);
  oscillator_summary(run, osc);
  const bool electro = c.fit_kind == "electrostatic";
  const auto ds = shift_dataset_from_csv(table, electro ? ShiftKind::electrostatic : ShiftKind::casimir);
  std::function<double(double)> model;
  if (electro) {
    const double V = ds.applied_V.value_or(c.applied_V_V);
    const auto r = fit_electrostatic_geometry(ds, osc, c.sphere_radius_m, V, c.residual_V0_V, constants);
    fit_summary(run, r);
    const double z0 = r.value("z0"), b = r.value("b");
    model = [=, &osc](double dz) {
      return electrostatic_shift_model(osc, constants, c.sphere_radius_m, b, z0, V - c.residual_V0_V, dz);
    };
  } else {
    const auto r = fit_casimir_offset(ds, osc, c.sphere_radius_m, c.lever_b_m, constants);
    fit_summary(run, r);
    const double z1 = r.value("z1");
    model = [=, &osc](double dz) {
      return casimir_shift_model(osc, constants, c.sphere_radius_m, c.lever_b_m, z1, dz);
    };
  }
  run.emit(c.output_prefix + "fit_residuals.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"delta_z_m", "freq_shift_Hz", "model_Hz", "residual_Hz"});
    for (const auto& p : ds.points) {
      const double m = model(p.delta_z);
      w.row(p.delta_z, p.freq_shift, m, p.freq_shift - m);
    }
    return w.rows();
  });
}

void run_synth(Run& run) {
  const auto& c = run.config();
  const auto osc = paper_oscillator(c);
  oscillator_summary(run, osc);
  ShiftTruth truth;
  truth.kind = c.synth_kind == "electrostatic" ? ShiftKind::electrostatic : ShiftKind::casimir;
  truth.osc = osc;
  truth.constants = c.constants();
  truth.radius_R = c.sphere_radius_m;
  truth.lever_b = c.lever_b_m;
  truth.offset = truth.kind == ShiftKind::electrostatic ? c.z0_m : c.z1_m;
  truth.voltage_V = c.applied_V_V;
  truth.residual_V0 = c.residual_V0_V;
  const auto grid = c.synth_points == 1
                        ? std::vector<double>{c.synth_delta_z_start_m}
                        : linspace(c.synth_delta_z_start_m, c.synth_delta_z_stop_m, c.synth_points);
  const auto ds = synthesize_shift_dataset(truth, grid, c.noise_sigma_Hz, c.seed,
                                           c.noise_model == "relative" ? NoiseModel::relative : NoiseModel::additive);
  run.derived("synth.kind", std::string(to_string(truth.kind)));
  run.derived("synth.offset_m", truth.offset);
  run.emit(c.output_prefix + "synth_" + c.synth_kind + ".csv", [&](std::ostream& os) {
    write_shift_dataset(os, ds);
    return ds.points.size();
  });
}

}  // namespace

RunReport run_experiment(std::string_view subcommand, const ExperimentConfig& config) {
  if (!is_subcommand(subcommand))
    throw DomainError("subcommand", "unknown subcommand '" + std::string(subcommand) + "'");
  config.validate();
  const auto start = Clock::now();
  Run run(subcommand, config);
  static const std::pair<std::string_view, void (*)(Run&)> table[] = {
      {"potential", run_potential},   {"equilibria", run_equilibria}, {"shift", run_shift},
      {"kappa", run_kappa},           {"response", run_response},     {"freq-sweep", run_freq_sweep},
      {"dist-sweep", run_dist_sweep}, {"fit", run_fit},               {"synth", run_synth},
  };
  for (const auto& [name, fn] : table)
    if (name == subcommand) fn(run);
  return run.finish(start);
}

int run(std::string_view subcommand, const std::optional<std::filesystem::path>& config_path,
        std::span<const std::string> overrides, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig config = config_path ? load_config(*config_path) : default_paper_config();
    for (const auto& o : overrides) apply_override(config, o);
    const auto report = run_experiment(subcommand, config);
    out << format_report(report);
    return 0;
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << e.code() << ": " << msg << '\n';
    return e.code() == "config" ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace casimir_mems
