#include "casimir_mems/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "casimir_mems/error.hpp"
#include "casimir_mems/integrator.hpp"

namespace casimir_mems {
namespace {

constexpr double kConvergenceTolerance = 2e-3;

void require_positive(const char* field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "must be positive and finite, got " << v;
    throw DomainError(field, os.str());
  }
}

// Right-hand side of the first-order system (theta, theta_dot).
struct EquationOfMotion {
  double omega0_sq;
  double two_gamma;
  double drive_accel;  // tau / I
  double omega;
  double phase;
  double lever_b;
  double b_over_inertia;
  double gap_z;
  double static_force;  // F(z)
  double inadmissible_gap;
  const ForceLaw* law;

  double coupling_accel(double theta) const noexcept {
    if (law->empty()) return 0.0;
    return -b_over_inertia * (law->force(gap_z - lever_b * theta) - static_force);
  }

  bool operator()(double t, const OdeVector<2>& y, OdeVector<2>& dydt) const noexcept {
    const double gap = gap_z - lever_b * y[0];
    if (!(gap > inadmissible_gap)) return false;
    dydt[0] = y[1];
    dydt[1] = drive_accel * std::cos(omega * t + phase) - two_gamma * y[1] - omega0_sq * y[0] +
              coupling_accel(y[0]);
    return true;
  }
};

EquationOfMotion make_equation(const TorsionalOscillator& osc, const Coupling& coupling,
                               const ForceLaw& law, const DriveConfig& drive,
                               const IntegrationOptions& options) {
  EquationOfMotion eq{};
  eq.omega0_sq = osc.omega0 * osc.omega0;
  eq.two_gamma = 2.0 * osc.gamma;
  eq.drive_accel = drive.torque_tau / osc.inertia_I;
  eq.omega = drive.omega;
  eq.phase = drive.phase;
  eq.lever_b = coupling.lever_b;
  eq.b_over_inertia = coupling.lever_b / osc.inertia_I;
  eq.gap_z = coupling.gap_z;
  eq.static_force = law.empty() ? 0.0 : law.force(coupling.gap_z);
  eq.inadmissible_gap = 0.5 * options.contact_threshold;
  eq.law = &law;
  return eq;
}

void validate_inputs(const TorsionalOscillator& osc, const Coupling& coupling,
                     const DriveConfig& drive, const IntegrationOptions& options) {
  osc.validate();
  require_positive("lever_b", coupling.lever_b);
  require_positive("gap_z", coupling.gap_z);
  require_positive("omega", drive.omega);
  if (!(drive.torque_tau >= 0.0) || !std::isfinite(drive.torque_tau))
    throw DomainError("torque_tau", "must be non-negative and finite");
  require_positive("rtol", options.rtol);
  require_positive("atol_theta", options.atol_theta);
  require_positive("contact_threshold", options.contact_threshold);
  if (options.samples_per_period < 64)
    throw DomainError("samples_per_period", "must be at least 64");
}

// Integrates from `initial` for `duration`, optionally recording samples.
OscillatorState propagate(const TorsionalOscillator& osc, const Coupling& coupling,
                          const ForceLaw& law, const DriveConfig& drive,
                          const OscillatorState& initial, double duration,
                          const IntegrationOptions& options, Trajectory* record) {
  const double gap0 = coupling.gap_z - coupling.lever_b * initial.theta;
  if (!(gap0 >= options.contact_threshold)) {
    std::ostringstream os;
    os << "initial gap " << gap0 << " m is below the contact threshold";
    throw PullInError(initial.time, gap0, os.str());
  }
  if (!std::isfinite(initial.theta) || !std::isfinite(initial.theta_dot))
    throw DomainError("initial", "state must be finite");

  const double period = kTwoPi / drive.omega;
  const EquationOfMotion eq = make_equation(osc, coupling, law, drive, options);

  OdeTolerances<2> tol;
  tol.rtol = options.rtol;
  tol.atol = {options.atol_theta, options.atol_theta * drive.omega};
  tol.max_step = period / 8.0;
  tol.min_step = options.min_step_periods * period;

  DormandPrince<2, EquationOfMotion> stepper(eq, initial.time, {initial.theta, initial.theta_dot},
                                             tol, period / 64.0);

  const double spacing = period / options.samples_per_period;
  SampleGrid grid{initial.time, spacing, 1};
  const double t_end = initial.time + duration;
  if (record != nullptr) {
    record->omega = drive.omega;
    record->phase = drive.phase;
    record->samples_per_period = options.samples_per_period;
    const auto expected = static_cast<std::size_t>(duration / spacing * (1.0 + 1e-12)) + 1;
    record->time.reserve(expected);
    record->theta.reserve(expected);
    record->theta_dot.reserve(expected);
    record->time.push_back(initial.time);
    record->theta.push_back(initial.theta);
    record->theta_dot.push_back(initial.theta_dot);
  }

  auto sample = [&](double t, const OdeVector<2>& y) {
    record->time.push_back(t);
    record->theta.push_back(y[0]);
    record->theta_dot.push_back(y[1]);
  };
  auto no_sample = [](double, const OdeVector<2>&) {};
  auto accepted = [&](double t, const OdeVector<2>& y) {
    const double gap = coupling.gap_z - coupling.lever_b * y[0];
    if (gap < options.contact_threshold) {
      std::ostringstream os;
      os.precision(6);
      os << "pull-in at t = " << t << " s: gap " << gap << " m below contact threshold "
         << options.contact_threshold << " m";
      throw PullInError(t, gap, os.str());
    }
  };

  const AdvanceStatus status =
      record != nullptr ? stepper.advance(t_end, &grid, sample, accepted)
                        : stepper.advance(t_end, nullptr, no_sample, accepted);
  if (status == AdvanceStatus::step_underflow) {
    std::ostringstream os;
    os << "step size fell below " << tol.min_step << " s at t = " << stepper.time() << " s";
    throw StiffnessError(stepper.time(), os.str());
  }

  const OdeVector<2>& y = stepper.state();
  if (record != nullptr) {
    // The last grid time can overshoot t_end by rounding; it is the end state.
    const double t_last = grid.time(grid.next_index);
    if (std::abs(t_last - t_end) <= 1e-6 * spacing) {
      record->time.push_back(t_last);
      record->theta.push_back(y[0]);
      record->theta_dot.push_back(y[1]);
    }
  }
  return {y[0], y[1], t_end};
}

// Drive phase that continues cos(w_prev t + phase_prev) at time t with a new frequency.
double continued_phase(double t, double omega_prev, double phase_prev, double omega_next) {
  const double psi = std::remainder(omega_prev * t + phase_prev, kTwoPi);
  return std::remainder(psi - omega_next * t, kTwoPi);
}

struct SetpointOutcome {
  SweepPoint point;
  OscillatorState state;
  Trajectory segment;
};

SetpointOutcome run_setpoint(const TorsionalOscillator& osc, const Coupling& coupling,
                             const ForceLaw& law, const DriveConfig& drive,
                             const OscillatorState& start, const SweepProtocol& protocol,
                             const IntegrationOptions& options) {
  const double period = kTwoPi / drive.omega;
  OscillatorState state =
      propagate(osc, coupling, law, drive, start, protocol.settle_cycles * period, options, nullptr);
  Trajectory segment;
  state = propagate(osc, coupling, law, drive, state, protocol.measure_cycles * period, options,
                    &segment);
  const SteadyAmplitude s = extract_steady_amplitude(segment, drive.omega);
  return {{0.0, s.amplitude, s.phase, s.converged}, state, std::move(segment)};
}

void rethrow_with_setpoint(const Error& e, SweepKind kind, double setpoint) {
  std::ostringstream os;
  os.precision(10);
  os << e.what() << " (at " << to_string(kind) << " setpoint " << setpoint << ")";
  if (const auto* p = dynamic_cast<const PullInError*>(&e)) throw PullInError(p->time(), p->gap(), os.str());
  if (const auto* s = dynamic_cast<const StiffnessError*>(&e)) throw StiffnessError(s->time(), os.str());
  throw Error(e.code(), os.str());
}

}  // namespace

Trajectory integrate(const TorsionalOscillator& osc, const Coupling& coupling,
                     const ForceLaw& force_law, const DriveConfig& drive,
                     const OscillatorState& initial, double duration,
                     const IntegrationOptions& options) {
  validate_inputs(osc, coupling, drive, options);
  require_positive("duration", duration);
  Trajectory t;
  propagate(osc, coupling, force_law, drive, initial, duration, options, &t);
  return t;
}

SteadyAmplitude extract_steady_amplitude(const Trajectory& segment, double omega) {
  require_positive("omega", omega);
  const int spp = segment.samples_per_period;
  if (spp < 4) throw InsufficientDataError("trajectory needs at least 4 samples per period");
  if (segment.theta.size() != segment.time.size())
    throw InsufficientDataError("trajectory columns differ in length");
  const std::size_t n = segment.size();
  const std::size_t periods = n > 0 ? (n - 1) / static_cast<std::size_t>(spp) : 0;
  if (periods < 2)
    throw InsufficientDataError("segment spans fewer than two full drive periods");

  // Use the most recent whole periods; each half gets periods / 2 of them.
  const std::size_t half = periods / 2;
  const std::size_t per_half = half * static_cast<std::size_t>(spp);
  const std::size_t begin = (n - 1) - 2 * per_half;

  auto project = [&](std::size_t from, std::size_t count) {
    double c = 0.0;
    double s = 0.0;
    for (std::size_t i = from; i < from + count; ++i) {
      const double arg = omega * segment.time[i] + segment.phase;
      c += segment.theta[i] * std::cos(arg);
      s += segment.theta[i] * std::sin(arg);
    }
    c *= 2.0 / static_cast<double>(count);
    s *= 2.0 / static_cast<double>(count);
    return std::pair{c, s};
  };

  const auto [c1, s1] = project(begin, per_half);
  const auto [c2, s2] = project(begin + per_half, per_half);
  const double c = 0.5 * (c1 + c2);
  const double s = 0.5 * (s1 + s2);

  SteadyAmplitude out;
  out.amplitude = std::hypot(c, s);
  out.phase = std::atan2(-s, c);
  const double a1 = std::hypot(c1, s1);
  const double a2 = std::hypot(c2, s2);
  const double scale = std::max(a1, a2);
  out.converged = scale == 0.0 || std::abs(a1 - a2) < kConvergenceTolerance * scale;
  return out;
}

std::string_view to_string(SweepKind k) noexcept {
  return k == SweepKind::frequency ? "frequency" : "distance";
}

std::string_view direction_label(SweepKind kind, SweepDirection direction) noexcept {
  if (kind == SweepKind::frequency) return to_string(direction);
  return direction == SweepDirection::up ? "retract" : "approach";
}

double SweepProtocol::minimum_settle_cycles(const TorsionalOscillator& osc) noexcept {
  return 10.0 * osc.quality_Q / kPi;
}

void SweepProtocol::validate(const TorsionalOscillator& osc) const {
  if (schedule.empty()) throw DomainError("schedule", "must not be empty");
  for (double v : schedule) require_positive("schedule", v);
  direction();
  // Relative slack keeps a value printed to 17 digits acceptable.
  if (!(settle_cycles >= minimum_settle_cycles(osc) * (1.0 - 1e-12))) {
    std::ostringstream os;
    os << "must be at least 10 Q / pi = " << minimum_settle_cycles(osc) << " periods, got "
       << settle_cycles;
    throw DomainError("settle_cycles", os.str());
  }
  if (measure_cycles < 2) throw DomainError("measure_cycles", "must be at least 2");
}

SweepDirection SweepProtocol::direction() const {
  if (schedule.size() < 2) return SweepDirection::up;
  const bool ascending = schedule[1] > schedule[0];
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if ((schedule[i] > schedule[i - 1]) != ascending || schedule[i] == schedule[i - 1])
      throw DomainError("schedule", "must be strictly monotone");
  }
  return ascending ? SweepDirection::up : SweepDirection::down;
}

SweepResult swept_frequency(const TorsionalOscillator& osc, const Coupling& coupling,
                            const ForceLaw& force_law, double torque_tau,
                            const SweepProtocol& protocol, const IntegrationOptions& options,
                            const OscillatorState& initial) {
  if (protocol.kind != SweepKind::frequency)
    throw DomainError("protocol.kind", "swept_frequency needs a frequency protocol");
  protocol.validate(osc);
  validate_inputs(osc, coupling, {torque_tau, protocol.schedule.front()}, options);

  SweepResult result;
  result.kind = SweepKind::frequency;
  result.direction = protocol.direction();
  OscillatorState state = initial;
  double omega_prev = protocol.schedule.front();
  double phase_prev = 0.0;
  for (double omega : protocol.schedule) {
    const double phase = continued_phase(state.time, omega_prev, phase_prev, omega);
    try {
      auto outcome = run_setpoint(osc, coupling, force_law, {torque_tau, omega, phase}, state,
                                  protocol, options);
      outcome.point.setpoint = omega;
      result.points.push_back(outcome.point);
      state = outcome.state;
      result.last_segment = std::move(outcome.segment);
    } catch (const Error& e) {
      rethrow_with_setpoint(e, SweepKind::frequency, omega);
    }
    omega_prev = omega;
    phase_prev = phase;
  }
  result.final_state = state;
  return result;
}

SweepResult swept_distance(const TorsionalOscillator& osc, double lever_b,
                           const ForceLaw& force_law, double torque_tau, double omega_fixed,
                           const SweepProtocol& protocol, const IntegrationOptions& options,
                           const OscillatorState& initial) {
  if (protocol.kind != SweepKind::distance)
    throw DomainError("protocol.kind", "swept_distance needs a distance protocol");
  require_positive("omega_fixed", omega_fixed);
  protocol.validate(osc);
  validate_inputs(osc, {lever_b, protocol.schedule.front()}, {torque_tau, omega_fixed}, options);

  SweepResult result;
  result.kind = SweepKind::distance;
  result.direction = protocol.direction();
  OscillatorState state = initial;
  for (double gap : protocol.schedule) {
    try {
      auto outcome = run_setpoint(osc, {lever_b, gap}, force_law, {torque_tau, omega_fixed, 0.0},
                                  state, protocol, options);
      outcome.point.setpoint = gap;
      result.points.push_back(outcome.point);
      state = outcome.state;
      result.last_segment = std::move(outcome.segment);
    } catch (const Error& e) {
      rethrow_with_setpoint(e, SweepKind::distance, gap);
    }
  }
  result.final_state = state;
  return result;
}

double oscillator_energy(const TorsionalOscillator& osc, const Coupling& coupling,
                         const ForceLaw& force_law, double theta, double theta_dot) {
  const double kinetic = 0.5 * osc.inertia_I * theta_dot * theta_dot;
  const double elastic = 0.5 * osc.spring_k * theta * theta;
  if (force_law.empty()) return kinetic + elastic;
  const double z = coupling.gap_z;
  const double b = coupling.lever_b;
  const double coupling_energy =
      force_law.energy(z - b * theta) - force_law.energy(z) - b * force_law.force(z) * theta;
  return kinetic + elastic + coupling_energy;
}

}  // namespace casimir_mems
