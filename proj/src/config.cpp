#include "casimir_mems/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include "casimir_mems/error.hpp"

namespace casimir_mems {
namespace {

using Member = std::variant<double ExperimentConfig::*, std::int64_t ExperimentConfig::*,
                            std::uint64_t ExperimentConfig::*, std::string ExperimentConfig::*>;

struct Field {
  std::string_view key;
  Member member;
};

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> f{
      {"hbar_J_s", &C::hbar_J_s},
      {"c_m_per_s", &C::c_m_per_s},
      {"epsilon0_F_per_m", &C::epsilon0_F_per_m},
      {"inertia_kg_m2", &C::inertia_kg_m2},
      {"f0_Hz", &C::f0_Hz},
      {"quality_Q", &C::quality_Q},
      {"stated_spring_k_Nm_per_rad", &C::stated_spring_k_Nm_per_rad},
      {"desk_scale", &C::desk_scale},
      {"sphere_radius_m", &C::sphere_radius_m},
      {"lever_b_m", &C::lever_b_m},
      {"z0_m", &C::z0_m},
      {"z1_m", &C::z1_m},
      {"separation_z_m", &C::separation_z_m},
      {"applied_V_V", &C::applied_V_V},
      {"residual_V0_V", &C::residual_V0_V},
      {"excitation_V", &C::excitation_V},
      {"torque_per_V_Nm_per_V", &C::torque_per_V_Nm_per_V},
      {"statics_spring_k_N_per_m", &C::statics_spring_k_N_per_m},
      {"statics_separation_d_m", &C::statics_separation_d_m},
      {"potential_points", &C::potential_points},
      {"shift_delta_z_start_m", &C::shift_delta_z_start_m},
      {"shift_delta_z_stop_m", &C::shift_delta_z_stop_m},
      {"shift_points", &C::shift_points},
      {"sweep_f_start_Hz", &C::sweep_f_start_Hz},
      {"sweep_f_stop_Hz", &C::sweep_f_stop_Hz},
      {"sweep_points", &C::sweep_points},
      {"settle_cycles_per_Q", &C::settle_cycles_per_Q},
      {"measure_cycles", &C::measure_cycles},
      {"samples_per_period", &C::samples_per_period},
      {"rtol", &C::rtol},
      {"atol_theta_rad", &C::atol_theta_rad},
      {"contact_threshold_m", &C::contact_threshold_m},
      {"fixed_f_Hz", &C::fixed_f_Hz},
      {"dist_z_far_m", &C::dist_z_far_m},
      {"dist_z_near_m", &C::dist_z_near_m},
      {"dist_points", &C::dist_points},
      {"fit_kind", &C::fit_kind},
      {"fit_input_csv", &C::fit_input_csv},
      {"synth_kind", &C::synth_kind},
      {"synth_delta_z_start_m", &C::synth_delta_z_start_m},
      {"synth_delta_z_stop_m", &C::synth_delta_z_stop_m},
      {"synth_points", &C::synth_points},
      {"noise_sigma_Hz", &C::noise_sigma_Hz},
      {"noise_model", &C::noise_model},
      {"seed", &C::seed},
      {"output_dir", &C::output_dir},
      {"output_prefix", &C::output_prefix},
      {"write_trajectory", &C::write_trajectory},
  };
  return f;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view value, int line, std::string_view key) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(line, std::string(key), "cannot parse '" + std::string(value) + "' as a number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw ConfigError(line, std::string(key), "value must be finite");
  }
  return out;
}

void assign(ExperimentConfig& c, std::string_view key, std::string_view value, int line) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError(line, std::string(key), "unknown key");
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(c.*member)>;
        if constexpr (std::is_same_v<T, std::string>)
          c.*member = std::string(value);
        else
          c.*member = parse_number<T>(value, line, key);
      },
      f->member);
}

std::string format_value(const ExperimentConfig& c, const Member& m) {
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(c.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return c.*member;
        } else if constexpr (std::is_floating_point_v<T>) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.17g", c.*member);
          return buf;
        } else {
          return std::to_string(c.*member);
        }
      },
      m);
}

void require(bool ok, std::string_view key, const std::string& what) {
  if (!ok) throw ConfigError(0, std::string(key), what);
}

}  // namespace

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line_no, "", "expected 'key = value', got '" + std::string(line) + "'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "", "missing key");
    if (!seen.insert(std::string(key)).second)
      throw ConfigError(line_no, std::string(key), "duplicate key");
    assign(base, key, value, line_no);
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError(0, "", "override must look like key=value, got '" + std::string(assignment) + "'");
  assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), 0);
}

std::string format_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += format_value(config, f.member);
    out += '\n';
  }
  return out;
}

ExperimentConfig default_paper_config() { return ExperimentConfig{}; }

void ExperimentConfig::validate() const {
  constants().validate();
  for (const auto& [key, v] : std::initializer_list<std::pair<std::string_view, double>>{
           {"inertia_kg_m2", inertia_kg_m2},
           {"f0_Hz", f0_Hz},
           {"quality_Q", quality_Q},
           {"desk_scale", desk_scale},
           {"sphere_radius_m", sphere_radius_m},
           {"lever_b_m", lever_b_m},
           {"z0_m", z0_m},
           {"z1_m", z1_m},
           {"separation_z_m", separation_z_m},
           {"statics_spring_k_N_per_m", statics_spring_k_N_per_m},
           {"statics_separation_d_m", statics_separation_d_m},
           {"sweep_f_start_Hz", sweep_f_start_Hz},
           {"sweep_f_stop_Hz", sweep_f_stop_Hz},
           {"settle_cycles_per_Q", settle_cycles_per_Q},
           {"rtol", rtol},
           {"atol_theta_rad", atol_theta_rad},
           {"contact_threshold_m", contact_threshold_m},
           {"fixed_f_Hz", fixed_f_Hz},
           {"dist_z_far_m", dist_z_far_m},
           {"dist_z_near_m", dist_z_near_m}}) {
    require(v > 0.0, key, "must be positive");
  }
  require(excitation_V >= 0.0, "excitation_V", "must be non-negative");
  require(torque_per_V_Nm_per_V >= 0.0, "torque_per_V_Nm_per_V", "must be non-negative");
  require(potential_points >= 2, "potential_points", "must be at least 2");
  require(shift_points >= 2, "shift_points", "must be at least 2");
  require(sweep_points >= 2, "sweep_points", "must be at least 2");
  require(dist_points >= 2, "dist_points", "must be at least 2");
  require(synth_points >= 1, "synth_points", "must be at least 1");
  require(measure_cycles >= 2, "measure_cycles", "must be at least 2");
  require(samples_per_period >= 64, "samples_per_period", "must be at least 64");
  require(sweep_f_stop_Hz > sweep_f_start_Hz, "sweep_f_stop_Hz", "must exceed sweep_f_start_Hz");
  require(dist_z_far_m > dist_z_near_m, "dist_z_far_m", "must exceed dist_z_near_m");
  require(shift_delta_z_start_m >= 0.0 && shift_delta_z_stop_m > shift_delta_z_start_m,
          "shift_delta_z_stop_m", "need 0 <= start < stop");
  require(synth_delta_z_start_m >= 0.0 && synth_delta_z_stop_m >= synth_delta_z_start_m,
          "synth_delta_z_stop_m", "need 0 <= start <= stop");
  require(noise_sigma_Hz >= 0.0, "noise_sigma_Hz", "must be non-negative");
  require(fit_kind == "electrostatic" || fit_kind == "casimir" || fit_kind == "voltage", "fit_kind",
          "must be electrostatic, casimir or voltage");
  require(synth_kind == "electrostatic" || synth_kind == "casimir", "synth_kind",
          "must be electrostatic or casimir");
  require(noise_model == "additive" || noise_model == "relative", "noise_model",
          "must be additive or relative");
  require(write_trajectory == 0 || write_trajectory == 1, "write_trajectory", "must be 0 or 1");
}

PhysicalConstants ExperimentConfig::constants() const {
  return PhysicalConstants{hbar_J_s, c_m_per_s, epsilon0_F_per_m};
}

TorsionalOscillator ExperimentConfig::oscillator() const {
  const auto base = TorsionalOscillator::from_frequency(inertia_kg_m2, f0_Hz, quality_Q);
  return desk_scale == 1.0 ? base : base.desk_scaled(desk_scale);
}

SpherePlateGeometry ExperimentConfig::geometry() const {
  return SpherePlateGeometry{sphere_radius_m, lever_b_m, z0_m, z1_m, separation_z_m - z1_m};
}

SpringSphereModel ExperimentConfig::statics_model() const {
  return SpringSphereModel{statics_spring_k_N_per_m, sphere_radius_m, statics_separation_d_m, constants()};
}

IntegrationOptions ExperimentConfig::integration_options() const {
  IntegrationOptions o;
  o.rtol = rtol;
  o.atol_theta = atol_theta_rad;
  o.samples_per_period = static_cast<int>(samples_per_period);
  o.contact_threshold = contact_threshold_m;
  return o;
}

double ExperimentConfig::scaled_fixed_omega() const {
  return kTwoPi * (f0_Hz + desk_scale * (fixed_f_Hz - f0_Hz));
}

std::vector<double> ExperimentConfig::omega_grid() const {
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(sweep_points);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = sweep_f_start_Hz + (sweep_f_stop_Hz - sweep_f_start_Hz) * static_cast<double>(i) /
                                            static_cast<double>(n - 1);
    g.push_back(kTwoPi * (f0_Hz + desk_scale * (f - f0_Hz)));
  }
  return g;
}

}  // namespace casimir_mems
