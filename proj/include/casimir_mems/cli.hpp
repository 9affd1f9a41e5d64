#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "casimir_mems/config.hpp"

namespace casimir_mems {

inline constexpr std::string_view kSubcommands[] = {
    "potential", "equilibria", "shift", "kappa", "response", "freq-sweep", "dist-sweep", "fit", "synth"};

bool is_subcommand(std::string_view name) noexcept;

struct ManifestEntry {
  std::string path;  // relative to output_dir
  std::size_t rows = 0;
};

struct RunReport {
  std::string subcommand;
  ExperimentConfig config;
  std::vector<std::pair<std::string, std::string>> derived;
  std::vector<ManifestEntry> manifest;
  std::vector<std::pair<std::string, double>> timings;  // seconds
  std::vector<std::string> warnings;

  /// Value of a derived quantity, if present.
  std::optional<std::string> find(std::string_view key) const;
};

/// Report text: derived quantities, warnings, manifest and the config echo
/// (`config.<key> = value`). Timings are kept out so repeated runs are
/// byte-identical; see format_timings.
std::string format_report(const RunReport& report);
std::string format_timings(const RunReport& report);

/// Recovers the config echoed in a report.
ExperimentConfig config_from_report(std::string_view report_text);

/// Runs one experiment, writing CSVs, `<prefix><subcommand>_report.txt` and
/// `<prefix><subcommand>_timing.txt` under config.output_dir.
RunReport run_experiment(std::string_view subcommand, const ExperimentConfig& config);

/// Full command path: load config, apply overrides, run. Errors become one
/// line `error: <code>: <message>` on `err` and a nonzero return.
int run(std::string_view subcommand, const std::optional<std::filesystem::path>& config_path,
        std::span<const std::string> overrides, std::ostream& out, std::ostream& err);

}  // namespace casimir_mems
