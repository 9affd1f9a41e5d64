#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "casimir_mems/cli.hpp"
#include "casimir_mems/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Casimir-force MEMS oscillator toolkit"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string default_out;
  app.add_option("--write-default-config", default_out, "Write the paper parameter set to FILE and exit");

  std::vector<CLI::App*> subs;
  for (auto name : casimir_mems::kSubcommands) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("-c,--config", config_path, "Config file (key = value); defaults to the paper set");
    sub->add_option("--set", overrides, "Override one key: --set key=value (repeatable)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (!default_out.empty()) {
    std::ofstream f(default_out);
    f << casimir_mems::format_config(casimir_mems::default_paper_config());
    if (!f) {
      std::cerr << "error: io: cannot write " << default_out << '\n';
      return 1;
    }
    return 0;
  }
  for (auto* sub : subs) {
    if (!*sub) continue;
    std::optional<std::filesystem::path> path;
    if (!config_path.empty()) path = config_path;
    return casimir_mems::run(sub->get_name(), path, overrides, std::cout, std::cerr);
  }
  std::cerr << app.help();
  return 2;
}
