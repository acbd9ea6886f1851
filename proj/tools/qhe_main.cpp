#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qhe/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"four-level quantum heat engine: steady states, ergotropy, flux and power"};
  app.require_subcommand(1);

  std::optional<std::filesystem::path> config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> out_dir;
  std::optional<std::string> variant;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override a config value, dotted path: --set params.p_h=0.3");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--variant", variant, "generator variant")
      ->check(CLI::IsMember({"trace_conserving", "verbatim"}));

  app.add_subcommand("steady", "solve the steady state and print the ergotropy report")
      ->fallthrough();
  app.add_subcommand("evolve", "integrate the master equation and write a trajectory CSV")
      ->fallthrough();
  app.add_subcommand("sweep", "scan a parameter, write sweep CSV and crossovers JSON")
      ->fallthrough();
  app.add_subcommand("figures", "generate the canonical figure bundle (CSV + SVG + manifest)")
      ->fallthrough();
  app.add_subcommand("verify", "run the oracle verification suites")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return qhe::exit_config_error;
  }

  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const qhe::RunConfig cfg =
        qhe::load_config(command, config_path, overrides, out_dir, variant);
    if (command == "steady") return qhe::cmd_steady(cfg, std::cout, std::cerr);
    if (command == "evolve") return qhe::cmd_evolve(cfg, std::cout, std::cerr);
    if (command == "sweep") return qhe::cmd_sweep(cfg, std::cout, std::cerr);
    if (command == "figures") return qhe::cmd_figures(cfg, std::cout, std::cerr);
    if (command == "verify") return qhe::cmd_verify(cfg, std::cout, std::cerr);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return qhe::exit_config_error;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return qhe::exit_config_error;
  } catch (const qhe::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return qhe::exit_numeric_error;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return qhe::exit_numeric_error;
  }
  return qhe::exit_config_error;
}
