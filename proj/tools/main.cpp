#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "commands.hpp"
#include "config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace pinch::cli;

  CLI::App app{"Pinching-antenna NOMA BER analysis, simulation and placement optimization"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (INI)")->required();
    sub->add_option("--out", out_path, "output CSV path (overrides [output] path)");
    sub->add_option("--seed", seed, "RNG seed (overrides [sim] seed)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.override_seed(*seed);
    const std::string path = out_path.empty() ? cfg.output_path : out_path;
    if (path.empty()) throw ConfigError("no output path: pass --out or set [output] path");

    const CommandOutput result = run_command(command, cfg, RunOptions{threads});
    result.table.write(path);
    std::cout << result.report;
    std::cout << "wrote " << result.table.row_count() << " rows to " << path << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
