#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"

namespace pinch::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Non-finite analytic result or failed self-check (exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  int threads = 1;
};

struct CommandOutput {
  CsvTable table;
  std::string report;  // human-readable summary for stdout
};

const std::vector<std::string>& command_names();

/// Runs one subcommand. Throws ConfigError, NumericalError, std::domain_error.
CommandOutput run_command(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace pinch::cli
