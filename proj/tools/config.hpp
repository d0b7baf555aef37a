#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinch/chan.hpp"
#include "pinch/optimize.hpp"
#include "pinch/ul_ber.hpp"

namespace pinch::cli {

/// Invalid or unreadable configuration (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PowerUnit { kDbm, kDbw };
enum class NoiseInterpretation { kPerDimension, kTotal };

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double to_watts(double value, PowerUnit unit);
double to_dbm(double value, PowerUnit unit);

/// A UL placement: either the optimizer's x* or a fixed position.
struct Placement {
  bool optimized = false;
  double x = 0.0;
};

struct UlSection {
  PowerUnit unit = PowerUnit::kDbm;
  std::vector<double> powers;        // P1 = P2, in `unit`
  std::vector<double> sweep_powers;  // for ul-position-sweep
  std::vector<Placement> placements;
  UlBerModel model = UlBerModel::kJointNoise;
  bool swap_order = false;
};

struct DlSection {
  PowerUnit unit = PowerUnit::kDbm;
  std::vector<double> powers;  // P_T, in `unit`
  int m1 = 4;
  int m2 = 16;
  double reference_x = 10.0;
  double reference_alpha = 0.9;
  double equal_alpha = 0.5;
  double surface_power = 10.0;
  int surface_nx = 201;
  int surface_nalpha = 101;
};

struct NoiseSection {
  double power = -90.0;
  PowerUnit unit = PowerUnit::kDbm;
  NoiseInterpretation interpretation = NoiseInterpretation::kPerDimension;

  /// Per-real-dimension noise standard deviation.
  double sigma() const;
};

struct SimSection {
  std::uint64_t n_symbols = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t chunk = 1U << 16;
  std::string scenario = "ul";
  double x = 10.5;
  double alpha = 0.9;
  double power = 0.0;  // in the scenario's power unit
};

struct OptimizeSection {
  double period = 0.01;
  int half_width = 10;
  int fine_half_count = 200;
  double fine_delta = 0.0;  // 0 selects lambda / 20
  int envelope_starts = 5;
  int restarts = 16;
  int grid_x = 41;
  int grid_alpha = 21;
  int max_iterations = 400;
};

struct ExperimentConfig {
  SystemGeometry geometry;
  UlSection ul;
  DlSection dl;
  NoiseSection noise;
  SimSection sim;
  OptimizeSection optimize;
  std::string output_path;

  /// Every recognized key as written, plus command-line overrides, sorted.
  std::map<std::string, std::string> entries;

  void override_seed(std::uint64_t seed);
  /// Canonical "section.key = value" text used for the provenance hash.
  std::string canonical_text() const;
  /// FNV-1a 64 of canonical_text(), as 16 hex digits.
  std::string hash() const;

  UlOptimSpec ul_optim_spec(int threads) const;
  DlOptimSpec dl_optim_spec() const;
};

ExperimentConfig parse_config(std::istream& in, const std::string& source);
ExperimentConfig load_config(const std::string& path);

}  // namespace pinch::cli
