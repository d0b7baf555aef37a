#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinch/chan.hpp"
#include "pinch/dl_ber.hpp"
#include "pinch/ul_ber.hpp"

namespace pinch {

using CostFn = std::function<double(double)>;

/// Cost sampled at x_n = n T, n = 0 .. floor(L / T).
struct SampledCurve {
  double period = 0.01;
  double length = 20.0;
  std::vector<double> values;

  double x_at(std::size_t n) const;
  /// Piecewise-linear interpolation, x clamped to [0, (size-1) T].
  double interpolate(double x) const;
};

/// Number of grid points floor(L / T) + 1, robust to L / T landing a hair below an integer.
std::size_t grid_size(double period, double length);

/// Evaluates `cost` on the uniform grid. Throws std::domain_error on a non-finite sample.
SampledCurve sample_cost(const CostFn& cost, double period, double length, int threads = 1);

/// Centered window of 2 * half_width + 1 samples, truncated at the domain edges.
struct EnvelopeSpec {
  int half_width = 10;

  int samples() const { return 2 * half_width + 1; }
  double width_m(double period) const { return samples() * period; }
};

/// out[i] = min(in[j] : |j - i| <= half_width), O(n) via a monotone deque.
std::vector<double> moving_min(std::span<const double> values, int half_width);
SampledCurve moving_min(const SampledCurve& curve, const EnvelopeSpec& env);

/// Minimizer of the piecewise-linear envelope: projected descent with central differences
/// (step T/4), started from the midpoints of the `starts` lowest flat minima of the
/// samples. The grid argmin is always one of the starts.
double minimize_envelope(const SampledCurve& envelope, int starts = 5);

struct FineTuneSpec {
  int half_count = 200;  // N
  double delta = 0.0;    // sample spacing (m)

  double span() const { return half_count * delta; }
};

struct FineTuneResult {
  double x = 0.0;
  double cost = 0.0;
};

/// Argmin of the raw cost over the 2N+1 points x_c + i delta, i = -N..N (clipped to [0, L]).
/// Ties resolve to the smaller x.
FineTuneResult fine_tune(const CostFn& cost, double center, const FineTuneSpec& spec, double length,
                         int threads = 1);

struct TracePoint {
  std::string stage;
  int start = 0;
  double x = 0.0;
  double alpha = 0.0;
  double cost = 0.0;
};

struct OptimResult {
  double x_star = 0.0;
  std::optional<double> alpha_star;
  double cost_db = 0.0;
  int restarts = 0;
  std::vector<TracePoint> trace;

  // UL only.
  double x_smoothed = 0.0;
  SampledCurve samples;
  SampledCurve envelope;
};

struct UlOptimSpec {
  double period = 0.01;
  EnvelopeSpec envelope{};
  FineTuneSpec fine_tune{};   // delta <= 0 selects lambda / 20
  int envelope_starts = 5;
  UlBerModel model = UlBerModel::kJointNoise;
  int threads = 1;
};

/// Sample -> moving minimum -> envelope descent -> fine tuning. The returned cost is never
/// above the sampled grid minimum (the grid argmin is kept as a candidate).
OptimResult optimize_ul(const SystemGeometry& geom, const UlLinkConfig& cfg, const UlOptimSpec& spec);

struct DlOptimSpec {
  int restarts = 16;
  std::uint64_t seed = 1;
  int grid_x = 41;      // coarse warm-start grid
  int grid_alpha = 21;
  int max_iterations = 400;
};

/// Joint (x, alpha) minimization of dl_cost by projected descent with backtracking from a
/// coarse-grid warm start plus `restarts` seeded uniform starts. Deterministic per seed.
OptimResult optimize_dl(const SystemGeometry& geom, const DlLinkConfig& cfg, const DlOptimSpec& spec);

}  // namespace pinch
