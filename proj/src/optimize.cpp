#include "pinch/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

#include "pinch/parallel.hpp"
#include "pinch/simulate.hpp"

namespace pinch {

std::size_t grid_size(double period, double length) {
  if (!(period > 0.0) || !(length >= 0.0)) throw std::invalid_argument("grid: need T > 0 and L >= 0");
  return static_cast<std::size_t>(std::floor(length / period + 1e-9)) + 1;
}

double SampledCurve::x_at(std::size_t n) const { return static_cast<double>(n) * period; }

double SampledCurve::interpolate(double x) const {
  if (values.empty()) throw std::logic_error("interpolate on an empty curve");
  const double last = x_at(values.size() - 1);
  x = std::clamp(x, 0.0, last);
  const double pos = x / period;
  const auto i = std::min(static_cast<std::size_t>(pos), values.size() - 1);
  if (i + 1 >= values.size()) return values.back();
  const double t = pos - static_cast<double>(i);
  return values[i] + t * (values[i + 1] - values[i]);
}

SampledCurve sample_cost(const CostFn& cost, double period, double length, int threads) {
  SampledCurve curve{period, length, std::vector<double>(grid_size(period, length))};
  parallel_for(curve.values.size(), threads, [&](std::size_t n) {
    const double v = cost(curve.x_at(n));
    if (!std::isfinite(v)) {
      throw std::domain_error("cost is not finite at x = " + std::to_string(curve.x_at(n)));
    }
    curve.values[n] = v;
  });
  return curve;
}

std::vector<double> moving_min(std::span<const double> values, int half_width) {
  if (half_width < 0) throw std::invalid_argument("moving_min: negative window");
  const std::size_t n = values.size();
  const auto h = static_cast<std::size_t>(half_width);
  std::vector<double> out(n);
  std::deque<std::size_t> window;  // indices with strictly increasing values
  std::size_t pushed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t right = std::min(n - 1, i + h);
    for (; pushed <= right; ++pushed) {
      while (!window.empty() && values[window.back()] >= values[pushed]) window.pop_back();
      window.push_back(pushed);
    }
    while (window.front() + h < i) window.pop_front();
    out[i] = values[window.front()];
  }
  return out;
}

SampledCurve moving_min(const SampledCurve& curve, const EnvelopeSpec& env) {
  return {curve.period, curve.length, moving_min(curve.values, env.half_width)};
}

namespace {

// Flat local minima of a sampled curve, as index ranges [first, last].
struct FlatMinimum {
  std::size_t first;
  std::size_t last;
  double value;
};

std::vector<FlatMinimum> flat_minima(const std::vector<double>& v) {
  std::vector<FlatMinimum> out;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const bool left_ok = i == 0 || v[i - 1] > v[i];
    const bool right_ok = j + 1 == v.size() || v[j + 1] > v[i];
    if (left_ok && right_ok) out.push_back({i, j, v[i]});
    i = j + 1;
  }
  std::sort(out.begin(), out.end(), [](const FlatMinimum& a, const FlatMinimum& b) {
    return a.value != b.value ? a.value < b.value : a.first < b.first;
  });
  return out;
}

// 1-D projected descent with backtracking on f over [lo, hi].
double descend_1d(const CostFn& f, double x, double lo, double hi, double fd_step, double initial_step) {
  double fx = f(x);
  double step = initial_step;
  for (int it = 0; it < 500; ++it) {
    const double xp = std::min(x + fd_step, hi);
    const double xm = std::max(x - fd_step, lo);
    if (!(xp > xm)) break;
    const double grad = (f(xp) - f(xm)) / (xp - xm);
    if (grad == 0.0) break;
    bool moved = false;
    while (step > 1e-12) {
      const double xn = std::clamp(x - std::copysign(step, grad), lo, hi);
      const double fn = f(xn);
      if (xn != x && fn <= fx - 1e-4 * std::abs(grad) * std::abs(xn - x)) {
        x = xn;
        fx = fn;
        step *= 2.0;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace

double minimize_envelope(const SampledCurve& envelope, int starts) {
  if (envelope.values.empty()) throw std::invalid_argument("minimize_envelope: empty curve");
  const double hi = envelope.x_at(envelope.values.size() - 1);
  const CostFn f = [&](double x) { return envelope.interpolate(x); };
  const std::vector<FlatMinimum> minima = flat_minima(envelope.values);

  double best_x = envelope.x_at(minima.front().first);
  double best_f = minima.front().value;
  const std::size_t count = std::min<std::size_t>(minima.size(), static_cast<std::size_t>(std::max(starts, 1)));
  for (std::size_t s = 0; s < count; ++s) {
    const double start = 0.5 * (envelope.x_at(minima[s].first) + envelope.x_at(minima[s].last));
    const double x = descend_1d(f, start, 0.0, hi, envelope.period / 4.0, envelope.period);
    const double fx = f(x);
    if (fx < best_f || (fx == best_f && s == 0) || (fx == best_f && x < best_x)) {
      best_x = x;
      best_f = fx;
    }
  }
  return best_x;
}

FineTuneResult fine_tune(const CostFn& cost, double center, const FineTuneSpec& spec, double length,
                         int threads) {
  if (spec.half_count < 0 || !(spec.delta > 0.0)) throw std::invalid_argument("fine_tune: need N >= 0, delta > 0");
  const std::size_t n = 2 * static_cast<std::size_t>(spec.half_count) + 1;
  std::vector<double> xs(n);
  std::vector<double> fs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double offset = (static_cast<double>(i) - spec.half_count) * spec.delta;
    xs[i] = std::clamp(center + offset, 0.0, length);
  }
  parallel_for(n, threads, [&](std::size_t i) { fs[i] = cost(xs[i]); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (fs[i] < fs[best] || (fs[i] == fs[best] && xs[i] < xs[best])) best = i;
  }
  return {xs[best], fs[best]};
}

OptimResult optimize_ul(const SystemGeometry& geom, const UlLinkConfig& cfg, const UlOptimSpec& spec) {
  geom.validate();
  cfg.validate();
  const double lambda = geom.wavelength();
  if (!(spec.period > 0.0 && spec.period < lambda)) {
    throw std::invalid_argument("sampling period must satisfy 0 < T < lambda");
  }
  if (spec.envelope.width_m(spec.period) < 5.0 * lambda) {
    throw std::invalid_argument("envelope window must span at least 5 wavelengths");
  }
  FineTuneSpec ft = spec.fine_tune;
  if (!(ft.delta > 0.0)) ft.delta = lambda / 20.0;
  if (ft.delta > lambda / 10.0) throw std::invalid_argument("fine-tune spacing must be <= lambda / 10");

  const CostFn cost = [&](double x) { return ul_cost(x, geom, cfg, spec.model); };
  OptimResult out;
  out.samples = sample_cost(cost, spec.period, geom.length, spec.threads);
  out.envelope = moving_min(out.samples, spec.envelope);
  out.x_smoothed = minimize_envelope(out.envelope, spec.envelope_starts);
  out.trace.push_back({"envelope", 0, out.x_smoothed, 0.0, out.envelope.interpolate(out.x_smoothed)});

  const FineTuneResult tuned = fine_tune(cost, out.x_smoothed, ft, geom.length, spec.threads);
  out.trace.push_back({"fine_tune", 0, tuned.x, 0.0, tuned.cost});
  out.x_star = tuned.x;
  out.cost_db = tuned.cost;

  const auto& v = out.samples.values;
  const auto grid_best = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  out.trace.push_back({"grid_argmin", 0, out.samples.x_at(grid_best), 0.0, v[grid_best]});
  if (v[grid_best] < out.cost_db) {
    out.x_star = out.samples.x_at(grid_best);
    out.cost_db = v[grid_best];
  }
  return out;
}

OptimResult optimize_dl(const SystemGeometry& geom, const DlLinkConfig& cfg, const DlOptimSpec& spec) {
  geom.validate();
  cfg.validate();
  if (spec.restarts < 0 || spec.grid_x < 2 || spec.grid_alpha < 2) {
    throw std::invalid_argument("optimize_dl: invalid restart/grid settings");
  }
  const double length = geom.length;
  // Unit box z = (x / L, alpha).
  auto f = [&](const std::array<double, 2>& z) { return dl_cost(z[0] * length, z[1], geom, cfg); };
  const std::array<double, 2> fd = {geom.wavelength() / 100.0 / length, 1e-4};

  OptimResult out;
  auto better = [](double fa, const std::array<double, 2>& a, double fb, const std::array<double, 2>& b) {
    if (fa != fb) return fa < fb;
    return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
  };

  auto descend = [&](std::array<double, 2> z, int start_index) {
    double fz = f(z);
    double step = 0.05;
    out.trace.push_back({"start", start_index, z[0] * length, z[1], fz});
    for (int it = 0; it < spec.max_iterations; ++it) {
      std::array<double, 2> g{};
      for (int i = 0; i < 2; ++i) {
        std::array<double, 2> zp = z, zm = z;
        zp[i] = std::min(z[i] + fd[i], 1.0);
        zm[i] = std::max(z[i] - fd[i], 0.0);
        g[i] = (f(zp) - f(zm)) / (zp[i] - zm[i]);
      }
      const double norm = std::hypot(g[0], g[1]);
      if (!(norm > 0.0)) break;
      bool moved = false;
      while (step > 1e-10) {
        std::array<double, 2> zn{};
        for (int i = 0; i < 2; ++i) zn[i] = std::clamp(z[i] - step * g[i] / norm, 0.0, 1.0);
        const double decrease = g[0] * (z[0] - zn[0]) + g[1] * (z[1] - zn[1]);
        if (decrease <= 0.0) {
          step *= 0.5;
          continue;
        }
        const double fn = f(zn);
        if (fn <= fz - 1e-4 * decrease) {
          z = zn;
          fz = fn;
          step = std::min(2.0 * step, 0.5);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      out.trace.push_back({"iterate", start_index, z[0] * length, z[1], fz});
    }
    return std::pair{z, fz};
  };

  // Coarse grid warm start.
  std::array<double, 2> warm{0.0, 0.0};
  double warm_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.grid_x; ++i) {
    for (int j = 0; j < spec.grid_alpha; ++j) {
      const std::array<double, 2> z = {double(i) / (spec.grid_x - 1), double(j) / (spec.grid_alpha - 1)};
      const double v = f(z);
      if (better(v, z, warm_f, warm)) {
        warm = z;
        warm_f = v;
      }
    }
  }
  auto [best_z, best_f] = descend(warm, 0);

  CounterRng rng(spec.seed, 0x0D1ULL);
  for (int r = 1; r <= spec.restarts; ++r) {
    const std::array<double, 2> z0 = {1.0 - rng.uniform_open0(), 1.0 - rng.uniform_open0()};
    const auto [z, fz] = descend(z0, r);
    if (better(fz, z, best_f, best_z)) {
      best_z = z;
      best_f = fz;
    }
  }
  out.x_star = best_z[0] * length;
  out.alpha_star = best_z[1];
  out.cost_db = best_f;
  out.restarts = spec.restarts;
  out.trace.push_back({"best", -1, out.x_star, *out.alpha_star, best_f});
  return out;
}

}  // namespace pinch
