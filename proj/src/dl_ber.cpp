#include "pinch/dl_ber.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "pinch/qfunc.hpp"

namespace pinch {

namespace {

// Symbolic endpoint c1 g1 + c2 g2, or +-inf; `value` is its position at unit P_T |h|.
struct Endpoint {
  bool infinite = false;
  int c1 = 0;
  int c2 = 0;
  double value = 0.0;
};

Endpoint make_endpoint(int c1, int c2, const AxisGains& unit) {
  return {false, c1, c2, c1 * unit.g1 + c2 * unit.g2};
}

Endpoint minus_infinity() { return {true, 0, 0, -std::numeric_limits<double>::infinity()}; }
Endpoint plus_infinity() { return {true, 0, 0, std::numeric_limits<double>::infinity()}; }

// One cell of the receiver's partition of the real axis.
struct Cell {
  Endpoint lo;
  Endpoint hi;
  int own_level;
};

int slice_scaled(double y, double gain, int m) {
  if (gain > 0.0) return slice_axis(y / gain, m);
  return y >= 0.0 ? m - 1 : -(m - 1);
}

std::vector<Cell> receiver_cells(const DlLinkConfig& cfg, int ue) {
  const AxisGains unit = axis_gains(cfg, 1.0);
  const int strong = direct_user(cfg.alpha);
  const int m_strong = levels_per_axis(strong == 1 ? cfg.m1 : cfg.m2);
  const int m_weak = levels_per_axis(strong == 1 ? cfg.m2 : cfg.m1);
  // Endpoint with `s` units of the strong gain and `w` units of the weak gain.
  auto at = [&](int s, int w) {
    return strong == 1 ? make_endpoint(s, w, unit) : make_endpoint(w, s, unit);
  };

  std::vector<Cell> cells;
  for (int j = 0; j < m_strong; ++j) {
    const int strong_level = 2 * j - (m_strong - 1);
    const Endpoint s_lo = j == 0 ? minus_infinity() : at(2 * j - m_strong, 0);
    const Endpoint s_hi = j == m_strong - 1 ? plus_infinity() : at(2 * j + 2 - m_strong, 0);
    if (ue == strong) {
      cells.push_back({s_lo, s_hi, strong_level});
      continue;
    }
    for (int i = 0; i < m_weak; ++i) {
      const Endpoint w_lo = i == 0 ? minus_infinity() : at(strong_level, 2 * i - m_weak);
      const Endpoint w_hi = i == m_weak - 1 ? plus_infinity() : at(strong_level, 2 * i + 2 - m_weak);
      const Endpoint& lo = w_lo.value > s_lo.value ? w_lo : s_lo;
      const Endpoint& hi = w_hi.value < s_hi.value ? w_hi : s_hi;
      if (lo.value < hi.value) cells.push_back({lo, hi, 2 * i - (m_weak - 1)});
    }
  }
  return cells;
}

}  // namespace

void DlLinkConfig::validate() const {
  if (!(total_power >= 0.0) || !std::isfinite(total_power)) {
    throw std::invalid_argument("DL total power must be finite and >= 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(sigma > 0.0)) throw std::invalid_argument("noise sigma must be > 0");
  validate_order(m1);
  validate_order(m2);
}

int direct_user(double alpha) { return alpha >= 0.5 ? 1 : 2; }

AxisGains axis_gains(const DlLinkConfig& cfg, double channel_magnitude) {
  const double amp = std::sqrt(cfg.total_power) * channel_magnitude;
  return {amp * std::sqrt(cfg.alpha / cfg.nu1()), amp * std::sqrt((1.0 - cfg.alpha) / cfg.nu2())};
}

AxisDecision dl_receiver_decision(double y_bar, const AxisGains& gains, const DlLinkConfig& cfg, int ue) {
  if (ue != 1 && ue != 2) throw std::invalid_argument("UE index must be 1 or 2");
  const int strong = direct_user(cfg.alpha);
  const double g_strong = strong == 1 ? gains.g1 : gains.g2;
  const double g_weak = strong == 1 ? gains.g2 : gains.g1;
  const int m_strong = levels_per_axis(strong == 1 ? cfg.m1 : cfg.m2);
  const int m_weak = levels_per_axis(strong == 1 ? cfg.m2 : cfg.m1);
  const int strong_level = slice_scaled(y_bar, g_strong, m_strong);
  if (ue == strong) return {strong_level, strong_level};
  return {strong_level, slice_scaled(y_bar - g_strong * strong_level, g_weak, m_weak)};
}

ErrorIntervals generate_error_intervals(const DlLinkConfig& cfg, int ue) {
  cfg.validate();
  if (ue != 1 && ue != 2) throw std::invalid_argument("UE index must be 1 or 2");
  const int m1 = levels_per_axis(cfg.m1);
  const int m2 = levels_per_axis(cfg.m2);
  const int m_own = ue == 1 ? m1 : m2;
  const int bits = bits_per_axis(ue == 1 ? cfg.m1 : cfg.m2);
  const std::vector<Cell> cells = receiver_cells(cfg, ue);

  // I and Q are mirror images of each other (label(l, I) = label(-l, Q)), so the
  // Q axis alone gives the average over both.
  ErrorIntervals out;
  out.ue = ue;
  out.denominator = std::int64_t{m1} * m2 * bits;
  for (int l1 = -(m1 - 1); l1 <= m1 - 1; l1 += 2) {
    for (int l2 = -(m2 - 1); l2 <= m2 - 1; l2 += 2) {
      const std::uint32_t sent = axis_label(ue == 1 ? l1 : l2, m_own, Axis::kQuadrature);
      for (const Cell& cell : cells) {
        const std::uint32_t got = axis_label(cell.own_level, m_own, Axis::kQuadrature);
        const int wrong_bits = std::popcount(sent ^ got);
        if (wrong_bits == 0) continue;
        out.intervals.push_back({l1, l2, cell.lo.infinite, cell.hi.infinite, cell.lo.c1, cell.lo.c2,
                                 cell.hi.c1, cell.hi.c2, wrong_bits});
      }
    }
  }
  return out;
}

QCoefficients generate_q_coefficients(const DlLinkConfig& cfg, int ue) {
  const ErrorIntervals errs = generate_error_intervals(cfg, ue);
  const AxisGains unit = axis_gains(cfg, 1.0);
  std::map<std::pair<int, int>, std::int64_t> table;
  // A zero-gain component does not enter any argument; dropping it merges equal terms.
  auto key = [&](int a1, int a2) {
    return std::pair{unit.g1 == 0.0 ? 0 : a1, unit.g2 == 0.0 ? 0 : a2};
  };
  auto add = [&](int a1, int a2, std::int64_t w) { table[key(a1, a2)] += w; };
  for (const ErrorInterval& e : errs.intervals) {
    // P(lo <= mu + n < hi) in terms of Q with arguments (endpoint - mu), or the mirrored
    // form (mu - endpoint) for cells wholly below the mean so no term is close to 1.
    const int lo1 = e.lo_c1 - e.l1, lo2 = e.lo_c2 - e.l2;
    const int hi1 = e.hi_c1 - e.l1, hi2 = e.hi_c2 - e.l2;
    if (e.lo_infinite && e.hi_infinite) {
      add(0, 0, 2 * e.weight_num);  // 2 Q(0) = 1
    } else if (e.lo_infinite) {
      add(-hi1, -hi2, e.weight_num);
    } else if (e.hi_infinite) {
      add(lo1, lo2, e.weight_num);
    } else if (hi1 * unit.g1 + hi2 * unit.g2 <= 0.0) {
      add(-hi1, -hi2, e.weight_num);
      add(-lo1, -lo2, -e.weight_num);
    } else {
      add(lo1, lo2, e.weight_num);
      add(hi1, hi2, -e.weight_num);
    }
  }
  QCoefficients out;
  out.ue = ue;
  out.denominator = errs.denominator;
  for (const auto& [k, w] : table) {
    if (w != 0) out.terms.push_back({k.first, k.second, w});
  }
  return out;
}

double QCoefficients::weight_sum() const {
  std::int64_t num = 0;
  for (const QTerm& t : terms) num += t.weight_num;
  return double(num) / double(denominator);
}

double QCoefficients::evaluate(const AxisGains& gains, double sigma) const {
  std::vector<double> parts;
  parts.reserve(terms.size());
  for (const QTerm& t : terms) {
    parts.push_back(weight(t) * q_function((t.a1 * gains.g1 + t.a2 * gains.g2) / sigma));
  }
  return pairwise_sum(parts);
}

double ErrorIntervals::log_evaluate(const AxisGains& gains, double sigma) const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(intervals.size());
  const double log_den = std::log(double(denominator));
  for (const ErrorInterval& e : intervals) {
    const double lo = e.lo_infinite ? -kInf : ((e.lo_c1 - e.l1) * gains.g1 + (e.lo_c2 - e.l2) * gains.g2) / sigma;
    const double hi = e.hi_infinite ? kInf : ((e.hi_c1 - e.l1) * gains.g1 + (e.hi_c2 - e.l2) * gains.g2) / sigma;
    logs.push_back(std::log(double(e.weight_num)) - log_den + log_gaussian_interval(lo, hi));
  }
  return log_sum_exp(logs);
}

double dl_ber_at(int ue, double channel_magnitude, const DlLinkConfig& cfg) {
  return generate_q_coefficients(cfg, ue).evaluate(axis_gains(cfg, channel_magnitude), cfg.sigma);
}

double dl_ber(int k, double x, double alpha, const SystemGeometry& geom, const DlLinkConfig& cfg) {
  DlLinkConfig c = cfg;
  c.alpha = alpha;
  return dl_ber_at(k, effective_channel(geom, k, x).magnitude(), c);
}

double dl_cost(double x, double alpha, const SystemGeometry& geom, const DlLinkConfig& cfg) {
  DlLinkConfig c = cfg;
  c.alpha = alpha;
  std::array<double, 2> logs{};
  for (int k = 1; k <= 2; ++k) {
    const double mag = effective_channel(geom, k, x).magnitude();
    logs[k - 1] = generate_error_intervals(c, k).log_evaluate(axis_gains(c, mag), c.sigma);
  }
  return 10.0 * log_sum_exp(logs) / std::numbers::ln10;
}

}  // namespace pinch
