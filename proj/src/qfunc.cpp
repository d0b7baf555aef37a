#include "pinch/qfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pinch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Beyond this point erfc underflows towards the subnormal range.
constexpr double kAsymptoticStart = 35.0;

// log Q(t) for t >= kAsymptoticStart via the Mills-ratio expansion.
double log_q_asymptotic(double t) {
  const double inv2 = 1.0 / (t * t);
  // 1 - 1/t^2 + 3/t^4 - 15/t^6 + 105/t^8 - 945/t^10
  const double series =
      1.0 + inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * (105.0 - 945.0 * inv2))));
  return -0.5 * t * t - std::log(t) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

}  // namespace

double q_function(double t) {
  return 0.5 * std::erfc(t / std::numbers::sqrt2);
}

double log_q_function(double t) {
  if (std::isnan(t)) return t;
  if (t < 0.0) return std::log1p(-q_function(-t));
  if (t < kAsymptoticStart) return std::log(q_function(t));
  return log_q_asymptotic(t);
}

double log_gaussian_interval(double lo, double hi) {
  if (!(hi > lo)) return kNegInf;
  if (lo >= 0.0) {
    // Both ends in the upper tail: Q(lo) - Q(hi) = Q(lo) (1 - Q(hi)/Q(lo)).
    const double a = log_q_function(lo);
    const double b = log_q_function(hi);
    return a + std::log1p(-std::exp(b - a));
  }
  if (hi <= 0.0) return log_gaussian_interval(-hi, -lo);
  // Straddles zero: erf(hi) and -erf(lo) are both non-negative.
  return std::log(0.5 * (std::erf(hi / std::numbers::sqrt2) - std::erf(lo / std::numbers::sqrt2)));
}

double log_sum_exp(std::span<const double> log_terms) {
  if (log_terms.empty()) return kNegInf;
  const double peak = *std::max_element(log_terms.begin(), log_terms.end());
  if (peak == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : log_terms) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

double pairwise_sum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double acc = 0.0;
    for (double v : terms) acc += v;
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

}  // namespace pinch
