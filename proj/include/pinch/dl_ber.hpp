#pragma once

#include <cstdint>
#include <vector>

#include "pinch/chan.hpp"
#include "pinch/constellation.hpp"

namespace pinch {

/// Downlink superposition s = sqrt(P_T) (sqrt(alpha/nu1) s1 + sqrt((1-alpha)/nu2) s2).
struct DlLinkConfig {
  double total_power = 1.0;  // P_T, W
  double alpha = 0.9;        // share of P_T given to UE 1
  int m1 = 4;                // modulation order of UE 1
  int m2 = 16;               // modulation order of UE 2
  double sigma = 1.0;        // per-dimension noise std at each UE

  double nu1() const { return norm_factor(m1); }
  double nu2() const { return norm_factor(m2); }
  void validate() const;
};

/// The UE with the larger power share is detected directly; the other one runs SIC.
/// alpha = 0.5 resolves to UE 1 as the direct (strong) user.
int direct_user(double alpha);

/// Per-axis amplitudes of a unit level of s1 and s2 after derotation at a UE with
/// channel magnitude |h|: g1 = sqrt(P_T) |h| sqrt(alpha/nu1), g2 likewise.
struct AxisGains {
  double g1 = 0.0;
  double g2 = 0.0;
};
AxisGains axis_gains(const DlLinkConfig& cfg, double channel_magnitude);

/// Level decisions on one quadrature axis of the derotated DL observation.
struct AxisDecision {
  int strong_level = 0;  // level of the direct user's symbol
  int own_level = 0;     // level of the requested UE's symbol
};

/// Reference receiver on one real axis at UE `ue`. The direct user's level is sliced with
/// thresholds on even multiples of its gain. If `ue` is the SIC user, the sliced
/// reconstruction is subtracted and its own level is sliced from the remainder. A zero
/// gain slices by sign only (upper outermost level on ties).
AxisDecision dl_receiver_decision(double y_bar, const AxisGains& gains, const DlLinkConfig& cfg, int ue);

/// Single Q term of the expansion: weight * Q((a1 g1 + a2 g2) / sigma).
struct QTerm {
  int a1 = 0;
  int a2 = 0;
  std::int64_t weight_num = 0;  // c = weight_num / denominator

  friend bool operator==(const QTerm&, const QTerm&) = default;
};

struct QCoefficients {
  int ue = 1;
  std::int64_t denominator = 1;
  std::vector<QTerm> terms;  // sorted by (a1, a2), merged, non-zero weights

  double weight(const QTerm& t) const { return double(t.weight_num) / double(denominator); }
  /// Sum of c_q; exactly 1 for any valid configuration.
  double weight_sum() const;
  /// BER for the given per-axis gains and noise std.
  double evaluate(const AxisGains& gains, double sigma) const;
};

/// Decision interval [lo, hi) in which the receiver decides a wrong bit, for one
/// transmitted axis pair (l1, l2). Endpoints are c1 g1 + c2 g2 or infinite.
struct ErrorInterval {
  int l1 = 0;
  int l2 = 0;
  bool lo_infinite = false;
  bool hi_infinite = false;
  int lo_c1 = 0, lo_c2 = 0;
  int hi_c1 = 0, hi_c2 = 0;
  std::int64_t weight_num = 0;
};

struct ErrorIntervals {
  int ue = 1;
  std::int64_t denominator = 1;
  std::vector<ErrorInterval> intervals;

  /// log BER, evaluated as a sum of positive interval probabilities (no underflow).
  double log_evaluate(const AxisGains& gains, double sigma) const;
};

/// Enumerates the receiver's bit-error intervals. The interval layout depends on alpha
/// (through the ratio g2/g1) and the modulation orders, not on P_T, |h| or sigma.
ErrorIntervals generate_error_intervals(const DlLinkConfig& cfg, int ue);

/// Expands the error intervals into the merged signed Q-function sum.
QCoefficients generate_q_coefficients(const DlLinkConfig& cfg, int ue);

/// BER of UE k for a PA at x (uses only |h_k(x)|). `alpha` overrides cfg.alpha.
double dl_ber(int k, double x, double alpha, const SystemGeometry& geom, const DlLinkConfig& cfg);

/// BER of UE `ue` given its channel magnitude.
double dl_ber_at(int ue, double channel_magnitude, const DlLinkConfig& cfg);

/// 10 log10(BER_1 + BER_2) in dB, computed in the log domain.
double dl_cost(double x, double alpha, const SystemGeometry& geom, const DlLinkConfig& cfg);

}  // namespace pinch
