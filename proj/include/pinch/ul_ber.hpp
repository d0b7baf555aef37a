#pragma once

#include <array>
#include <span>

#include "pinch/chan.hpp"
#include "pinch/constellation.hpp"

namespace pinch {

/// Uplink powers in watts; `sigma` is the per-real-dimension noise std, n ~ CN(0, 2 sigma^2).
struct UlLinkConfig {
  double p1 = 1.0;
  double p2 = 1.0;
  double sigma = 1.0;

  void validate() const;
};

/// Which evaluation of the UE-2 BER to use.
///
/// kClosedForm evaluates each BER_2|s2,R term with unconditioned Gaussian noise. That
/// neglects the fact that the noise sample which produced s1_hat is the one left after
/// SIC, so it is an approximation. kJointNoise integrates the 2-D noise over the joint
/// (s1_hat = c, UE-2 bit error) region and is exact for the SIC receiver.
enum class UlBerModel { kClosedForm, kJointNoise };

/// Residual interference s1 - s1_hat; components in {-2, 0, 2}.
struct Residual {
  int re = 0;
  int im = 0;

  std::complex<double> value() const { return {double(re), double(im)}; }
  friend bool operator==(const Residual&, const Residual&) = default;
};

/// The nine residual values {0, +-2, +-2j, +-2+-2j}.
std::span<const Residual> residual_set();
Residual residual_of(const GraySymbol& s1, const GraySymbol& detected);

// ---- UE 1 (decoded first, UE 2 treated as noise) -------------------------------------

double ber1_conditional(const GraySymbol& s1, const GraySymbol& s2, const ComplexAmp& h1,
                        const ComplexAmp& h2, const UlLinkConfig& cfg);
double ber1(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg);

// ---- UE 2 (after imperfect SIC) ---------------------------------------------------------

/// Pr(s1_hat = c | s1, s2) from the per-axis sign detector on the UE-1-derotated signal.
double s1hat_detection_prob(const GraySymbol& c, const GraySymbol& s1, const GraySymbol& s2,
                            const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg);

/// Pr(R = r | s2), averaged over equiprobable s1.
double residual_prob(const Residual& r, const GraySymbol& s2, const ComplexAmp& h1,
                     const ComplexAmp& h2, const UlLinkConfig& cfg);

/// Closed-form BER_2|s2,R (noise treated as unconditioned).
double ber2_conditional(const GraySymbol& s2, const Residual& r, const ComplexAmp& h1,
                        const ComplexAmp& h2, const UlLinkConfig& cfg);
/// Closed-form BER_2 = 1/4 sum_s2 sum_r Pr(r | s2) BER_2|s2,r.
double ber2(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg);

/// Exact BER of UE 2 conditioned on the transmitted s2 and the realized residual r.
/// Returns NaN when Pr(R = r | s2) underflows to zero.
double ber2_conditional_exact(const GraySymbol& s2, const Residual& r, const ComplexAmp& h1,
                              const ComplexAmp& h2, const UlLinkConfig& cfg);
/// Exact BER of UE 2 for the sign-detect / subtract / sign-detect receiver.
double ber2_exact(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg);

/// log P(u in U, v in V, p u + q v < r) for independent standard normals u, v, where U and
/// V are half-lines. Used for the joint (s1_hat, UE-2 error) events.
struct HalfLine {
  double bound = 0.0;
  bool upper = true;  // true: [bound, inf), false: (-inf, bound)
};
double log_quadrant_halfplane_prob(HalfLine u, HalfLine v, double p, double q, double r);

struct UlBers {
  double ue1 = 0.0;
  double ue2 = 0.0;
};

UlBers ul_bers(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg,
               UlBerModel model = UlBerModel::kJointNoise);

/// Natural logs of both BERs, computed without underflow.
UlBers ul_log_bers(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg,
                   UlBerModel model = UlBerModel::kJointNoise);

/// f(x) = 10 log10(BER_1(x) + BER_2(x)) in dB, evaluated in the log domain.
double ul_cost(double x, const SystemGeometry& geom, const UlLinkConfig& cfg,
               UlBerModel model = UlBerModel::kJointNoise);

}  // namespace pinch
