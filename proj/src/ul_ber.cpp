#include "pinch/ul_ber.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pinch/qfunc.hpp"

namespace pinch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

constexpr std::array<Residual, 9> kResiduals = {{
    {0, 0}, {2, 0}, {-2, 0}, {0, 2}, {0, -2}, {2, 2}, {2, -2}, {-2, 2}, {-2, -2}}};

// Received amplitudes and relative rotation theta = angle(h1) - angle(h2).
struct UlFrame {
  double amp1;                 // sqrt(P1) |h1|
  double amp2;                 // sqrt(P2) |h2|
  std::complex<double> rot;    // e^{j theta}
  double sigma;

  // Noise-free UE-1-derotated observation for (s1, s2).
  std::complex<double> ue1_mean(const GraySymbol& s1, const GraySymbol& s2) const {
    return amp1 * s1.point() + amp2 * std::conj(rot) * s2.point();
  }
  // Noise-free UE-2-derotated observation after subtracting the reconstruction of c.
  std::complex<double> ue2_mean(const GraySymbol& s2, const Residual& r) const {
    return amp2 * s2.point() + amp1 * rot * r.value();
  }
};

UlFrame make_frame(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg) {
  cfg.validate();
  if (!(h1.magnitude() > 0.0)) throw std::invalid_argument("UE 1 channel has zero magnitude");
  if (!(h2.magnitude() > 0.0)) throw std::invalid_argument("UE 2 channel has zero magnitude");
  const double theta = reduce_turns(h1.phase_turns() - h2.phase_turns());
  return {std::sqrt(cfg.p1) * h1.magnitude(), std::sqrt(cfg.p2) * h2.magnitude(),
          std::polar(1.0, theta), cfg.sigma};
}

void require_qpsk(const GraySymbol& s) {
  if (s.order != 4) throw std::invalid_argument("uplink symbols must be QPSK");
}

// log Pr(s1_hat = c | s1, s2) and the matching half-lines of the UE-1-frame noise.
struct DetectionRegion {
  HalfLine u;
  HalfLine v;
  double log_prob;
};

DetectionRegion detection_region(const UlFrame& f, const GraySymbol& c, const GraySymbol& s1,
                                 const GraySymbol& s2) {
  const std::complex<double> mu = f.ue1_mean(s1, s2) / f.sigma;
  // s1_hat_I = +1 iff mu_I + a >= 0.
  const HalfLine u{-mu.real(), c.i_level > 0};
  const HalfLine v{-mu.imag(), c.q_level > 0};
  return {u, v, log_q_function(-c.i_level * mu.real()) + log_q_function(-c.q_level * mu.imag())};
}

// Log-probabilities of the two UE-2 bit errors jointly with s1_hat = c.
std::array<double, 2> log_joint_ue2_errors(const UlFrame& f, const DetectionRegion& region,
                                           const GraySymbol& s2, const Residual& r) {
  const std::complex<double> nu = f.ue2_mean(s2, r) / f.sigma;
  const double cs = f.rot.real();
  const double sn = f.rot.imag();
  // UE-2-frame noise = (a + jb) e^{j theta}: Re = a cos - b sin, Im = a sin + b cos.
  const double si = s2.i_level;
  const double sq = s2.q_level;
  return {log_quadrant_halfplane_prob(region.u, region.v, si * cs, -si * sn, -si * nu.real()),
          log_quadrant_halfplane_prob(region.u, region.v, sq * sn, sq * cs, -sq * nu.imag())};
}

// Same pair under the unconditioned-noise approximation.
std::array<double, 2> log_closed_form_ue2_errors(const UlFrame& f, const GraySymbol& s2,
                                                 const Residual& r) {
  const std::complex<double> nu = f.ue2_mean(s2, r) / f.sigma;
  return {log_q_function(s2.i_level * nu.real()), log_q_function(s2.q_level * nu.imag())};
}

double log_half_line(HalfLine h) {
  return h.upper ? log_q_function(h.bound) : log_q_function(-h.bound);
}

double log_normal_pdf(double u) {
  return -0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

void UlLinkConfig::validate() const {
  if (!(p1 >= 0.0) || !(p2 >= 0.0) || !std::isfinite(p1) || !std::isfinite(p2)) {
    throw std::invalid_argument("uplink powers must be finite and >= 0");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("noise sigma must be > 0");
}

std::span<const Residual> residual_set() { return kResiduals; }

Residual residual_of(const GraySymbol& s1, const GraySymbol& detected) {
  return {s1.i_level - detected.i_level, s1.q_level - detected.q_level};
}

double ber1_conditional(const GraySymbol& s1, const GraySymbol& s2, const ComplexAmp& h1,
                        const ComplexAmp& h2, const UlLinkConfig& cfg) {
  require_qpsk(s1);
  require_qpsk(s2);
  const UlFrame f = make_frame(h1, h2, cfg);
  const std::complex<double> interference = f.amp2 * std::conj(f.rot) * s2.point();
  const double mu_i = f.amp1 + s1.i_level * interference.real();
  const double mu_q = f.amp1 + s1.q_level * interference.imag();
  return 0.5 * (q_function(mu_i / f.sigma) + q_function(mu_q / f.sigma));
}

double ber1(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg) {
  std::array<double, 16> terms{};
  std::size_t n = 0;
  for (const GraySymbol& s1 : qpsk_alphabet()) {
    for (const GraySymbol& s2 : qpsk_alphabet()) terms[n++] = ber1_conditional(s1, s2, h1, h2, cfg);
  }
  return pairwise_sum(terms) / 16.0;
}

double s1hat_detection_prob(const GraySymbol& c, const GraySymbol& s1, const GraySymbol& s2,
                            const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg) {
  require_qpsk(c);
  require_qpsk(s1);
  require_qpsk(s2);
  const UlFrame f = make_frame(h1, h2, cfg);
  const std::complex<double> mu = f.ue1_mean(s1, s2);
  return q_function(-c.i_level * mu.real() / f.sigma) * q_function(-c.q_level * mu.imag() / f.sigma);
}

double residual_prob(const Residual& r, const GraySymbol& s2, const ComplexAmp& h1,
                     const ComplexAmp& h2, const UlLinkConfig& cfg) {
  std::vector<double> terms;
  for (const GraySymbol& s1 : qpsk_alphabet()) {
    for (const GraySymbol& c : qpsk_alphabet()) {
      if (residual_of(s1, c) == r) terms.push_back(s1hat_detection_prob(c, s1, s2, h1, h2, cfg));
    }
  }
  return pairwise_sum(terms) / 4.0;
}

double ber2_conditional(const GraySymbol& s2, const Residual& r, const ComplexAmp& h1,
                        const ComplexAmp& h2, const UlLinkConfig& cfg) {
  require_qpsk(s2);
  const UlFrame f = make_frame(h1, h2, cfg);
  const std::complex<double> leak = f.amp1 * f.rot * r.value();
  const double mu_i = f.amp2 + s2.i_level * leak.real();
  const double mu_q = f.amp2 + s2.q_level * leak.imag();
  return 0.5 * (q_function(mu_i / f.sigma) + q_function(mu_q / f.sigma));
}

double ber2(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg) {
  std::vector<double> terms;
  terms.reserve(36);
  for (const GraySymbol& s2 : qpsk_alphabet()) {
    for (const Residual& r : residual_set()) {
      terms.push_back(residual_prob(r, s2, h1, h2, cfg) * ber2_conditional(s2, r, h1, h2, cfg));
    }
  }
  return pairwise_sum(terms) / 4.0;
}

double ber2_conditional_exact(const GraySymbol& s2, const Residual& r, const ComplexAmp& h1,
                              const ComplexAmp& h2, const UlLinkConfig& cfg) {
  require_qpsk(s2);
  const UlFrame f = make_frame(h1, h2, cfg);
  std::vector<double> log_joint;
  std::vector<double> log_marginal;
  for (const GraySymbol& s1 : qpsk_alphabet()) {
    for (const GraySymbol& c : qpsk_alphabet()) {
      if (!(residual_of(s1, c) == r)) continue;
      const DetectionRegion region = detection_region(f, c, s1, s2);
      const auto errs = log_joint_ue2_errors(f, region, s2, r);
      log_joint.push_back(errs[0]);
      log_joint.push_back(errs[1]);
      log_marginal.push_back(region.log_prob);
    }
  }
  const double denom = log_sum_exp(log_marginal);
  if (denom == kNegInf) return std::numeric_limits<double>::quiet_NaN();
  return 0.5 * std::exp(log_sum_exp(log_joint) - denom);
}

double ber2_exact(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg) {
  return std::exp(ul_log_bers(h1, h2, cfg, UlBerModel::kJointNoise).ue2);
}

double log_quadrant_halfplane_prob(HalfLine u, HalfLine v, double p, double q, double r) {
  // Integrate over the variable with the smaller half-plane coefficient so the inner
  // bound moves at most at unit slope.
  if (std::abs(p) > std::abs(q)) {
    std::swap(u, v);
    std::swap(p, q);
  }
  if (q == 0.0) {
    // Degenerate half-plane 0 < r.
    return r > 0.0 ? log_half_line(u) + log_half_line(v) : kNegInf;
  }
  if (p == 0.0) {
    // Half-plane acts on v only; u and v decouple.
    const double t = r / q;
    double lo = v.upper ? v.bound : -std::numeric_limits<double>::infinity();
    double hi = v.upper ? std::numeric_limits<double>::infinity() : v.bound;
    if (q > 0.0) hi = std::min(hi, t); else lo = std::max(lo, t);
    return log_half_line(u) + log_gaussian_interval(lo, hi);
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto inner_bounds = [&](double a) {
    const double t = (r - p * a) / q;
    double lo = v.upper ? v.bound : -kInf;
    double hi = v.upper ? kInf : v.bound;
    if (q > 0.0) hi = std::min(hi, t); else lo = std::max(lo, t);
    return std::pair{lo, hi};
  };
  auto log_integrand = [&](double a) {
    const auto [lo, hi] = inner_bounds(a);
    return log_normal_pdf(a) + log_gaussian_interval(lo, hi);
  };

  // Outer domain: U, restricted to where the inner interval can be non-empty.
  double lo = u.upper ? u.bound : -kInf;
  double hi = u.upper ? kInf : u.bound;
  const double kink = (r - q * v.bound) / p;
  const bool opposed = (v.upper && q > 0.0) || (!v.upper && q < 0.0);
  if (opposed) {
    // Non-empty iff p a < r - q V0.
    if (p > 0.0) hi = std::min(hi, kink); else lo = std::max(lo, kink);
  }
  if (!(hi > lo)) return kNegInf;

  // Finite window holding all but a negligible part of the (log-concave) mass.
  constexpr double kSpan = 40.0;
  if (lo == -kInf) lo = std::min(hi, 0.0) - kSpan;
  if (hi == kInf) hi = std::max(lo, 0.0) + kSpan;

  // Golden-section search for the mode of the log-concave integrand.
  constexpr double kGolden = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = log_integrand(x1);
  double f2 = log_integrand(x2);
  for (int it = 0; it < 30 && (b - a) > 1e-6 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + kGolden * (b - a); f2 = log_integrand(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - kGolden * (b - a); f1 = log_integrand(x1);
    }
  }
  const double mode = 0.5 * (a + b);
  const double peak = std::max({log_integrand(mode), log_integrand(lo), log_integrand(hi), f1, f2});
  if (peak == kNegInf) return kNegInf;

  // Trim the window to where the integrand exceeds exp(-60) of its peak.
  constexpr double kDrop = 60.0;
  auto trim = [&](double inside, double outside) {
    if (log_integrand(outside) >= peak - kDrop) return outside;
    for (int it = 0; it < 24; ++it) {
      const double mid = 0.5 * (inside + outside);
      (log_integrand(mid) >= peak - kDrop ? inside : outside) = mid;
    }
    return outside;
  };
  const double left = trim(std::clamp(mode, lo, hi), lo);
  const double right = trim(std::clamp(mode, lo, hi), hi);

  auto scaled = [&](double t) {
    const double g = log_integrand(t);
    return g == kNegInf ? 0.0 : std::exp(g - peak);
  };
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  if (kink > left && kink < right) {
    total += Integrator::integrate(scaled, left, kink, 12, 1e-13);
    total += Integrator::integrate(scaled, kink, right, 12, 1e-13);
  } else if (right > left) {
    total += Integrator::integrate(scaled, left, right, 12, 1e-13);
  }
  return total > 0.0 ? peak + std::log(total) : kNegInf;
}

UlBers ul_log_bers(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg,
                   UlBerModel model) {
  const UlFrame f = make_frame(h1, h2, cfg);
  std::array<double, 32> ue1_terms{};
  std::size_t n1 = 0;
  for (const GraySymbol& s1 : qpsk_alphabet()) {
    for (const GraySymbol& s2 : qpsk_alphabet()) {
      const std::complex<double> mu = f.ue1_mean(s1, s2) / f.sigma;
      // Error of s1's I/Q bit = detection of the opposite sign on that axis.
      ue1_terms[n1++] = log_q_function(s1.i_level * mu.real());
      ue1_terms[n1++] = log_q_function(s1.q_level * mu.imag());
    }
  }
  const double norm = std::log(32.0);
  const double log_ber1 = log_sum_exp(ue1_terms) - norm;

  // UE 2: terms for (s1, s2, c) and (-s1, -s2, -c) are equal (the whole picture is
  // point-symmetric and the noise is circular), so only s2 in the right half-plane is
  // visited and every term counts twice.
  struct Pending {
    DetectionRegion region;
    GraySymbol s2;
    Residual r;
    double bound;  // upper bound on log of the pair of joint terms
  };
  std::array<Pending, 32> pending{};
  std::array<double, 64> ue2_terms{};
  std::size_t np = 0;
  std::size_t n2 = 0;
  for (const GraySymbol& s2 : qpsk_alphabet()) {
    if (s2.i_level < 0) continue;
    for (const GraySymbol& s1 : qpsk_alphabet()) {
      for (const GraySymbol& c : qpsk_alphabet()) {
        const DetectionRegion region = detection_region(f, c, s1, s2);
        const Residual r = residual_of(s1, c);
        const auto closed = log_closed_form_ue2_errors(f, s2, r);
        if (model == UlBerModel::kClosedForm) {
          ue2_terms[n2++] = region.log_prob + closed[0];
          ue2_terms[n2++] = region.log_prob + closed[1];
        } else {
          // joint <= min(Pr(quadrant), Pr(half-plane)) for each bit; the half-plane
          // marginal is exactly the closed-form term's Q factor.
          const double b = std::max(std::min(region.log_prob, closed[0]),
                                    std::min(region.log_prob, closed[1]));
          pending[np++] = {region, s2, r, b + std::log(2.0)};
        }
      }
    }
  }
  if (model == UlBerModel::kJointNoise) {
    std::sort(pending.begin(), pending.begin() + np,
              [](const Pending& a, const Pending& b) { return a.bound > b.bound; });
    // Terms whose bound sits 40 nats (1e-17) below the running total cannot change it.
    double running = kNegInf;
    for (std::size_t i = 0; i < np; ++i) {
      if (pending[i].bound < running - 40.0) break;
      const auto errs = log_joint_ue2_errors(f, pending[i].region, pending[i].s2, pending[i].r);
      ue2_terms[n2++] = errs[0];
      ue2_terms[n2++] = errs[1];
      const std::array<double, 3> acc = {running, errs[0], errs[1]};
      running = log_sum_exp(acc);
    }
  }
  return {log_ber1, log_sum_exp(std::span<const double>(ue2_terms.data(), n2)) - std::log(16.0)};
}

UlBers ul_bers(const ComplexAmp& h1, const ComplexAmp& h2, const UlLinkConfig& cfg,
               UlBerModel model) {
  if (model == UlBerModel::kClosedForm) return {ber1(h1, h2, cfg), ber2(h1, h2, cfg)};
  return {ber1(h1, h2, cfg), ber2_exact(h1, h2, cfg)};
}

double ul_cost(double x, const SystemGeometry& geom, const UlLinkConfig& cfg, UlBerModel model) {
  const ComplexAmp h1 = effective_channel(geom, 1, x);
  const ComplexAmp h2 = effective_channel(geom, 2, x);
  const UlBers logs = ul_log_bers(h1, h2, cfg, model);
  const std::array<double, 2> both = {logs.ue1, logs.ue2};
  return 10.0 * log_sum_exp(both) / std::numbers::ln10;
}

}  // namespace pinch
