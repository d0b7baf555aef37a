// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero on failure.
#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pinch/chan.hpp"
#include "pinch/dl_ber.hpp"
#include "pinch/optimize.hpp"
#include "pinch/qfunc.hpp"
#include "pinch/simulate.hpp"
#include "pinch/ul_ber.hpp"

using namespace pinch;

namespace {

constexpr double kTol = 1e-9;  // dB slack for "<=" comparisons between costs
const std::vector<double> kUlPowersDbm = {-20, -15, -10, -5, 0, 5};
const std::vector<double> kDlPowersDbm = {-10, -5, 0, 5, 10, 15, 20};
constexpr double kSigma = 1e-6;  // -90 dBm per real dimension

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::printf("%s [%d] %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void info(const std::string& what) {
  std::printf("INFO %s\n", what.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

SystemGeometry geometry() {
  SystemGeometry g;
  g.length = 20.0;
  g.height = 3.0;
  g.ue = {Point2{3.0, -1.0}, Point2{18.0, 3.0}};
  g.carrier_hz = 28e9;
  g.kappa_db_per_m = 0.1;
  g.n_eff = 1.4;
  return g;
}

UlLinkConfig ul_link(double dbm) { return {watts(dbm), watts(dbm), kSigma}; }

DlLinkConfig dl_link(double dbm, double alpha) {
  DlLinkConfig c;
  c.total_power = watts(dbm);
  c.alpha = alpha;
  c.m1 = 4;
  c.m2 = 16;
  c.sigma = kSigma;
  return c;
}

double se_ratio(double analytic, const BitErrorCount& c) {
  const double se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(c.bits));
  const double diff = std::abs(c.estimate() - analytic);
  if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / se;
}

// Same deviation against the symbol-level standard error, which is empirical and so falls
// back to the binomial one when the run saw (almost) no errors.
double symbol_se_ratio(double analytic, const BitErrorCount& c) {
  const double binomial = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(c.bits));
  const double se = std::max(c.symbol_standard_error(), binomial);
  const double diff = std::abs(c.estimate() - analytic);
  if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / se;
}

double ul_avg_db(double x, const SystemGeometry& g, const UlLinkConfig& c) {
  return ul_cost(x, g, c) - 10.0 * std::log10(2.0);
}

struct UlOptimum {
  double dbm;
  OptimResult result;
};

struct DlOptimum {
  double dbm;
  OptimResult result;
};

// Single-user Gray M-QAM BER by adaptive quadrature of the Gaussian density over each
// decision interval (thresholds at even multiples of the level gain).
double single_user_qam_ber(int order, double gain, double sigma) {
  const int m = levels_per_axis(order);
  const int bits = bits_per_axis(order);
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (Axis axis : {Axis::kInPhase, Axis::kQuadrature}) {
    for (int tx = -(m - 1); tx <= m - 1; tx += 2) {
      const double mu = tx * gain;
      const auto sent = axis_label(tx, m, axis);
      for (int j = 0; j < m; ++j) {
        const int level = 2 * j - (m - 1);
        const int wrong = std::popcount(sent ^ axis_label(level, m, axis));
        if (!wrong) continue;
        double lo = j == 0 ? -std::numeric_limits<double>::infinity() : (2 * j - m) * gain;
        double hi = j == m - 1 ? std::numeric_limits<double>::infinity() : (2 * j + 2 - m) * gain;
        lo = std::max(lo, mu - 40.0 * sigma);
        hi = std::min(hi, mu + 40.0 * sigma);
        if (!(hi > lo)) continue;
        const auto pdf = [&](double y) {
          const double z = (y - mu) / sigma;
          return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
        };
        total += wrong * gauss_kronrod<double, 61>::integrate(pdf, lo, hi, 15, 1e-15);
      }
    }
  }
  return total / (2.0 * m * bits);
}

}  // namespace

int main() {
  const SystemGeometry g = geometry();

  // ---- UL optimization at every tested power (shared by criteria 1, 3, 5, 6) ----------
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<UlOptimum> ul_opt;
  for (double p : kUlPowersDbm) ul_opt.push_back({p, optimize_ul(g, ul_link(p), UlOptimSpec{})});

  // ---- 1. UL analytic vs simulation ---------------------------------------------------
  {
    SimSpec spec;
    spec.n_symbols = 1'000'000;
    double worst = 0.0, worst_closed = 0.0, worst_symbol = 0.0;
    int points = 0;
    for (const UlOptimum& o : ul_opt) {
      for (double x : {o.result.x_star, 10.5, 3.0}) {
        const UlLinkConfig c = ul_link(o.dbm);
        const ComplexAmp h1 = effective_channel(g, 1, x);
        const ComplexAmp h2 = effective_channel(g, 2, x);
        spec.seed = 1000 + points;
        const SimResult sim = simulate_ul(spec, h1, h2, c);
        const UlBers b = ul_bers(h1, h2, c);
        worst = std::max({worst, se_ratio(b.ue1, sim.ue[0]), se_ratio(b.ue2, sim.ue[1])});
        worst_symbol = std::max({worst_symbol, symbol_se_ratio(b.ue1, sim.ue[0]), symbol_se_ratio(b.ue2, sim.ue[1])});
        worst_closed = std::max(worst_closed, se_ratio(ber2(h1, h2, c), sim.ue[1]));
        ++points;
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, worst <= 3.0 && secs < 300.0,
           fmt("UL analytic vs simulation: max |diff|/SE = %.2f over %d points x 2 UEs, 1e6 symbols each, "
               "%.1f s incl. optimization",
               worst, points, secs));
    info(fmt("UL max |diff| against the symbol-level SE: %.2f", worst_symbol));
    info(fmt("UL UE-2 closed-form (unconditioned-noise) expression deviates from simulation by up to %.1f SE "
             "on the same grid; the exact joint-noise evaluation is used above",
             worst_closed));
  }

  // ---- DL optimization at every tested power (shared by criteria 2, 4, 5, 10) ---------
  std::vector<DlOptimum> dl_opt;
  for (double p : kDlPowersDbm) dl_opt.push_back({p, optimize_dl(g, dl_link(p, 0.9), DlOptimSpec{})});

  // ---- 2. DL analytic vs simulation ---------------------------------------------------
  {
    SimSpec spec;
    spec.n_symbols = 1'000'000;
    double worst = 0.0, worst_symbol = 0.0;
    std::string worst_at;
    int points = 0;
    for (const DlOptimum& o : dl_opt) {
      const double xs = o.result.x_star;
      const double as = *o.result.alpha_star;
      for (auto [x, alpha] : {std::pair{xs, as}, std::pair{10.0, 0.9}, std::pair{xs, 0.5}}) {
        const DlLinkConfig c = dl_link(o.dbm, alpha);
        spec.seed = 2000 + points;
        const SimResult sim = simulate_dl(spec, effective_channel(g, 1, x), effective_channel(g, 2, x), c);
        for (int k = 1; k <= 2; ++k) {
          const double p = dl_ber(k, x, alpha, g, c);
          const double z = se_ratio(p, sim.ue[k - 1]);
          if (z > worst) {
            worst = z;
            worst_at = fmt("%g dBm, x=%.3f, alpha=%.3f, UE %d", o.dbm, x, alpha, k);
          }
          worst_symbol = std::max(worst_symbol, symbol_se_ratio(p, sim.ue[k - 1]));
        }
        ++points;
      }
    }
    report(2, worst <= 3.0,
           fmt("DL analytic vs simulation (M1=4, M2=16): max |diff|/SE = %.2f (at %s) over %d points x 2 UEs, "
               "1e6 symbols each",
               worst, worst_at.c_str(), points));
    info(fmt("DL max |diff| against the symbol-level SE: %.2f", worst_symbol));
  }

  // ---- 3. UL error floor vs optimized placement ---------------------------------------
  {
    const std::vector<double> steps = {-20, -10, 0, 10};
    std::vector<double> mid, best;
    for (double p : steps) {
      mid.push_back(ul_avg_db(10.5, g, ul_link(p)));
      best.push_back(optimize_ul(g, ul_link(p), UlOptimSpec{}).cost_db - 10.0 * std::log10(2.0));
    }
    // Smallest start index from which every later 10 dB step shows the floor at x = 10.5
    // and a > 5 dB drop at x*.
    int from = -1;
    for (int s = static_cast<int>(steps.size()) - 2; s >= 0; --s) {
      const bool floor = mid[s] - mid[s + 1] < 0.5;
      const bool drops = best[s] - best[s + 1] > 5.0;
      if (!(floor && drops)) break;
      from = s;
    }
    std::string detail;
    for (std::size_t s = 0; s + 1 < steps.size(); ++s) {
      detail += fmt(" %g->%g dBm: x=10.5 %.2f dB, x* %.2f dB;", steps[s], steps[s + 1], mid[s] - mid[s + 1],
                    best[s] - best[s + 1]);
    }
    report(3, from >= 0,
           fmt("UL error floor at x=10.5 vs optimized x* (avg BER decrease per +10 dB):%s floor region from %g dBm",
               detail.c_str(), from >= 0 ? steps[from] : std::nan("")));
  }

  // ---- 4. DL equal-power floor --------------------------------------------------------
  {
    const DlOptimum& hi = dl_opt.back();
    const double xs = hi.result.x_star;
    std::string detail;
    bool pass = false;
    for (double p : {10.0, 20.0}) {
      const double a1 = dl_ber(1, xs, 0.5, g, dl_link(p, 0.5));
      const double b1 = dl_ber(1, xs, 0.5, g, dl_link(p + 10.0, 0.5));
      const double a2 = dl_ber(2, xs, 0.5, g, dl_link(p, 0.5));
      const double b2 = dl_ber(2, xs, 0.5, g, dl_link(p + 10.0, 0.5));
      const double d1 = std::abs(10.0 * std::log10(a1 / b1));
      const double d2 = std::abs(10.0 * std::log10(a2 / b2));
      pass = pass || std::min(d1, d2) < 0.1;
      detail += fmt(" %g->%g dBm: UE1 %.4f dB, UE2 %.2f dB;", p, p + 10.0, d1, d2);
    }
    report(4, pass, fmt("DL alpha=0.5 at x*=%.3f, BER change per +10 dB:%s", xs, detail.c_str()));
  }

  // ---- 5. Optimizer dominance ---------------------------------------------------------
  {
    bool pass = true;
    double margin_ul = std::numeric_limits<double>::infinity();
    double margin_dl = std::numeric_limits<double>::infinity();
    for (const UlOptimum& o : ul_opt) {
      for (double x : {3.0, 10.5}) {
        const double m = ul_cost(x, g, ul_link(o.dbm)) - o.result.cost_db;
        margin_ul = std::min(margin_ul, m);
        pass = pass && m >= -kTol;
      }
    }
    for (const DlOptimum& o : dl_opt) {
      const DlLinkConfig c = dl_link(o.dbm, 0.5);
      for (auto [x, alpha] : {std::pair{10.0, 0.9}, std::pair{o.result.x_star, 0.5}}) {
        const double m = dl_cost(x, alpha, g, c) - o.result.cost_db;
        margin_dl = std::min(margin_dl, m);
        pass = pass && m >= -kTol;
      }
    }
    report(5, pass,
           fmt("optimizer dominance at every tested power: min UL margin %.3f dB vs x in {3, 10.5}, "
               "min DL margin %.3f dB vs (10, 0.9) and (x*, 0.5)",
               margin_ul, margin_dl));
  }

  // ---- 6. Placement direction ---------------------------------------------------------
  {
    const double d_mid = ue_pa_distance(g, 1, 10.5);
    bool pass = true;
    std::string xs;
    for (const UlOptimum& o : ul_opt) {
      pass = pass && ue_pa_distance(g, 1, o.result.x_star) < d_mid;
      xs += fmt(" %g dBm: %.3f;", o.dbm, o.result.x_star);
    }
    const double d_low = ue_pa_distance(g, 1, ul_opt.front().result.x_star);
    const double d_high = ue_pa_distance(g, 1, ul_opt.back().result.x_star);
    pass = pass && d_low < d_high;
    report(6, pass,
           fmt("UL x* on UE 1's side of the midpoint and closer to UE 1 at low power (x*:%s dist to UE1 "
               "%.3f m at %g dBm vs %.3f m at %g dBm)",
               xs.c_str(), d_low, kUlPowersDbm.front(), d_high, kUlPowersDbm.back()));
  }

  // ---- 7. Probability normalization ---------------------------------------------------
  {
    std::mt19937_64 gen(20240607);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int orders[][2] = {{4, 4}, {4, 16}, {16, 4}, {16, 16}, {4, 64}};
    double worst_r = 0.0, worst_c = 0.0, worst_q = 0.0;
    const int configs = 1000;
    for (int i = 0; i < configs; ++i) {
      const ComplexAmp h1(1e-3 + u(gen), u(gen));
      const ComplexAmp h2(1e-3 + u(gen), u(gen));
      const UlLinkConfig c{3.0 * u(gen), 3.0 * u(gen), 0.02 + u(gen)};
      const auto& a = qpsk_alphabet();
      for (const GraySymbol& s2 : a) {
        double sr = 0.0;
        for (const Residual& r : residual_set()) sr += residual_prob(r, s2, h1, h2, c);
        worst_r = std::max(worst_r, std::abs(sr - 1.0));
        for (const GraySymbol& s1 : a) {
          double sc = 0.0;
          for (const GraySymbol& cand : a) sc += s1hat_detection_prob(cand, s1, s2, h1, h2, c);
          worst_c = std::max(worst_c, std::abs(sc - 1.0));
        }
      }
      DlLinkConfig d;
      d.m1 = orders[i % 5][0];
      d.m2 = orders[i % 5][1];
      d.alpha = u(gen);
      for (int k = 1; k <= 2; ++k) worst_q = std::max(worst_q, std::abs(generate_q_coefficients(d, k).weight_sum() - 1.0));
    }
    report(7, worst_r <= 1e-12 && worst_c <= 1e-12 && worst_q <= 1e-12,
           fmt("normalization over %d random configurations: max |sum-1| residual %.1e, detection %.1e, "
               "Q weights %.1e",
               configs, worst_r, worst_c, worst_q));
  }

  // ---- 8. Reduction identities --------------------------------------------------------
  {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_ul = 0.0;
    for (int i = 0; i < 200; ++i) {
      const ComplexAmp h1(0.01 + u(gen), u(gen));
      const ComplexAmp h2(0.01 + u(gen), u(gen));
      const UlLinkConfig c{0.1 + 2.0 * u(gen), 0.0, 0.05 + u(gen)};
      const double ref = q_function(std::sqrt(c.p1) * h1.magnitude() / c.sigma);
      for (UlBerModel m : {UlBerModel::kJointNoise, UlBerModel::kClosedForm}) {
        worst_ul = std::max(worst_ul, std::abs(ul_bers(h1, h2, c, m).ue1 - ref));
      }
    }
    double worst_dl = 0.0;
    for (int order : {4, 16, 64}) {
      for (double snr : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        for (double alpha : {0.0, 1.0}) {
          DlLinkConfig c;
          c.m1 = order;
          c.m2 = order;
          c.alpha = alpha;
          c.total_power = 1.0;
          c.sigma = 1.0 / snr;
          const int ue = alpha == 1.0 ? 1 : 2;
          const double mag = 0.9;
          const AxisGains gains = axis_gains(c, mag);
          const double gain = ue == 1 ? gains.g1 : gains.g2;
          worst_dl = std::max(worst_dl, std::abs(dl_ber_at(ue, mag, c) - single_user_qam_ber(order, gain, c.sigma)));
        }
      }
    }
    report(8, worst_ul <= 1e-12 && worst_dl <= 1e-10,
           fmt("reductions: P2=0 UL BER vs Q(sqrt(P1)|h1|/sigma) max err %.1e; alpha in {0,1} DL BER vs "
               "quadrature single-user Gray QAM max err %.1e",
               worst_ul, worst_dl));
  }

  // ---- 9. Envelope / erosion suite ----------------------------------------------------
  {
    bool pass = moving_min(std::vector<double>{5, 1, 4, 4, 4, 0, 9}, 1) == std::vector<double>{1, 1, 1, 4, 0, 0, 0};
    std::mt19937_64 gen(9);
    std::normal_distribution<double> z(0.0, 1.0);
    int curves = 0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> v(1 + trial * 5);
      for (auto& e : v) e = z(gen);
      for (int h : {1, 3, 10}) {
        const auto once = moving_min(v, h);
        const auto wider = moving_min(v, h + 2);
        for (std::size_t i = 0; i < v.size(); ++i) pass = pass && once[i] <= v[i] && wider[i] <= once[i];
        for (std::size_t i = 0; i < v.size(); ++i) {
          double m = v[i];
          for (std::size_t j = (i >= std::size_t(h) ? i - h : 0); j <= std::min(v.size() - 1, i + h); ++j) {
            m = std::min(m, v[j]);
          }
          pass = pass && once[i] == m;
        }
        pass = pass && moving_min(once, h) == moving_min(v, 2 * h);
        ++curves;
      }
    }
    report(9, pass,
           fmt("envelope: hand vector, domination, window monotonicity, brute-force equality and double "
               "application = window 2w-1 on %d random curves (exact)",
               curves));
  }

  // ---- 10. DL smoothness vs UL ripple -------------------------------------------------
  {
    const double dx = 1e-3;
    const std::size_t n = grid_size(dx, g.length);
    double dl_jump = 0.0;
    for (const DlOptimum& o : dl_opt) {
      for (double alpha : {0.9, *o.result.alpha_star}) {
        const DlLinkConfig c = dl_link(o.dbm, alpha);
        double prev = dl_cost(0.0, alpha, g, c);
        for (std::size_t i = 1; i < n; ++i) {
          const double cur = dl_cost(i * dx, alpha, g, c);
          dl_jump = std::max(dl_jump, std::abs(cur - prev));
          prev = cur;
        }
      }
    }
    const UlLinkConfig c = ul_link(0.0);
    double ul_jump = 0.0, at = 0.0;
    double prev = ul_cost(0.0, g, c);
    for (std::size_t i = 1; i < n; ++i) {
      const double cur = ul_cost(i * dx, g, c);
      if (std::abs(cur - prev) > ul_jump) {
        ul_jump = std::abs(cur - prev);
        at = i * dx;
      }
      prev = cur;
    }
    report(10, dl_jump < 0.1 && ul_jump > 3.0,
           fmt("1 mm grid: max adjacent |dcost| DL %.4f dB (alpha 0.9 and alpha*, all DL powers), UL %.2f dB at "
               "x=%.3f (0 dBm)",
               dl_jump, ul_jump, at));
  }

  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
