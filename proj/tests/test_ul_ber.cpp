#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "pinch/qfunc.hpp"
#include "pinch/simulate.hpp"
#include "pinch/ul_ber.hpp"

using namespace pinch;

namespace {

struct Instance {
  ComplexAmp h1;
  ComplexAmp h2;
  UlLinkConfig cfg;
};

// Random link with UE 1 received stronger and BERs in a range Monte Carlo can resolve.
Instance random_instance(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> phase(-0.5, 0.5);
  std::uniform_real_distribution<double> mag2(0.25, 0.7);
  std::uniform_real_distribution<double> snr(1.5, 4.0);
  Instance in;
  in.h1 = ComplexAmp(1.0, phase(gen));
  in.h2 = ComplexAmp(mag2(gen), phase(gen));
  in.cfg = {1.0, 1.0, 1.0 / snr(gen)};
  return in;
}

bool within_3se(double analytic, const BitErrorCount& c) {
  const double se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(c.bits));
  return std::abs(c.estimate() - analytic) <= 3.0 * se;
}

// Brute-force 2-D midpoint rule for P(u in U, v in V, p u + q v < r).
double quadrant_halfplane_bruteforce(HalfLine u, HalfLine v, double p, double q, double r) {
  const double lim = 9.0;
  const int n = 3000;
  const double du = 2.0 * lim / n;
  const double norm = 1.0 / (2.0 * 3.14159265358979323846);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = -lim + (i + 0.5) * du;
    if (u.upper ? a < u.bound : a >= u.bound) continue;
    for (int j = 0; j < n; ++j) {
      const double b = -lim + (j + 0.5) * du;
      if (v.upper ? b < v.bound : b >= v.bound) continue;
      if (p * a + q * b < r) total += std::exp(-0.5 * (a * a + b * b));
    }
  }
  return total * norm * du * du;
}

}  // namespace

TEST_CASE("interference-free reductions") {
  const ComplexAmp h1(0.8, 0.13L);
  const ComplexAmp h2(0.5, -0.41L);
  for (double sigma : {0.2, 0.5, 1.0}) {
    const UlLinkConfig only1{2.0, 0.0, sigma};
    const double q1 = q_function(std::sqrt(2.0) * 0.8 / sigma);
    CHECK(std::abs(ber1(h1, h2, only1) - q1) < 1e-12);
    for (const auto& s1 : qpsk_alphabet()) {
      for (const auto& s2 : qpsk_alphabet()) CHECK(std::abs(ber1_conditional(s1, s2, h1, h2, only1) - q1) < 1e-12);
    }
    const UlLinkConfig only2{0.0, 1.5, sigma};
    const double q2 = q_function(std::sqrt(1.5) * 0.5 / sigma);
    CHECK(std::abs(ber2(h1, h2, only2) - q2) < 1e-12);
    CHECK(std::abs(ber2_exact(h1, h2, only2) - q2) < 1e-12);
    const UlLinkConfig both{1.0, 1.0, sigma};
    for (const auto& s2 : qpsk_alphabet()) {
      CHECK(std::abs(ber2_conditional(s2, Residual{0, 0}, h1, h2, both) - q_function(0.5 / sigma)) < 1e-12);
    }
  }
}

TEST_CASE("large-noise limits") {
  const ComplexAmp h1(0.8, 0.13L);
  const ComplexAmp h2(0.5, -0.41L);
  const UlLinkConfig cfg{1.0, 1.0, 1e12};
  CHECK(ber1(h1, h2, cfg) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ber2(h1, h2, cfg) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ber2_exact(h1, h2, cfg) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ul_cost(5.0, SystemGeometry{.ue = {Point2{3, -1}, Point2{18, 3}}}, cfg) ==
        doctest::Approx(0.0).epsilon(1e-8));
  const auto& a = qpsk_alphabet();
  for (const auto& c : a) CHECK(s1hat_detection_prob(c, a[0], a[2], h1, h2, cfg) == doctest::Approx(0.25));
  for (const auto& r : residual_set()) {
    const int nz = (r.re != 0) + (r.im != 0);
    const double expected = nz == 0 ? 0.25 : nz == 1 ? 0.125 : 0.0625;
    CHECK(residual_prob(r, a[1], h1, h2, cfg) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("small-noise limits") {
  const ComplexAmp h1(1.0, 0.2L);
  const ComplexAmp h2(0.3, -0.1L);
  const UlLinkConfig cfg{1.0, 1.0, 1e-3};
  const auto& a = qpsk_alphabet();
  for (const auto& s1 : a) {
    CHECK(s1hat_detection_prob(s1, s1, a[3], h1, h2, cfg) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(residual_prob(Residual{0, 0}, a[2], h1, h2, cfg) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalization over random configurations") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& a = qpsk_alphabet();
  for (int trial = 0; trial < 200; ++trial) {
    const ComplexAmp h1(0.05 + u(gen), u(gen));
    const ComplexAmp h2(0.05 + u(gen), u(gen));
    const UlLinkConfig cfg{u(gen) * 3, u(gen) * 3, 0.05 + u(gen)};
    for (const auto& s2 : a) {
      double sr = 0.0;
      for (const auto& r : residual_set()) sr += residual_prob(r, s2, h1, h2, cfg);
      CHECK(std::abs(sr - 1.0) < 1e-12);
      for (const auto& s1 : a) {
        double sc = 0.0;
        for (const auto& c : a) sc += s1hat_detection_prob(c, s1, s2, h1, h2, cfg);
        CHECK(std::abs(sc - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("global phase invariance") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_instance(gen);
    const long double theta = 0.3141L * trial;
    const UlBers base = ul_bers(in.h1, in.h2, in.cfg);
    const UlBers rot = ul_bers(in.h1.rotated(theta), in.h2.rotated(theta), in.cfg);
    CHECK(std::abs(base.ue1 - rot.ue1) < 1e-12);
    CHECK(std::abs(base.ue2 - rot.ue2) < 1e-12);
    CHECK(std::abs(ber2(in.h1, in.h2, in.cfg) - ber2(in.h1.rotated(theta), in.h2.rotated(theta), in.cfg)) < 1e-12);
  }
}

TEST_CASE("BERs do not grow as the noise shrinks") {
  const ComplexAmp h1(1.0, 0.37L);
  const ComplexAmp h2(0.45, -0.11L);
  UlBers prev{1.0, 1.0};
  double prev_closed = 1.0;
  for (double sigma = 3.0; sigma > 0.05; sigma *= 0.8) {
    const UlLinkConfig cfg{1.0, 1.0, sigma};
    const UlBers b = ul_bers(h1, h2, cfg);
    CHECK(b.ue1 <= prev.ue1 + 1e-15);
    CHECK(b.ue2 <= prev.ue2 + 1e-15);
    CHECK(b.ue1 > 0.0);
    CHECK(b.ue2 > 0.0);
    CHECK(b.ue2 < 1.0);
    const double closed = ber2(h1, h2, cfg);
    CHECK(closed <= prev_closed + 1e-15);
    prev = b;
    prev_closed = closed;
  }
}

TEST_CASE("log-domain BERs match the linear ones") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_instance(gen);
    for (UlBerModel m : {UlBerModel::kClosedForm, UlBerModel::kJointNoise}) {
      const UlBers lin = ul_bers(in.h1, in.h2, in.cfg, m);
      const UlBers lg = ul_log_bers(in.h1, in.h2, in.cfg, m);
      CHECK(std::exp(lg.ue1) == doctest::Approx(lin.ue1).epsilon(1e-10));
      CHECK(std::exp(lg.ue2) == doctest::Approx(lin.ue2).epsilon(1e-9));
    }
  }
  // Deep tail stays finite.
  const UlBers deep = ul_log_bers(ComplexAmp(1.0, 0.1L), ComplexAmp(0.3, 0.2L), UlLinkConfig{1.0, 1.0, 1e-3});
  CHECK(std::isfinite(deep.ue1));
  CHECK(std::isfinite(deep.ue2));
  CHECK(deep.ue2 < -1000.0);
}

TEST_CASE("quadrant/half-plane probability against 2-D brute force") {
  struct Case {
    HalfLine u, v;
    double p, q, r;
  };
  const std::vector<Case> cases = {
      {{0.3, true}, {-0.2, false}, 0.6, -0.8, 0.4},
      {{-1.0, true}, {1.0, true}, 1.0, 0.0, 0.5},
      {{0.5, false}, {0.0, false}, -0.3, 0.95, -1.1},
      {{2.0, true}, {-1.0, true}, 0.8, 0.6, 3.0},
  };
  for (const auto& c : cases) {
    const double got = std::exp(log_quadrant_halfplane_prob(c.u, c.v, c.p, c.q, c.r));
    CHECK(got == doctest::Approx(quadrant_halfplane_bruteforce(c.u, c.v, c.p, c.q, c.r)).epsilon(2e-3));
  }
}

TEST_CASE("closed form approaches the exact model when SIC is reliable") {
  const ComplexAmp h1(1.0, 0.05L);
  const ComplexAmp h2(0.2, 0.31L);
  const UlLinkConfig cfg{1.0, 1.0, 0.08};
  CHECK(ber2(h1, h2, cfg) == doctest::Approx(ber2_exact(h1, h2, cfg)).epsilon(1e-3));
}

TEST_CASE("analytic BERs match Monte Carlo") {
  std::mt19937_64 gen(2024);
  SimSpec spec;
  spec.n_symbols = 2'000'000;
  spec.threads = 4;
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(gen);
    spec.seed = 100 + trial;
    const SimResult sim = simulate_ul(spec, in.h1, in.h2, in.cfg);
    const UlBers b = ul_bers(in.h1, in.h2, in.cfg);
    CAPTURE(trial);
    CHECK(within_3se(b.ue1, sim.ue[0]));
    CHECK(within_3se(b.ue2, sim.ue[1]));
  }
}

TEST_CASE("conditional UE-2 BER matches conditioned Monte Carlo") {
  const ComplexAmp h1(1.0, 0.21L);
  const ComplexAmp h2(0.55, -0.07L);
  const UlLinkConfig cfg{1.0, 1.0, 0.45};
  SimSpec spec;
  spec.n_symbols = 200'000;
  spec.threads = 4;
  const auto& a = qpsk_alphabet();
  int checked = 0;
  for (const GraySymbol& s2 : {a[0], a[2]}) {
    for (const auto& r : residual_set()) {
      if (residual_prob(r, s2, h1, h2, cfg) < 0.02) continue;
      const double p = ber2_conditional_exact(s2, r, h1, h2, cfg);
      const SimResult sim = simulate_ul_conditional(spec, h1, h2, cfg, s2, r, 100'000'000);
      REQUIRE(sim.symbols == spec.n_symbols);
      CAPTURE(r.re);
      CAPTURE(r.im);
      CHECK(within_3se(p, sim.ue[1]));
      ++checked;
    }
  }
  CHECK(checked >= 4);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS((UlLinkConfig{-1.0, 1.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((UlLinkConfig{1.0, 1.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(ul_bers(ComplexAmp(0.0, 0.0L), ComplexAmp(1.0, 0.0L), UlLinkConfig{}), std::invalid_argument);
  CHECK(residual_set().size() == 9);
}

TEST_CASE("ul_cost arithmetic") {
  // cost is 10 log10(BER1 + BER2): two BERs of 0.25 give -3.0103 dB.
  CHECK(10.0 * std::log10(0.25 + 0.25) == doctest::Approx(-3.0103).epsilon(1e-5));
  SystemGeometry g;
  g.ue = {Point2{3, -1}, Point2{18, 3}};
  const UlLinkConfig cfg{1e-3, 1e-3, 1e-6};
  const double x = 7.3;
  const UlBers b = ul_bers(effective_channel(g, 1, x), effective_channel(g, 2, x), cfg);
  CHECK(ul_cost(x, g, cfg) == doctest::Approx(10.0 * std::log10(b.ue1 + b.ue2)).epsilon(1e-10));
}
