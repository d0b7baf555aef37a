#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pinch/chan.hpp"

using namespace pinch;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

SystemGeometry reference_geometry() {
  SystemGeometry g;
  g.ue = {Point2{3.0, -1.0}, Point2{18.0, 3.0}};
  return g;
}

double wrap_diff(double a, double b) {
  double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  return std::abs(d);
}

// 50-digit reference for -2 pi (dist / lambda + x / lambda_g), reduced to (-pi, pi].
double reference_phase(const SystemGeometry& g, int k, double x) {
  const Big c = kSpeedOfLight;
  const Big f = g.carrier_hz;
  const Big dx = Big(g.ue[k - 1].x) - Big(x);
  const Big dist = sqrt(dx * dx + Big(g.ue[k - 1].y) * Big(g.ue[k - 1].y) + Big(g.height) * Big(g.height));
  Big turns = -(dist * f / c + Big(x) * Big(g.n_eff) * f / c);
  turns -= round(turns);
  return static_cast<double>(turns * 2 * boost::math::constants::pi<Big>());
}

}  // namespace

TEST_CASE("ue_pa_distance") {
  const SystemGeometry g = reference_geometry();
  CHECK(ue_pa_distance(g, 1, 3.0) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
  CHECK(ue_pa_distance(g, 2, 0.0) == doctest::Approx(std::sqrt(342.0)).epsilon(1e-15));
  SystemGeometry flat = g;
  flat.ue[0] = {5.0, 0.0};
  CHECK(ue_pa_distance(flat, 1, 5.0) == 3.0);

  CHECK_THROWS_AS(ue_pa_distance(g, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ue_pa_distance(g, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ue_pa_distance(g, 1, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  CHECK_THROWS_AS(ue_pa_distance(g, 1, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("geometry validation") {
  SystemGeometry g = reference_geometry();
  CHECK_NOTHROW(g.validate());
  SystemGeometry bad = g;
  bad.length = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = g;
  bad.n_eff = 0.9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = g;
  bad.kappa_db_per_m = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = g;
  bad.height = 0.0;
  bad.ue[1].y = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("spherical_channel") {
  SystemGeometry g = reference_geometry();
  CHECK(g.eta() == doctest::Approx(8.5246e-4).epsilon(1e-4));

  // UE directly below the PA at unit height: distance 1 m.
  SystemGeometry unit = g;
  unit.height = 1.0;
  unit.ue[0] = {2.0, 0.0};
  CHECK(spherical_channel(unit, 1, 2.0).magnitude() == doctest::Approx(unit.eta()).epsilon(1e-15));

  // Distance of exactly one wavelength.
  SystemGeometry lam = g;
  lam.height = g.wavelength();
  lam.ue[0] = {1.0, 0.0};
  CHECK(wrap_diff(spherical_channel(lam, 1, 1.0).angle(), 0.0) < 1e-9);
}

TEST_CASE("waveguide_loss") {
  const SystemGeometry g = reference_geometry();
  const ComplexAmp origin = waveguide_loss(g, 0.0);
  CHECK(origin.re() == 1.0);
  CHECK(origin.im() == 0.0);
  CHECK(waveguide_loss(g, 10.0).magnitude() == doctest::Approx(0.891250938).epsilon(1e-9));
  CHECK(wrap_diff(waveguide_loss(g, g.guided_wavelength()).angle(), 0.0) < 1e-9);
  CHECK_THROWS_AS(waveguide_loss(g, -1e-9), std::invalid_argument);
  CHECK_THROWS_AS(waveguide_loss(g, g.length + 1e-9), std::invalid_argument);

  double prev = 2.0;
  for (double x = 0.0; x <= g.length; x += 0.37) {
    const double m = waveguide_loss(g, x).magnitude();
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("effective_channel") {
  const SystemGeometry g = reference_geometry();
  const ComplexAmp h = effective_channel(g, 1, 10.0);
  CHECK(h.magnitude() ==
        doctest::Approx(waveguide_loss(g, 10.0).magnitude() * g.eta() / ue_pa_distance(g, 1, 10.0))
            .epsilon(1e-14));
  CHECK(wrap_diff(h.angle(), waveguide_loss(g, 10.0).angle() + spherical_channel(g, 1, 10.0).angle()) < 1e-12);

  SystemGeometry lossless = g;
  lossless.kappa_db_per_m = 0.0;
  lossless.height = 1.0;
  lossless.ue[0] = {0.0, 0.0};
  CHECK(effective_channel(lossless, 1, 0.0).magnitude() == doctest::Approx(g.eta()).epsilon(1e-15));
}

TEST_CASE("phase matches a 50-digit reference") {
  const SystemGeometry g = reference_geometry();
  for (int k = 1; k <= 2; ++k) {
    for (double x = 0.0; x <= g.length; x += 0.731) {
      const double got = effective_channel(g, k, x).angle();
      CHECK(got > -std::numbers::pi);
      CHECK(got <= std::numbers::pi);
      CHECK(wrap_diff(got, reference_phase(g, k, x)) < 1e-12);
    }
  }
}

TEST_CASE("magnitude falls with distance at a fixed PA") {
  SystemGeometry g = reference_geometry();
  double prev = std::numeric_limits<double>::infinity();
  for (double y = 0.0; y < 10.0; y += 0.5) {
    g.ue[0].y = y;
    const double m = effective_channel(g, 1, 4.0).magnitude();
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("ComplexAmp accessors") {
  const ComplexAmp z = ComplexAmp::from_complex({-1.0, 0.0});
  CHECK(z.angle() == doctest::Approx(std::numbers::pi));
  CHECK(z.magnitude() == doctest::Approx(1.0));
  const ComplexAmp w(2.0, -0.5L);
  CHECK(w.angle() == doctest::Approx(std::numbers::pi));
  const ComplexAmp p = z * ComplexAmp(3.0, 0.25L);
  CHECK(p.re() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.im() == doctest::Approx(-3.0));
}
