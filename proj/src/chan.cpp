#include "pinch/chan.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pinch {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

long double distance_ld(const SystemGeometry& geom, int k, double x) {
  if (k != 1 && k != 2) throw std::invalid_argument("UE index must be 1 or 2, got " + std::to_string(k));
  if (!std::isfinite(x)) throw std::invalid_argument("PA position must be finite");
  const Point2& ue = geom.ue[static_cast<std::size_t>(k - 1)];
  const long double dx = static_cast<long double>(ue.x) - x;
  const long double dy = ue.y;
  const long double dz = geom.height;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

double SystemGeometry::eta() const {
  return kSpeedOfLight / (4.0 * std::numbers::pi * carrier_hz);
}

void SystemGeometry::validate() const {
  require(std::isfinite(length) && length > 0.0, "geometry: length must be > 0");
  require(std::isfinite(height) && height >= 0.0, "geometry: height must be >= 0");
  require(std::isfinite(carrier_hz) && carrier_hz > 0.0, "geometry: carrier frequency must be > 0");
  require(std::isfinite(kappa_db_per_m) && kappa_db_per_m >= 0.0, "geometry: kappa must be >= 0");
  require(std::isfinite(n_eff) && n_eff >= 1.0, "geometry: n_eff must be >= 1");
  for (const Point2& p : ue) {
    require(std::isfinite(p.x) && std::isfinite(p.y), "geometry: UE coordinates must be finite");
    require(height != 0.0 || p.y != 0.0, "geometry: a UE lies on the waveguide (height and y both zero)");
  }
}

ComplexAmp::ComplexAmp(double magnitude, long double phase_turns)
    : magnitude_(magnitude), turns_(phase_turns) {}

ComplexAmp ComplexAmp::from_complex(std::complex<double> z) {
  return {std::abs(z), static_cast<long double>(std::arg(z)) / (2.0L * std::numbers::pi_v<long double>)};
}

double reduce_turns(long double turns) {
  long double frac = turns - std::round(turns);  // [-0.5, 0.5]
  if (frac <= -0.5L) frac += 1.0L;
  return static_cast<double>(2.0L * std::numbers::pi_v<long double> * frac);
}

double ComplexAmp::angle() const { return reduce_turns(turns_); }
double ComplexAmp::re() const { return magnitude_ * std::cos(angle()); }
double ComplexAmp::im() const { return magnitude_ * std::sin(angle()); }
std::complex<double> ComplexAmp::value() const { return std::polar(magnitude_, angle()); }

double ue_pa_distance(const SystemGeometry& geom, int k, double x) {
  return static_cast<double>(distance_ld(geom, k, x));
}

ComplexAmp spherical_channel(const SystemGeometry& geom, int k, double x) {
  const long double dist = distance_ld(geom, k, x);
  const long double turns = -dist * geom.carrier_hz / kSpeedOfLight;
  return {geom.eta() / static_cast<double>(dist), turns};
}

ComplexAmp waveguide_loss(const SystemGeometry& geom, double x) {
  if (!(x >= 0.0 && x <= geom.length)) {
    throw std::invalid_argument("PA position outside [0, L]: " + std::to_string(x));
  }
  const double magnitude = std::pow(10.0, -geom.kappa_db_per_m * x / 20.0);
  const long double turns =
      -static_cast<long double>(x) * geom.n_eff * geom.carrier_hz / kSpeedOfLight;
  return {magnitude, turns};
}

ComplexAmp effective_channel(const SystemGeometry& geom, int k, double x) {
  return waveguide_loss(geom, x) * spherical_channel(geom, k, x);
}

}  // namespace pinch
