#pragma once

#include <array>
#include <complex>

namespace pinch {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Waveguide along the x-axis at height `height` above the UE plane, fed at x = 0.
struct SystemGeometry {
  double length = 20.0;          // m
  double height = 3.0;           // m
  std::array<Point2, 2> ue{};    // UE 1 and UE 2, z = 0
  double carrier_hz = 28e9;
  double kappa_db_per_m = 0.1;   // in-waveguide attenuation
  double n_eff = 1.4;

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  double guided_wavelength() const { return wavelength() / n_eff; }
  /// Free-space amplitude constant c / (4 pi f_c), in meters.
  double eta() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Complex amplitude held as magnitude plus an unreduced phase in turns (cycles).
/// Reduction to (-pi, pi] happens only in the accessors, so phases of thousands of
/// wavelengths keep full precision.
class ComplexAmp {
 public:
  ComplexAmp() = default;
  ComplexAmp(double magnitude, long double phase_turns);
  static ComplexAmp from_complex(std::complex<double> z);

  double magnitude() const { return magnitude_; }
  /// Phase reduced to (-pi, pi].
  double angle() const;
  long double phase_turns() const { return turns_; }
  double re() const;
  double im() const;
  std::complex<double> value() const;

  /// Multiplies by e^{j 2 pi turns}.
  ComplexAmp rotated(long double turns) const { return {magnitude_, turns_ + turns}; }

  friend ComplexAmp operator*(const ComplexAmp& a, const ComplexAmp& b) {
    return {a.magnitude_ * b.magnitude_, a.turns_ + b.turns_};
  }

 private:
  double magnitude_ = 0.0;
  long double turns_ = 0.0L;
};

/// Reduces a phase given in turns to radians in (-pi, pi].
double reduce_turns(long double turns);

/// UE index k is 1-based, matching the user numbering (k in {1, 2}).
double ue_pa_distance(const SystemGeometry& geom, int k, double x);

/// Spherical-wave LoS channel between UE k and a PA at x.
ComplexAmp spherical_channel(const SystemGeometry& geom, int k, double x);

/// In-waveguide propagation from the feed at x = 0 to the PA at x; requires 0 <= x <= L.
ComplexAmp waveguide_loss(const SystemGeometry& geom, double x);

/// UE k to BS through the PA at x: waveguide_loss * spherical_channel.
ComplexAmp effective_channel(const SystemGeometry& geom, int k, double x);

}  // namespace pinch
