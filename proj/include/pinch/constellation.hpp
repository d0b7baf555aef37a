#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace pinch {

enum class Axis { kInPhase, kQuadrature };

/// A point of a Gray-coded square M-QAM alphabet (M = 4 is QPSK).
///
/// Levels are odd integers in {+-1, +-3, ..., +-(sqrt(M)-1)}. The bit label is packed
/// MSB-first: the first log2(sqrt M) bits belong to the in-phase axis, the rest to the
/// quadrature axis. Per axis the label is the binary-reflected Gray code of the level
/// index, counted from the top level for I and from the bottom level for Q. For M = 4
/// this reproduces (1+j)<->01, (1-j)<->00, (-1-j)<->10, (-1+j)<->11.
struct GraySymbol {
  int i_level = 1;
  int q_level = 1;
  std::uint32_t bits = 0;
  int order = 4;

  std::complex<double> point() const { return {double(i_level), double(q_level)}; }
  int bit_count() const;
  /// Bit `index` in transmission order (0 is the first/most significant bit).
  int bit(int index) const;

  friend bool operator==(const GraySymbol&, const GraySymbol&) = default;
};

/// Throws std::invalid_argument unless M is an even power of two and M >= 4.
void validate_order(int order);
int levels_per_axis(int order);
int bits_per_axis(int order);
int bits_per_symbol(int order);

/// Power normalization nu = 2 (M - 1) / 3 (mean |s|^2 of the alphabet).
double norm_factor(int order);

/// Gray label of a level on one axis (m = levels per axis).
std::uint32_t axis_label(int level, int m, Axis axis);
/// Inverse of axis_label.
int axis_level(std::uint32_t label, int m, Axis axis);

/// Nearest level to u on a unit-spaced odd grid of m levels. Thresholds sit on even
/// integers; a value exactly on a threshold resolves to the upper level. Clipped to the
/// outermost levels.
int slice_axis(double u, int m);

GraySymbol modulate(std::span<const std::uint8_t> bits, int order);
/// Same as modulate(), bits packed MSB-first in an integer.
GraySymbol modulate_packed(std::uint32_t bits, int order);
/// Builds the symbol from its levels (levels must be valid for the order).
GraySymbol symbol_from_levels(int i_level, int q_level, int order);

/// Minimum-distance detection of y against scale * alphabet.
GraySymbol demodulate_hard(std::complex<double> y, int order, double scale);

/// QPSK detection by the signs of Re/Im; sgn(0) := +1.
GraySymbol qpsk_sign_detect(std::complex<double> y);

/// All M symbols, ordered by packed label.
std::vector<GraySymbol> alphabet(int order);

/// The QPSK alphabet in the order {1+j, 1-j, -1-j, -1+j}.
const std::vector<GraySymbol>& qpsk_alphabet();

}  // namespace pinch
