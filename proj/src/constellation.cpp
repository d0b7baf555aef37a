#include "pinch/constellation.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pinch {

namespace {

std::uint32_t gray(std::uint32_t n) { return n ^ (n >> 1); }

std::uint32_t gray_inverse(std::uint32_t g) {
  std::uint32_t n = g;
  for (std::uint32_t shift = 1; shift < 32; shift <<= 1) n ^= n >> shift;
  return n;
}

int level_index(int level, int m) { return (level + m - 1) / 2; }

}  // namespace

void validate_order(int order) {
  const bool power_of_two = order >= 4 && std::has_single_bit(static_cast<unsigned>(order));
  if (!power_of_two || std::countr_zero(static_cast<unsigned>(order)) % 2 != 0 || order > (1 << 20)) {
    throw std::invalid_argument("modulation order must be a square power of two >= 4, got " +
                                std::to_string(order));
  }
}

int levels_per_axis(int order) {
  validate_order(order);
  return 1 << (std::countr_zero(static_cast<unsigned>(order)) / 2);
}

int bits_per_axis(int order) {
  validate_order(order);
  return std::countr_zero(static_cast<unsigned>(order)) / 2;
}

int bits_per_symbol(int order) { return 2 * bits_per_axis(order); }

double norm_factor(int order) {
  validate_order(order);
  return 2.0 * (order - 1) / 3.0;
}

int GraySymbol::bit_count() const { return bits_per_symbol(order); }

int GraySymbol::bit(int index) const {
  const int n = bit_count();
  return static_cast<int>((bits >> (n - 1 - index)) & 1U);
}

std::uint32_t axis_label(int level, int m, Axis axis) {
  const int idx = level_index(level, m);
  const int ordered = axis == Axis::kInPhase ? m - 1 - idx : idx;
  return gray(static_cast<std::uint32_t>(ordered));
}

int axis_level(std::uint32_t label, int m, Axis axis) {
  const int ordered = static_cast<int>(gray_inverse(label));
  const int idx = axis == Axis::kInPhase ? m - 1 - ordered : ordered;
  return 2 * idx - (m - 1);
}

int slice_axis(double u, int m) {
  // Level index i covers [2i - m, 2i + 2 - m), shifted so thresholds are even integers.
  const double raw = std::floor((u + m) / 2.0);
  int idx;
  if (!(raw > 0.0)) {
    idx = 0;  // also catches NaN
  } else if (raw >= m - 1) {
    idx = m - 1;
  } else {
    idx = static_cast<int>(raw);
  }
  return 2 * idx - (m - 1);
}

GraySymbol symbol_from_levels(int i_level, int q_level, int order) {
  const int m = levels_per_axis(order);
  const int b = bits_per_axis(order);
  auto valid = [m](int level) { return (level & 1) != 0 && std::abs(level) <= m - 1; };
  if (!valid(i_level) || !valid(q_level)) throw std::invalid_argument("level outside the alphabet");
  const std::uint32_t bits =
      (axis_label(i_level, m, Axis::kInPhase) << b) | axis_label(q_level, m, Axis::kQuadrature);
  return {i_level, q_level, bits, order};
}

GraySymbol modulate_packed(std::uint32_t bits, int order) {
  const int m = levels_per_axis(order);
  const int b = bits_per_axis(order);
  if (bits >> (2 * b) != 0) throw std::invalid_argument("bit pattern wider than log2(M)");
  const std::uint32_t mask = (1U << b) - 1U;
  return {axis_level(bits >> b, m, Axis::kInPhase), axis_level(bits & mask, m, Axis::kQuadrature),
          bits, order};
}

GraySymbol modulate(std::span<const std::uint8_t> bits, int order) {
  if (static_cast<int>(bits.size()) != bits_per_symbol(order)) {
    throw std::invalid_argument("expected log2(M) bits");
  }
  std::uint32_t packed = 0;
  for (std::uint8_t v : bits) {
    if (v > 1) throw std::invalid_argument("bits must be 0 or 1");
    packed = (packed << 1) | v;
  }
  return modulate_packed(packed, order);
}

GraySymbol demodulate_hard(std::complex<double> y, int order, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("demodulation scale must be > 0");
  const int m = levels_per_axis(order);
  return symbol_from_levels(slice_axis(y.real() / scale, m), slice_axis(y.imag() / scale, m), order);
}

GraySymbol qpsk_sign_detect(std::complex<double> y) {
  return symbol_from_levels(y.real() >= 0.0 ? 1 : -1, y.imag() >= 0.0 ? 1 : -1, 4);
}

std::vector<GraySymbol> alphabet(int order) {
  std::vector<GraySymbol> out;
  out.reserve(static_cast<std::size_t>(order));
  for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(order); ++b) out.push_back(modulate_packed(b, order));
  return out;
}

const std::vector<GraySymbol>& qpsk_alphabet() {
  static const std::vector<GraySymbol> kQpsk = {
      symbol_from_levels(1, 1, 4), symbol_from_levels(1, -1, 4),
      symbol_from_levels(-1, -1, 4), symbol_from_levels(-1, 1, 4)};
  return kQpsk;
}

}  // namespace pinch
