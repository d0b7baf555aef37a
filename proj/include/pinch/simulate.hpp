#pragma once

#include <array>
#include <cstdint>

#include "pinch/chan.hpp"
#include "pinch/dl_ber.hpp"
#include "pinch/ul_ber.hpp"

namespace pinch {

/// Gaussian sampler used by the simulator, reported in output metadata.
inline constexpr const char* kGaussianMethod = "box-muller";
inline constexpr const char* kRngName = "splitmix64-counter";

/// Counter-based generator: output i of stream (seed, stream) is a pure function of
/// (seed, stream, i), so chunks can be generated in any order or in parallel.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform on (0, 1].
  double uniform_open0();
  /// Standard normal pair.
  std::array<double, 2> normal_pair();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct SimSpec {
  std::uint64_t n_symbols = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t chunk = 1U << 16;  // symbols per sub-stream
  int threads = 1;                 // does not affect results

  void validate() const;
};

struct BitErrorCount {
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
  std::uint64_t symbols = 0;
  std::uint64_t squared_errors = 0;  // sum over symbols of (bit errors in the symbol)^2

  double estimate() const;
  /// Binomial standard error sqrt(p (1 - p) / bits) at p = estimate().
  double standard_error() const;
  /// Standard error from the spread of per-symbol error counts. Unlike standard_error()
  /// it accounts for bit errors that occur together within one symbol.
  double symbol_standard_error() const;

  friend bool operator==(const BitErrorCount&, const BitErrorCount&) = default;
};

struct SimResult {
  std::uint64_t symbols = 0;
  std::array<BitErrorCount, 2> ue{};  // UE 1, UE 2

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// UL chain: y = sqrt(P1) h1 s1 + sqrt(P2) h2 s2 + n; derotate by angle(h1) and
/// sign-detect s1; subtract sqrt(P1) h1 s1_hat, derotate by angle(h2), sign-detect s2.
SimResult simulate_ul(const SimSpec& spec, const ComplexAmp& h1, const ComplexAmp& h2,
                      const UlLinkConfig& cfg);

/// UL trials conditioned on the transmitted s2 and realized residual r (rejection
/// sampling). `n_symbols` counts accepted trials; only ue[1] is populated. Gives up after
/// `max_attempts` raw trials and reports what was accepted.
SimResult simulate_ul_conditional(const SimSpec& spec, const ComplexAmp& h1, const ComplexAmp& h2,
                                  const UlLinkConfig& cfg, const GraySymbol& s2, const Residual& r,
                                  std::uint64_t max_attempts);

/// DL chain: superposition coding at the BS, independent noise per UE, derotation and the
/// reference receiver at each UE.
SimResult simulate_dl(const SimSpec& spec, const ComplexAmp& h1, const ComplexAmp& h2,
                      const DlLinkConfig& cfg);

struct NoiseMoments {
  double mean_re = 0.0;
  double mean_im = 0.0;
  double var_re = 0.0;
  double var_im = 0.0;
  std::uint64_t samples = 0;
};

/// Draws n complex noise samples with per-dimension std sigma, as the simulator does.
NoiseMoments noise_self_test(std::uint64_t seed, std::uint64_t n, double sigma);

}  // namespace pinch
