#include "pinch/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pinch/parallel.hpp"

namespace pinch {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using cd = std::complex<double>;

// Splits the run into chunks, runs `trial_chunk(rng, count, out)` per chunk with its own
// sub-stream and sums the integer counters.
template <typename ChunkFn>
SimResult run_chunks(const SimSpec& spec, ChunkFn&& trial_chunk) {
  spec.validate();
  const std::uint64_t chunks = (spec.n_symbols + spec.chunk - 1) / spec.chunk;
  std::vector<SimResult> partial(chunks);
  parallel_for(chunks, spec.threads, [&](std::size_t c) {
    const std::uint64_t begin = c * spec.chunk;
    const std::uint64_t count = std::min(spec.chunk, spec.n_symbols - begin);
    CounterRng rng(spec.seed, c);
    trial_chunk(rng, count, partial[c]);
  });
  SimResult total;
  for (const SimResult& p : partial) {
    total.symbols += p.symbols;
    for (int k = 0; k < 2; ++k) {
      total.ue[k].errors += p.ue[k].errors;
      total.ue[k].bits += p.ue[k].bits;
      total.ue[k].symbols += p.ue[k].symbols;
      total.ue[k].squared_errors += p.ue[k].squared_errors;
    }
  }
  return total;
}

GraySymbol random_qpsk(std::uint64_t word) { return qpsk_alphabet()[word & 3U]; }

int bit_errors(const GraySymbol& a, const GraySymbol& b) { return std::popcount(a.bits ^ b.bits); }

void tally(BitErrorCount& c, const GraySymbol& sent, const GraySymbol& detected) {
  const auto e = static_cast<std::uint64_t>(bit_errors(sent, detected));
  c.errors += e;
  c.squared_errors += e * e;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream * kGolden + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::next() { return mix64(key_ + (++counter_) * kGolden); }

double CounterRng::uniform_open0() {
  return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
}

std::array<double, 2> CounterRng::normal_pair() {
  const double radius = std::sqrt(-2.0 * std::log(uniform_open0()));
  const double angle = 2.0 * std::numbers::pi * uniform_open0();
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

void SimSpec::validate() const {
  if (n_symbols < 1) throw std::invalid_argument("n_symbols must be >= 1");
  if (chunk < 1) throw std::invalid_argument("chunk must be >= 1");
}

double BitErrorCount::estimate() const {
  return bits == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(bits);
}

double BitErrorCount::symbol_standard_error() const {
  if (symbols == 0 || bits == 0) return 0.0;
  const double n = static_cast<double>(symbols);
  const double mean = static_cast<double>(errors) / n;
  const double var = std::max(0.0, static_cast<double>(squared_errors) / n - mean * mean);
  const double bits_per_symbol = static_cast<double>(bits) / n;
  return std::sqrt(var / n) / bits_per_symbol;
}

double BitErrorCount::standard_error() const {
  if (bits == 0) return 0.0;
  const double p = estimate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(bits));
}

SimResult simulate_ul(const SimSpec& spec, const ComplexAmp& h1, const ComplexAmp& h2,
                      const UlLinkConfig& cfg) {
  cfg.validate();
  if (!(h1.magnitude() > 0.0) || !(h2.magnitude() > 0.0)) {
    throw std::invalid_argument("simulate_ul: zero-magnitude channel");
  }
  const cd g1 = std::sqrt(cfg.p1) * h1.value();
  const cd g2 = std::sqrt(cfg.p2) * h2.value();
  const cd derot1 = std::polar(1.0, -h1.angle());
  const cd derot2 = std::polar(1.0, -h2.angle());
  return run_chunks(spec, [&](CounterRng& rng, std::uint64_t count, SimResult& out) {
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::uint64_t word = rng.next();
      const GraySymbol& s1 = random_qpsk(word);
      const GraySymbol& s2 = random_qpsk(word >> 2);
      const auto z = rng.normal_pair();
      const cd y = g1 * s1.point() + g2 * s2.point() + cfg.sigma * cd(z[0], z[1]);
      const GraySymbol s1_hat = qpsk_sign_detect(y * derot1);
      const GraySymbol s2_hat = qpsk_sign_detect((y - g1 * s1_hat.point()) * derot2);
      tally(out.ue[0], s1, s1_hat);
      tally(out.ue[1], s2, s2_hat);
    }
    out.symbols = count;
    for (auto& u : out.ue) {
      u.bits = 2 * count;
      u.symbols = count;
    }
  });
}

SimResult simulate_ul_conditional(const SimSpec& spec, const ComplexAmp& h1, const ComplexAmp& h2,
                                  const UlLinkConfig& cfg, const GraySymbol& s2, const Residual& r,
                                  std::uint64_t max_attempts) {
  cfg.validate();
  if (s2.order != 4) throw std::invalid_argument("simulate_ul_conditional: s2 must be QPSK");
  const cd g1 = std::sqrt(cfg.p1) * h1.value();
  const cd g2 = std::sqrt(cfg.p2) * h2.value();
  const cd derot1 = std::polar(1.0, -h1.angle());
  const cd derot2 = std::polar(1.0, -h2.angle());
  // Attempt budget is shared out in proportion to each chunk's quota.
  const double budget_per_trial = static_cast<double>(max_attempts) / static_cast<double>(spec.n_symbols);
  return run_chunks(spec, [&](CounterRng& rng, std::uint64_t count, SimResult& out) {
    const auto attempts = static_cast<std::uint64_t>(std::ceil(budget_per_trial * static_cast<double>(count)));
    std::uint64_t accepted = 0;
    for (std::uint64_t a = 0; a < attempts && accepted < count; ++a) {
      const GraySymbol& s1 = random_qpsk(rng.next());
      const auto z = rng.normal_pair();
      const cd y = g1 * s1.point() + g2 * s2.point() + cfg.sigma * cd(z[0], z[1]);
      const GraySymbol s1_hat = qpsk_sign_detect(y * derot1);
      if (!(residual_of(s1, s1_hat) == r)) continue;
      ++accepted;
      tally(out.ue[1], s2, qpsk_sign_detect((y - g1 * s1_hat.point()) * derot2));
    }
    out.symbols = accepted;
    out.ue[1].bits = 2 * accepted;
    out.ue[1].symbols = accepted;
  });
}

SimResult simulate_dl(const SimSpec& spec, const ComplexAmp& h1, const ComplexAmp& h2,
                      const DlLinkConfig& cfg) {
  cfg.validate();
  const std::array<ComplexAmp, 2> h = {h1, h2};
  const std::array<int, 2> orders = {cfg.m1, cfg.m2};
  const double amp1 = std::sqrt(cfg.total_power * cfg.alpha / cfg.nu1());
  const double amp2 = std::sqrt(cfg.total_power * (1.0 - cfg.alpha) / cfg.nu2());
  std::array<AxisGains, 2> gains{};
  std::array<cd, 2> hc{};
  std::array<cd, 2> derot{};
  for (int k = 0; k < 2; ++k) {
    gains[k] = axis_gains(cfg, h[k].magnitude());
    hc[k] = h[k].value();
    derot[k] = std::polar(1.0, -h[k].angle());
  }
  return run_chunks(spec, [&](CounterRng& rng, std::uint64_t count, SimResult& out) {
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::uint64_t word = rng.next();
      const std::array<GraySymbol, 2> sent = {
          modulate_packed(static_cast<std::uint32_t>(word & (cfg.m1 - 1)), cfg.m1),
          modulate_packed(static_cast<std::uint32_t>((word >> 20) & (cfg.m2 - 1)), cfg.m2)};
      const cd s = amp1 * sent[0].point() + amp2 * sent[1].point();
      for (int k = 0; k < 2; ++k) {
        const auto z = rng.normal_pair();
        const cd y_bar = (hc[k] * s + cfg.sigma * cd(z[0], z[1])) * derot[k];
        const int level_i = dl_receiver_decision(y_bar.real(), gains[k], cfg, k + 1).own_level;
        const int level_q = dl_receiver_decision(y_bar.imag(), gains[k], cfg, k + 1).own_level;
        tally(out.ue[k], sent[k], symbol_from_levels(level_i, level_q, orders[k]));
      }
    }
    out.symbols = count;
    out.ue[0].bits = count * bits_per_symbol(cfg.m1);
    out.ue[1].bits = count * bits_per_symbol(cfg.m2);
    out.ue[0].symbols = out.ue[1].symbols = count;
  });
}

NoiseMoments noise_self_test(std::uint64_t seed, std::uint64_t n, double sigma) {
  CounterRng rng(seed, 0);
  double sum_re = 0.0, sum_im = 0.0, sq_re = 0.0, sq_im = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto z = rng.normal_pair();
    const double re = sigma * z[0];
    const double im = sigma * z[1];
    sum_re += re;
    sum_im += im;
    sq_re += re * re;
    sq_im += im * im;
  }
  const double dn = static_cast<double>(n);
  NoiseMoments m;
  m.samples = n;
  m.mean_re = sum_re / dn;
  m.mean_im = sum_im / dn;
  m.var_re = sq_re / dn - m.mean_re * m.mean_re;
  m.var_im = sq_im / dn - m.mean_im * m.mean_im;
  return m;
}

}  // namespace pinch
