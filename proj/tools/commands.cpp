#include "commands.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "pinch/dl_ber.hpp"
#include "pinch/optimize.hpp"
#include "pinch/qfunc.hpp"
#include "pinch/simulate.hpp"
#include "pinch/ul_ber.hpp"

namespace pinch::cli {

namespace {

using Row = std::vector<std::string>;
std::string num(double v) { return format_number(v); }

void provenance(CsvTable& t, const std::string& command, const ExperimentConfig& cfg) {
  t.comment("tool: pinch-cli " + std::string(kToolVersion));
  t.comment("command: " + command);
  t.comment("config_hash: fnv1a64:" + cfg.hash());
  t.comment("seed: " + std::to_string(cfg.sim.seed));
  t.comment("rng: " + std::string(kRngName) + "; gaussian: " + kGaussianMethod);
  t.comment("noise_sigma: " + num(cfg.noise.sigma()));
}

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericalError(what + " is not finite");
}

// Seed of the r-th simulated point, derived from the run seed.
std::uint64_t point_seed(std::uint64_t seed, std::uint64_t r) { return CounterRng(seed, 0x5EEDULL + r).next(); }

SimSpec sim_spec(const ExperimentConfig& cfg, std::uint64_t r, int threads) {
  SimSpec s;
  s.n_symbols = cfg.sim.n_symbols;
  s.seed = point_seed(cfg.sim.seed, r);
  s.chunk = cfg.sim.chunk;
  s.threads = threads;
  return s;
}

// UL evaluation in the configured SIC order. P1 = P2, so swapping the decoding order is
// swapping the UE positions; results are reported in the original numbering.
struct UlContext {
  const ExperimentConfig& cfg;
  SystemGeometry geom;

  explicit UlContext(const ExperimentConfig& c) : cfg(c), geom(c.geometry) {
    if (c.ul.swap_order) std::swap(geom.ue[0], geom.ue[1]);
  }

  UlLinkConfig link(double power) const {
    const double w = to_watts(power, cfg.ul.unit);
    return {w, w, cfg.noise.sigma()};
  }
  ComplexAmp h(int k, double x) const { return effective_channel(geom, k, x); }
  UlBers bers(double x, double power) const {
    UlBers b = ul_bers(h(1, x), h(2, x), link(power), cfg.ul.model);
    if (cfg.ul.swap_order) std::swap(b.ue1, b.ue2);
    return b;
  }
  SimResult simulate(double x, double power, const SimSpec& spec) const {
    SimResult r = simulate_ul(spec, h(1, x), h(2, x), link(power));
    if (cfg.ul.swap_order) std::swap(r.ue[0], r.ue[1]);
    return r;
  }
  OptimResult optimize(double power, int threads) const {
    return optimize_ul(geom, link(power), cfg.ul_optim_spec(threads));
  }
};

DlLinkConfig dl_link(const ExperimentConfig& cfg, double power, double alpha) {
  DlLinkConfig d;
  d.total_power = to_watts(power, cfg.dl.unit);
  d.alpha = alpha;
  d.m1 = cfg.dl.m1;
  d.m2 = cfg.dl.m2;
  d.sigma = cfg.noise.sigma();
  return d;
}

CommandOutput ul_ber_curve(const ExperimentConfig& cfg, const RunOptions& opt) {
  CsvTable t({"power_dBm", "x", "ber1_analytic", "ber2_analytic", "ber_avg_analytic", "ber1_sim", "ber2_sim",
              "ber_avg_sim", "sim_se1", "sim_se2"});
  provenance(t, "ul-ber-curve", cfg);
  const UlContext ul(cfg);
  std::vector<std::optional<double>> optimized(cfg.ul.powers.size());
  std::ostringstream report;
  std::uint64_t point = 0;
  for (const Placement& pl : cfg.ul.placements) {
    t.comment("placement: " + (pl.optimized ? std::string("optimized") : "x = " + num(pl.x)));
    for (std::size_t i = 0; i < cfg.ul.powers.size(); ++i) {
      const double p = cfg.ul.powers[i];
      if (pl.optimized && !optimized[i]) {
        optimized[i] = ul.optimize(p, opt.threads).x_star;
        report << "power_dBm=" << num(to_dbm(p, cfg.ul.unit)) << " x_star=" << num(*optimized[i]) << "\n";
      }
      const double x = pl.optimized ? *optimized[i] : pl.x;
      const UlBers b = ul.bers(x, p);
      require_finite(b.ue1, "UE-1 BER");
      require_finite(b.ue2, "UE-2 BER");
      const SimResult s = ul.simulate(x, p, sim_spec(cfg, point++, opt.threads));
      t.add_row({num(to_dbm(p, cfg.ul.unit)), num(x), num(b.ue1), num(b.ue2), num(0.5 * (b.ue1 + b.ue2)),
                 num(s.ue[0].estimate()), num(s.ue[1].estimate()),
                 num(0.5 * (s.ue[0].estimate() + s.ue[1].estimate())), num(s.ue[0].standard_error()),
                 num(s.ue[1].standard_error())});
    }
  }
  return {t, report.str()};
}

CommandOutput ul_position_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
  CsvTable t({"power_dBm", "x", "f_dB", "f_smoothed_dB"});
  provenance(t, "ul-position-sweep", cfg);
  t.comment("window_samples: " + std::to_string(2 * cfg.optimize.half_width + 1));
  const UlContext ul(cfg);
  for (double p : cfg.ul.sweep_powers) {
    const UlLinkConfig link = ul.link(p);
    const SampledCurve f = sample_cost([&](double x) { return ul_cost(x, ul.geom, link, cfg.ul.model); },
                                       cfg.optimize.period, ul.geom.length, opt.threads);
    const SampledCurve env = moving_min(f, EnvelopeSpec{cfg.optimize.half_width});
    for (std::size_t n = 0; n < f.values.size(); ++n) {
      t.add_row({num(to_dbm(p, cfg.ul.unit)), num(f.x_at(n)), num(f.values[n]), num(env.values[n])});
    }
  }
  return {t, ""};
}

CommandOutput dl_ber_curve(const ExperimentConfig& cfg, const RunOptions& opt) {
  CsvTable t({"variant", "power_dBm", "x", "alpha", "ber1_analytic", "ber2_analytic", "ber_avg_analytic", "ber1_sim",
              "ber2_sim", "ber_avg_sim", "sim_se1", "sim_se2"});
  provenance(t, "dl-ber-curve", cfg);
  const SystemGeometry& g = cfg.geometry;
  std::ostringstream report;
  std::uint64_t point = 0;
  for (double p : cfg.dl.powers) {
    const OptimResult best = optimize_dl(g, dl_link(cfg, p, 0.5), cfg.dl_optim_spec());
    report << "power_dBm=" << num(to_dbm(p, cfg.dl.unit)) << " x_star=" << num(best.x_star)
           << " alpha_star=" << num(*best.alpha_star) << " cost_dB=" << num(best.cost_db) << "\n";
    const struct {
      const char* name;
      double x;
      double alpha;
    } variants[] = {{"optimized", best.x_star, *best.alpha_star},
                    {"reference", cfg.dl.reference_x, cfg.dl.reference_alpha},
                    {"equal_split", best.x_star, cfg.dl.equal_alpha}};
    for (const auto& v : variants) {
      const DlLinkConfig link = dl_link(cfg, p, v.alpha);
      const double b1 = dl_ber(1, v.x, v.alpha, g, link);
      const double b2 = dl_ber(2, v.x, v.alpha, g, link);
      require_finite(b1, "UE-1 BER");
      require_finite(b2, "UE-2 BER");
      const SimResult s = simulate_dl(sim_spec(cfg, point++, opt.threads), effective_channel(g, 1, v.x),
                                      effective_channel(g, 2, v.x), link);
      t.add_row({v.name, num(to_dbm(p, cfg.dl.unit)), num(v.x), num(v.alpha), num(b1), num(b2),
                 num(0.5 * (b1 + b2)), num(s.ue[0].estimate()), num(s.ue[1].estimate()),
                 num(0.5 * (s.ue[0].estimate() + s.ue[1].estimate())), num(s.ue[0].standard_error()),
                 num(s.ue[1].standard_error())});
    }
  }
  return {t, report.str()};
}

CommandOutput dl_surface(const ExperimentConfig& cfg, const RunOptions&) {
  CsvTable t({"x", "alpha", "cost_dB"});
  provenance(t, "dl-surface", cfg);
  t.comment("power_dBm: " + num(to_dbm(cfg.dl.surface_power, cfg.dl.unit)));
  const SystemGeometry& g = cfg.geometry;
  const DlLinkConfig link = dl_link(cfg, cfg.dl.surface_power, 0.5);
  for (int i = 0; i < cfg.dl.surface_nx; ++i) {
    const double x = g.length * i / (cfg.dl.surface_nx - 1);
    for (int j = 0; j < cfg.dl.surface_nalpha; ++j) {
      const double alpha = double(j) / (cfg.dl.surface_nalpha - 1);
      const double c = dl_cost(x, alpha, g, link);
      require_finite(c, "DL cost");
      t.add_row({num(x), num(alpha), num(c)});
    }
  }
  return {t, ""};
}

CsvTable trace_table(const std::string& command, const ExperimentConfig& cfg) {
  CsvTable t({"power_dBm", "stage", "start", "x", "alpha", "cost_dB"});
  provenance(t, command, cfg);
  return t;
}

void add_trace(CsvTable& t, double power_dbm, const OptimResult& r) {
  for (const TracePoint& p : r.trace) {
    t.add_row({num(power_dbm), p.stage, std::to_string(p.start), num(p.x), num(p.alpha), num(p.cost)});
  }
}

CommandOutput optimize_ul_cmd(const ExperimentConfig& cfg, const RunOptions& opt) {
  CsvTable t = trace_table("optimize-ul", cfg);
  const UlContext ul(cfg);
  std::ostringstream report;
  for (double p : cfg.ul.powers) {
    const OptimResult r = ul.optimize(p, opt.threads);
    require_finite(r.cost_db, "UL cost");
    const UlBers b = ul.bers(r.x_star, p);
    const double dbm = to_dbm(p, cfg.ul.unit);
    add_trace(t, dbm, r);
    report << "power_dBm=" << num(dbm) << " x_star=" << num(r.x_star) << " x_smoothed=" << num(r.x_smoothed)
           << " cost_sum_dB=" << num(r.cost_db) << " cost_avg_dB=" << num(r.cost_db - 10.0 * std::log10(2.0))
           << " ber1=" << num(b.ue1) << " ber2=" << num(b.ue2) << "\n";
  }
  return {t, report.str()};
}

CommandOutput optimize_dl_cmd(const ExperimentConfig& cfg, const RunOptions&) {
  CsvTable t = trace_table("optimize-dl", cfg);
  const SystemGeometry& g = cfg.geometry;
  std::ostringstream report;
  for (double p : cfg.dl.powers) {
    const OptimResult r = optimize_dl(g, dl_link(cfg, p, 0.5), cfg.dl_optim_spec());
    require_finite(r.cost_db, "DL cost");
    const DlLinkConfig link = dl_link(cfg, p, *r.alpha_star);
    const double dbm = to_dbm(p, cfg.dl.unit);
    add_trace(t, dbm, r);
    report << "power_dBm=" << num(dbm) << " x_star=" << num(r.x_star) << " alpha_star=" << num(*r.alpha_star)
           << " cost_sum_dB=" << num(r.cost_db) << " cost_avg_dB=" << num(r.cost_db - 10.0 * std::log10(2.0))
           << " ber1=" << num(dl_ber(1, r.x_star, *r.alpha_star, g, link))
           << " ber2=" << num(dl_ber(2, r.x_star, *r.alpha_star, g, link)) << " restarts=" << r.restarts << "\n";
  }
  return {t, report.str()};
}

CommandOutput simulate_cmd(const ExperimentConfig& cfg, const RunOptions& opt) {
  CsvTable t({"scenario", "x", "alpha", "power_dBm", "ue", "bits", "errors", "ber_sim", "sim_se", "ber_analytic"});
  provenance(t, "simulate", cfg);
  const SimSection& s = cfg.sim;
  const SimSpec spec = sim_spec(cfg, 0, opt.threads);
  SimResult r;
  double analytic[2];
  double dbm = 0.0;
  if (s.scenario == "ul") {
    const UlContext ul(cfg);
    r = ul.simulate(s.x, s.power, spec);
    const UlBers b = ul.bers(s.x, s.power);
    analytic[0] = b.ue1;
    analytic[1] = b.ue2;
    dbm = to_dbm(s.power, cfg.ul.unit);
  } else {
    const SystemGeometry& g = cfg.geometry;
    const DlLinkConfig link = dl_link(cfg, s.power, s.alpha);
    r = simulate_dl(spec, effective_channel(g, 1, s.x), effective_channel(g, 2, s.x), link);
    analytic[0] = dl_ber(1, s.x, s.alpha, g, link);
    analytic[1] = dl_ber(2, s.x, s.alpha, g, link);
    dbm = to_dbm(s.power, cfg.dl.unit);
  }
  std::ostringstream report;
  for (int k = 0; k < 2; ++k) {
    require_finite(analytic[k], "analytic BER");
    t.add_row({s.scenario, num(s.x), s.scenario == "ul" ? "" : num(s.alpha), num(dbm), std::to_string(k + 1),
               std::to_string(r.ue[k].bits), std::to_string(r.ue[k].errors), num(r.ue[k].estimate()),
               num(r.ue[k].standard_error()), num(analytic[k])});
    report << "ue" << k + 1 << ": sim=" << num(r.ue[k].estimate()) << " se=" << num(r.ue[k].standard_error())
           << " analytic=" << num(analytic[k]) << "\n";
  }
  return {t, report.str()};
}

CommandOutput self_test(const ExperimentConfig& cfg, const RunOptions&) {
  CsvTable t({"check", "value", "tolerance", "pass"});
  provenance(t, "self-test", cfg);
  bool all = true;
  std::ostringstream report;
  auto check = [&](const std::string& name, double value, double tol) {
    const bool ok = std::isfinite(value) && std::abs(value) <= tol;
    all = all && ok;
    t.add_row({name, num(value), num(tol), ok ? "1" : "0"});
    report << (ok ? "PASS " : "FAIL ") << name << " = " << num(value) << " (tol " << num(tol) << ")\n";
  };

  const std::uint64_t n = 10'000'000;
  const double sigma = cfg.noise.sigma();
  const NoiseMoments m = noise_self_test(cfg.sim.seed, n, sigma);
  const double se = sigma / std::sqrt(double(n));
  check("noise_mean_re_over_se", m.mean_re / se, 4.0);
  check("noise_mean_im_over_se", m.mean_im / se, 4.0);
  check("noise_var_re_rel_err", m.var_re / (sigma * sigma) - 1.0, 0.01);
  check("noise_var_im_rel_err", m.var_im / (sigma * sigma) - 1.0, 0.01);

  std::mt19937_64 gen(cfg.sim.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_residual = 0.0, worst_q = 0.0, worst_reduction = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ComplexAmp h1(0.05 + u(gen), u(gen));
    const ComplexAmp h2(0.05 + u(gen), u(gen));
    const UlLinkConfig link{2.0 * u(gen), 2.0 * u(gen), 0.05 + u(gen)};
    for (const GraySymbol& s2 : qpsk_alphabet()) {
      double sum = 0.0;
      for (const Residual& r : residual_set()) sum += residual_prob(r, s2, h1, h2, link);
      worst_residual = std::max(worst_residual, std::abs(sum - 1.0));
    }
    DlLinkConfig dl;
    dl.alpha = u(gen);
    dl.m1 = cfg.dl.m1;
    dl.m2 = cfg.dl.m2;
    for (int k = 1; k <= 2; ++k) {
      worst_q = std::max(worst_q, std::abs(generate_q_coefficients(dl, k).weight_sum() - 1.0));
    }
    const UlLinkConfig solo{link.p1, 0.0, link.sigma};
    worst_reduction = std::max(
        worst_reduction, std::abs(ul_bers(h1, h2, solo).ue1 - q_function(std::sqrt(solo.p1) * h1.magnitude() / solo.sigma)));
  }
  check("residual_prob_sum_err", worst_residual, 1e-12);
  check("q_coefficient_sum_err", worst_q, 1e-12);
  check("single_user_ul_err", worst_reduction, 1e-12);
  if (!all) throw NumericalError("self-test failed:\n" + report.str());
  return {t, report.str()};
}

using Handler = CommandOutput (*)(const ExperimentConfig&, const RunOptions&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"ul-ber-curve", ul_ber_curve},     {"ul-position-sweep", ul_position_sweep},
      {"dl-ber-curve", dl_ber_curve},     {"dl-surface", dl_surface},
      {"optimize-ul", optimize_ul_cmd},   {"optimize-dl", optimize_dl_cmd},
      {"simulate", simulate_cmd},         {"self-test", self_test},
  };
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"ul-ber-curve", "ul-position-sweep", "dl-ber-curve", "dl-surface",
                                                 "optimize-ul",  "optimize-dl",       "simulate",     "self-test"};
  return names;
}

CommandOutput run_command(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) throw ConfigError("unknown command '" + name + "'");
  return it->second(cfg, opt);
}

}  // namespace pinch::cli
