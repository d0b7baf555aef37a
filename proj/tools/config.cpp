#include "config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace pinch::cli {

namespace {

using boost::property_tree::ptree;

// Recognized keys per section.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"geometry", {"length", "height", "ue1_x", "ue1_y", "ue2_x", "ue2_y", "carrier_hz", "kappa_db_per_m", "n_eff"}},
      {"noise", {"power", "unit", "interpretation"}},
      {"ul", {"power_unit", "powers", "sweep_powers", "placements", "ber_model", "swap_order"}},
      {"dl",
       {"power_unit", "powers", "m1", "m2", "reference_x", "reference_alpha", "equal_alpha", "surface_power",
        "surface_nx", "surface_nalpha"}},
      {"sim", {"n_symbols", "seed", "chunk", "scenario", "x", "alpha", "power"}},
      {"optimize",
       {"period", "half_width", "fine_half_count", "fine_delta", "envelope_starts", "restarts", "grid_x",
        "grid_alpha", "max_iterations"}},
      {"output", {"path"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& entries) : entries_(entries) {}

  const std::string* raw(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  double real(const std::string& key, double fallback) const {
    const std::string* v = raw(key);
    return v ? parse_real(key, *v) : fallback;
  }

  template <typename Int>
  Int integer(const std::string& key, Int fallback) const {
    const std::string* v = raw(key);
    if (!v) return fallback;
    Int out{};
    const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || end != v->data() + v->size()) bad(key, *v, "an integer");
    return out;
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const {
    const std::string* v = raw(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const std::string& item : split(*v)) out.push_back(parse_real(key, item));
    if (out.empty()) bad(key, *v, "a non-empty list of numbers");
    return out;
  }

  std::string word(const std::string& key, const std::string& fallback,
                   std::initializer_list<const char*> allowed) const {
    const std::string* v = raw(key);
    if (!v) return fallback;
    for (const char* a : allowed) {
      if (*v == a) return *v;
    }
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
    bad(key, *v, list);
  }

  std::string required_word(const std::string& key, std::initializer_list<const char*> allowed) const {
    if (!raw(key)) throw ConfigError("missing required key '" + key + "'");
    return word(key, "", allowed);
  }

  static std::vector<std::string> split(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
  }

  [[noreturn]] static void bad(const std::string& key, const std::string& value, const std::string& expected) {
    throw ConfigError("key '" + key + "': cannot use '" + value + "', expected " + expected);
  }

  static double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size() || !std::isfinite(out)) bad(key, v, "a finite number");
    return out;
  }

 private:
  const std::map<std::string, std::string>& entries_;
};

PowerUnit unit_of(const std::string& s) { return s == "dBW" ? PowerUnit::kDbw : PowerUnit::kDbm; }

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("key '" + key + "': " + what);
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double to_watts(double value, PowerUnit unit) { return dbm_to_watts(to_dbm(value, unit)); }
double to_dbm(double value, PowerUnit unit) { return unit == PowerUnit::kDbw ? value + 30.0 : value; }

double NoiseSection::sigma() const {
  const double w = to_watts(power, unit);
  return std::sqrt(interpretation == NoiseInterpretation::kPerDimension ? w : w / 2.0);
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
  sim.seed = seed;
  entries["sim.seed"] = std::to_string(seed);
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

UlOptimSpec ExperimentConfig::ul_optim_spec(int threads) const {
  UlOptimSpec s;
  s.period = optimize.period;
  s.envelope.half_width = optimize.half_width;
  s.fine_tune.half_count = optimize.fine_half_count;
  s.fine_tune.delta = optimize.fine_delta;
  s.envelope_starts = optimize.envelope_starts;
  s.model = ul.model;
  s.threads = threads;
  return s;
}

DlOptimSpec ExperimentConfig::dl_optim_spec() const {
  DlOptimSpec s;
  s.restarts = optimize.restarts;
  s.seed = sim.seed;
  s.grid_x = optimize.grid_x;
  s.grid_alpha = optimize.grid_alpha;
  s.max_iterations = optimize.max_iterations;
  return s;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    const auto known = schema().find(section);
    if (body.empty() && !body.data().empty()) throw ConfigError("unknown key '" + section + "' outside any section");
    if (known == schema().end()) throw ConfigError("unknown section '[" + section + "]'");
    for (const auto& [key, value] : body) {
      if (!known->second.contains(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
      cfg.entries[section + "." + key] = trim(value.data());
    }
  }
  const Reader r(cfg.entries);

  SystemGeometry& g = cfg.geometry;
  g.length = r.real("geometry.length", 20.0);
  g.height = r.real("geometry.height", 3.0);
  g.ue[0] = {r.real("geometry.ue1_x", 3.0), r.real("geometry.ue1_y", -1.0)};
  g.ue[1] = {r.real("geometry.ue2_x", 18.0), r.real("geometry.ue2_y", 3.0)};
  g.carrier_hz = r.real("geometry.carrier_hz", 28e9);
  g.kappa_db_per_m = r.real("geometry.kappa_db_per_m", 0.1);
  g.n_eff = r.real("geometry.n_eff", 1.4);
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[geometry]: ") + e.what());
  }

  cfg.noise.power = r.real("noise.power", -90.0);
  cfg.noise.unit = unit_of(r.required_word("noise.unit", {"dBm", "dBW"}));
  cfg.noise.interpretation = r.word("noise.interpretation", "per_dimension", {"per_dimension", "total"}) == "total"
                                 ? NoiseInterpretation::kTotal
                                 : NoiseInterpretation::kPerDimension;

  UlSection& ul = cfg.ul;
  ul.unit = unit_of(r.required_word("ul.power_unit", {"dBm", "dBW"}));
  ul.powers = r.reals("ul.powers", {-20, -15, -10, -5, 0, 5});
  ul.sweep_powers = r.reals("ul.sweep_powers", {0.0});
  ul.model = r.word("ul.ber_model", "exact", {"exact", "closed_form"}) == "closed_form" ? UlBerModel::kClosedForm
                                                                                       : UlBerModel::kJointNoise;
  ul.swap_order = r.word("ul.swap_order", "false", {"true", "false"}) == "true";
  const std::string* placements = r.raw("ul.placements");
  for (const std::string& item : Reader::split(placements ? *placements : "optimized, 10.5, 3")) {
    Placement p;
    if (item == "optimized") {
      p.optimized = true;
    } else {
      p.x = Reader::parse_real("ul.placements", item);
      require(p.x >= 0.0 && p.x <= g.length, "ul.placements", "position " + item + " outside [0, L]");
    }
    ul.placements.push_back(p);
  }

  DlSection& dl = cfg.dl;
  dl.unit = unit_of(r.required_word("dl.power_unit", {"dBm", "dBW"}));
  dl.powers = r.reals("dl.powers", {-10, -5, 0, 5, 10, 15, 20});
  dl.m1 = r.integer("dl.m1", 4);
  dl.m2 = r.integer("dl.m2", 16);
  for (const auto& [key, m] : {std::pair{"dl.m1", dl.m1}, std::pair{"dl.m2", dl.m2}}) {
    try {
      validate_order(m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
  }
  dl.reference_x = r.real("dl.reference_x", 10.0);
  dl.reference_alpha = r.real("dl.reference_alpha", 0.9);
  dl.equal_alpha = r.real("dl.equal_alpha", 0.5);
  dl.surface_power = r.real("dl.surface_power", 10.0);
  dl.surface_nx = r.integer("dl.surface_nx", 201);
  dl.surface_nalpha = r.integer("dl.surface_nalpha", 101);
  require(dl.reference_x >= 0.0 && dl.reference_x <= g.length, "dl.reference_x", "outside [0, L]");
  for (const auto& [key, a] : {std::pair{"dl.reference_alpha", dl.reference_alpha},
                               std::pair{"dl.equal_alpha", dl.equal_alpha}}) {
    require(a >= 0.0 && a <= 1.0, key, "must lie in [0, 1]");
  }
  require(dl.surface_nx >= 2, "dl.surface_nx", "must be >= 2");
  require(dl.surface_nalpha >= 2, "dl.surface_nalpha", "must be >= 2");

  SimSection& sim = cfg.sim;
  sim.n_symbols = r.integer<std::uint64_t>("sim.n_symbols", 1'000'000);
  sim.seed = r.integer<std::uint64_t>("sim.seed", 1);
  sim.chunk = r.integer<std::uint64_t>("sim.chunk", 1U << 16);
  sim.scenario = r.word("sim.scenario", "ul", {"ul", "dl"});
  sim.x = r.real("sim.x", 10.5);
  sim.alpha = r.real("sim.alpha", 0.9);
  sim.power = r.real("sim.power", 0.0);
  require(sim.n_symbols >= 1, "sim.n_symbols", "must be >= 1");
  require(sim.chunk >= 1, "sim.chunk", "must be >= 1");
  require(sim.x >= 0.0 && sim.x <= g.length, "sim.x", "outside [0, L]");
  require(sim.alpha >= 0.0 && sim.alpha <= 1.0, "sim.alpha", "must lie in [0, 1]");

  OptimizeSection& op = cfg.optimize;
  op.period = r.real("optimize.period", 0.01);
  op.half_width = r.integer("optimize.half_width", 10);
  op.fine_half_count = r.integer("optimize.fine_half_count", 200);
  op.fine_delta = r.real("optimize.fine_delta", 0.0);
  op.envelope_starts = r.integer("optimize.envelope_starts", 5);
  op.restarts = r.integer("optimize.restarts", 16);
  op.grid_x = r.integer("optimize.grid_x", 41);
  op.grid_alpha = r.integer("optimize.grid_alpha", 21);
  op.max_iterations = r.integer("optimize.max_iterations", 400);
  const double lambda = g.wavelength();
  require(op.period > 0.0 && op.period < lambda, "optimize.period", "must satisfy 0 < T < lambda");
  require(op.half_width >= 0 && (2 * op.half_width + 1) * op.period >= 5.0 * lambda, "optimize.half_width",
          "envelope window must span at least 5 wavelengths");
  require(op.fine_half_count >= 0, "optimize.fine_half_count", "must be >= 0");
  require(op.fine_delta >= 0.0 && op.fine_delta <= lambda / 10.0, "optimize.fine_delta",
          "must lie in [0, lambda / 10] (0 selects lambda / 20)");
  require(op.envelope_starts >= 1, "optimize.envelope_starts", "must be >= 1");
  require(op.restarts >= 0, "optimize.restarts", "must be >= 0");
  require(op.grid_x >= 2, "optimize.grid_x", "must be >= 2");
  require(op.grid_alpha >= 2, "optimize.grid_alpha", "must be >= 2");
  require(op.max_iterations >= 1, "optimize.max_iterations", "must be >= 1");

  cfg.output_path = r.raw("output.path") ? *r.raw("output.path") : "";
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace pinch::cli
