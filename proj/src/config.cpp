#include "odmr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace odmr {

std::vector<std::string> SimParams::validate() const {
  rates.validate();
  std::vector<std::string> notes;
  if (zfs.d_mhz == 0.0 && zfs.e_mhz == 0.0)
    throw std::invalid_argument("config: zero-field splitting is identically zero");
  if (!zfs.conventional())
    notes.push_back("zfs: |e| exceeds |d|/3, parameters are outside the usual convention");
  if (cw_pump_rate <= 0.0 || pulsed_pump_rate <= 0.0)
    throw std::invalid_argument("config: pump rates must be > 0");
  if (cw_mixing_rate <= 0.0) throw std::invalid_argument("config: cw mixing rate must be > 0");
  if (cw_linewidth_mhz <= 0.0) throw std::invalid_argument("config: cw linewidth must be > 0");
  if (readout_delay_us < 0.0 || readout_window_us <= 0.0)
    throw std::invalid_argument("config: readout delay must be >= 0 and window > 0");
  if (decoherence.sigma_inh_mhz < 0.0)
    throw std::invalid_argument("config: inhomogeneous spread must be >= 0");
  if (quadrature_order < 1 || quadrature_order > 200)
    throw std::invalid_argument("config: quadrature order must be in [1, 200]");
  if (map_direction.norm() == 0.0)
    throw std::invalid_argument("config: field map direction must be nonzero");
  if (drive_kappa <= 0.0) throw std::invalid_argument("config: drive kappa must be > 0");

  // coherences must not outlive the populations they connect
  for (spin::Pair p : {spin::Pair::xy, spin::Pair::yz, spin::Pair::xz}) {
    double t2 = decoherence.t2(p);
    if (t2 <= 0.0) throw std::invalid_argument("config: T2 must be > 0");
    auto [a, b] = spin::pair_levels(p);
    double kmean = 0.5 * (rates.depop_rates(int(a)) + rates.depop_rates(int(b)));
    if (1.0 / t2 < kmean - 1e-12)
      throw std::invalid_argument(
          std::string("config: T2 of pair ") + spin::pair_name(p) +
          " exceeds the population-decay bound 2/(k_a + k_b), state would not stay physical");
  }
  return notes;
}

double t2star_us_from_sigma(double sigma_mhz) {
  if (sigma_mhz <= 0.0) throw std::invalid_argument("sigma must be > 0");
  return 1.0 / (std::numbers::sqrt2 * std::numbers::pi * sigma_mhz);
}

double sigma_mhz_from_t2star(double t2star_us) {
  if (t2star_us <= 0.0) throw std::invalid_argument("T2* must be > 0");
  return 1.0 / (std::numbers::sqrt2 * std::numbers::pi * t2star_us);
}

}  // namespace odmr

namespace odmr::config {

namespace {

struct Entry {
  std::vector<double> values;
  int line = 0;
  bool used = false;
};

using Table = std::map<std::string, Entry>;  // "section.key" -> values

bool parse_double_tok(const std::string& s, double& out) {
  const char* b = s.data();
  auto [ptr, ec] = std::from_chars(b, b + s.size(), out);
  return ec == std::errc() && ptr == b + s.size() && std::isfinite(out);
}

std::string trim(std::string s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, b - a + 1);
}

Table parse_ini(const std::string& text, const std::string& origin) {
  Table table;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (section.empty()) fail("key '" + key + "' outside any [section]");
    std::string full = section + "." + key;
    if (table.count(full)) fail("duplicate key '" + full + "'");
    Entry e;
    e.line = line_no;
    std::istringstream vs(value);
    std::string tok;
    while (vs >> tok) {
      double d;
      if (!parse_double_tok(tok, d)) fail("value of '" + full + "' is not numeric: '" + tok + "'");
      e.values.push_back(d);
    }
    if (e.values.empty()) fail("key '" + full + "' has no value");
    table[full] = std::move(e);
  }
  return table;
}

class Reader {
 public:
  Reader(Table table, std::string origin) : table_(std::move(table)), origin_(std::move(origin)) {}

  bool scalar(const std::string& key, double& out) { return take(key, 1, &out); }
  bool integer(const std::string& key, int& out) {
    double d;
    if (!take(key, 1, &d)) return false;
    if (d != std::floor(d))
      throw std::runtime_error(origin_ + ": key '" + key + "' must be an integer");
    out = int(d);
    return true;
  }
  bool vec3(const std::string& key, Eigen::Vector3d& out) {
    double v[3];
    if (!take(key, 3, v)) return false;
    out = Eigen::Vector3d(v[0], v[1], v[2]);
    return true;
  }

  void check_unknown() const {
    for (const auto& [key, e] : table_)
      if (!e.used)
        throw std::runtime_error(origin_ + ":" + std::to_string(e.line) + ": unknown key '" +
                                 key + "'");
  }

 private:
  bool take(const std::string& key, size_t n, double* out) {
    auto it = table_.find(key);
    if (it == table_.end()) return false;
    if (it->second.values.size() != n)
      throw std::runtime_error(origin_ + ":" + std::to_string(it->second.line) + ": key '" + key +
                               "' expects " + std::to_string(n) + " value(s), got " +
                               std::to_string(it->second.values.size()));
    for (size_t i = 0; i < n; ++i) out[i] = it->second.values[i];
    it->second.used = true;
    return true;
  }

  Table table_;
  std::string origin_;
};

SimParams read_params(Reader& r) {
  SimParams p;
  r.scalar("zfs.d", p.zfs.d_mhz);
  r.scalar("zfs.e", p.zfs.e_mhz);

  r.scalar("kinetics.s1_decay", p.rates.s1_decay_rate);
  r.scalar("kinetics.isc_yield", p.rates.isc_yield);
  r.vec3("kinetics.branching", p.rates.branching);
  Eigen::Vector3d lifetimes;
  if (r.vec3("kinetics.lifetimes", lifetimes)) {
    if ((lifetimes.array() <= 0.0).any())
      throw std::runtime_error("config: kinetics.lifetimes must be > 0");
    p.rates.depop_rates = lifetimes.cwiseInverse();
  }

  r.scalar("pump.cw_rate", p.cw_pump_rate);
  r.scalar("pump.pulsed_rate", p.pulsed_pump_rate);

  r.scalar("coherence.t2_xy", p.decoherence.t2_us[0]);
  r.scalar("coherence.t2_yz", p.decoherence.t2_us[1]);
  r.scalar("coherence.t2_xz", p.decoherence.t2_us[2]);
  double t2star;
  bool have_sigma = r.scalar("coherence.sigma_inh", p.decoherence.sigma_inh_mhz);
  if (r.scalar("coherence.t2_star", t2star)) {
    if (have_sigma)
      throw std::runtime_error("config: give either coherence.sigma_inh or coherence.t2_star");
    p.decoherence.sigma_inh_mhz = sigma_mhz_from_t2star(t2star);
  }

  r.scalar("cw.mixing_rate", p.cw_mixing_rate);
  r.scalar("cw.linewidth", p.cw_linewidth_mhz);

  r.scalar("readout.delay", p.readout_delay_us);
  r.scalar("readout.window", p.readout_window_us);

  r.vec3("field.b_lab", p.b_lab_mt);
  r.scalar("field.site_b_angle", p.site_b_angle_deg);
  r.vec3("field.map_direction", p.map_direction);

  r.scalar("drive.kappa", p.drive_kappa);
  r.integer("ensemble.quadrature_order", p.quadrature_order);

  r.check_unknown();
  return p;
}

}  // namespace

Loaded load_text(const std::string& text, const std::string& origin) {
  Reader r(parse_ini(text, origin), origin);
  Loaded out;
  out.params = read_params(r);
  out.warnings = out.params.validate();
  return out;
}

Loaded load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_text(ss.str(), path);
}

std::map<std::string, std::vector<double>> to_key_values(const SimParams& p) {
  std::map<std::string, std::vector<double>> kv;
  kv["zfs.d"] = {p.zfs.d_mhz};
  kv["zfs.e"] = {p.zfs.e_mhz};
  kv["kinetics.s1_decay"] = {p.rates.s1_decay_rate};
  kv["kinetics.isc_yield"] = {p.rates.isc_yield};
  kv["kinetics.branching"] = {p.rates.branching(0), p.rates.branching(1), p.rates.branching(2)};
  kv["kinetics.lifetimes"] = {1.0 / p.rates.depop_rates(0), 1.0 / p.rates.depop_rates(1),
                              1.0 / p.rates.depop_rates(2)};
  kv["pump.cw_rate"] = {p.cw_pump_rate};
  kv["pump.pulsed_rate"] = {p.pulsed_pump_rate};
  kv["coherence.t2_xy"] = {p.decoherence.t2_us[0]};
  kv["coherence.t2_yz"] = {p.decoherence.t2_us[1]};
  kv["coherence.t2_xz"] = {p.decoherence.t2_us[2]};
  kv["coherence.sigma_inh"] = {p.decoherence.sigma_inh_mhz};
  kv["cw.mixing_rate"] = {p.cw_mixing_rate};
  kv["cw.linewidth"] = {p.cw_linewidth_mhz};
  kv["readout.delay"] = {p.readout_delay_us};
  kv["readout.window"] = {p.readout_window_us};
  kv["field.b_lab"] = {p.b_lab_mt(0), p.b_lab_mt(1), p.b_lab_mt(2)};
  kv["field.site_b_angle"] = {p.site_b_angle_deg};
  kv["field.map_direction"] = {p.map_direction(0), p.map_direction(1), p.map_direction(2)};
  kv["drive.kappa"] = {p.drive_kappa};
  kv["ensemble.quadrature_order"] = {double(p.quadrature_order)};
  return kv;
}

SimParams from_key_values(const std::map<std::string, std::vector<double>>& kv,
                          std::vector<std::string>* warnings) {
  Table table;
  for (const auto& [key, values] : kv) {
    Entry e;
    e.values = values;
    table[key] = std::move(e);
  }
  Reader r(std::move(table), "<sidecar>");
  SimParams p = read_params(r);
  auto notes = p.validate();
  if (warnings) *warnings = std::move(notes);
  return p;
}

}  // namespace odmr::config
