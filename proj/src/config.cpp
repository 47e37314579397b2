#include "nanolaser/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nanolaser/errors.hpp"

namespace nanolaser {

IntegratorConfig Settings::integrator() const {
  IntegratorConfig c;
  c.dt = dt;
  c.scheme = scheme;
  c.seed = seed;
  c.record_stride = record_stride;
  c.noise = noise;
  c.allow_large_dt = allow_large_dt;
  return c;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc{} || r.ptr != end || !std::isfinite(out)) throw std::invalid_argument("expected a number");
  return out;
}

std::uint64_t parse_u64(const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc{} || r.ptr != end) throw std::invalid_argument("expected a non-negative integer");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false");
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw std::invalid_argument("empty list item");
    out.push_back(parse_double(t));
  }
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list");
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s;
}

struct Entry {
  std::function<std::string(const Settings&)> get;
  std::function<void(Settings&, const std::string&)> set;
};

template <class M>
Entry real(M Settings::*m) {
  return {[m](const Settings& s) { return fmt(s.*m); }, [m](Settings& s, const std::string& v) { s.*m = parse_double(v); }};
}
Entry phys(double PhysicalParams::*m) {
  return {[m](const Settings& s) { return fmt(s.physics.*m); },
          [m](Settings& s, const std::string& v) { s.physics.*m = parse_double(v); }};
}
template <class M>
Entry count(M Settings::*m) {
  return {[m](const Settings& s) { return std::to_string(s.*m); },
          [m](Settings& s, const std::string& v) { s.*m = static_cast<M>(parse_u64(v)); }};
}
Entry flag(bool Settings::*m) {
  return {[m](const Settings& s) { return std::string(s.*m ? "true" : "false"); },
          [m](Settings& s, const std::string& v) { s.*m = parse_bool(v); }};
}
Entry list(std::vector<double> Settings::*m) {
  return {[m](const Settings& s) { return fmt_list(s.*m); },
          [m](Settings& s, const std::string& v) { s.*m = parse_list(v); }};
}

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> r = [] {
    std::map<std::string, Entry> m;
    m["kappa"] = phys(&PhysicalParams::kappa);
    m["alpha"] = phys(&PhysicalParams::alpha);
    m["K"] = phys(&PhysicalParams::K);
    m["gamma_c"] = phys(&PhysicalParams::gamma_c);
    m["gamma_par"] = phys(&PhysicalParams::gamma_par);
    m["gamma_tot"] = phys(&PhysicalParams::gamma_tot);
    m["beta"] = phys(&PhysicalParams::beta);
    m["n0"] = phys(&PhysicalParams::n0);
    m["F_P"] = phys(&PhysicalParams::F_P);
    m["B_rec"] = phys(&PhysicalParams::B_rec);
    m["V_a"] = phys(&PhysicalParams::V_a);
    m["P_over_P0"] = real(&Settings::P_over_P0);
    m["dt"] = real(&Settings::dt);
    m["record_stride"] = count(&Settings::record_stride);
    m["scheme"] = {[](const Settings& s) {
                     return std::string(s.scheme == Scheme::EulerMaruyama ? "euler-maruyama" : "split-exponential");
                   },
                   [](Settings& s, const std::string& v) {
                     if (v == "split-exponential") {
                       s.scheme = Scheme::SplitExponential;
                     } else if (v == "euler-maruyama") {
                       s.scheme = Scheme::EulerMaruyama;
                     } else {
                       throw std::invalid_argument("expected split-exponential or euler-maruyama");
                     }
                   }};
    m["allow_large_dt"] = flag(&Settings::allow_large_dt);
    m["seed"] = count(&Settings::seed);
    m["n_traj"] = count(&Settings::n_traj);
    m["relax_ns"] = real(&Settings::relax_ns);
    m["burn_ns"] = real(&Settings::burn_ns);
    m["window_ns"] = real(&Settings::window_ns);
    m["sample_stride"] = count(&Settings::sample_stride);
    m["thin_ns"] = real(&Settings::thin_ns);
    m["fit_lambda"] = flag(&Settings::fit_lambda);
    m["trajectory_steps"] = count(&Settings::trajectory_steps);
    m["noise"] = flag(&Settings::noise);
    m["pump_grid"] = list(&Settings::pump_grid);
    m["beta_grid"] = list(&Settings::beta_grid);
    m["ramp_start"] = real(&Settings::ramp_start);
    m["ramp_end"] = real(&Settings::ramp_end);
    m["ramp_ns"] = real(&Settings::ramp_ns);
    m["bin_ns"] = real(&Settings::bin_ns);
    m["detector_bandwidth_GHz"] = real(&Settings::detector_bandwidth_GHz);
    m["hist_x_bins"] = count(&Settings::hist_x_bins);
    m["hist_I_bins"] = count(&Settings::hist_I_bins);
    return m;
  }();
  return r;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& [name, _] : registry()) k.push_back(name);
  return k;
}

std::string nearest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = SIZE_MAX;
  for (const auto& [name, _] : registry()) {
    const std::size_t d = edit_distance(key, name);
    if (d < best_d) {
      best_d = d;
      best = name;
    }
  }
  return best;
}

void apply_setting(Settings& s, const std::string& key, const std::string& value, int line) {
  const auto it = registry().find(key);
  if (it == registry().end()) {
    throw ConfigError("unknown key '" + key + "' (did you mean '" + nearest_key(key) + "'?)", line);
  }
  try {
    it->second.set(s, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("bad value '" + value + "' for '" + key + "': " + e.what(), line);
  }
}

Settings parse_settings(std::istream& in, Settings base) {
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw.substr(0, raw.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line);
    if (key == "schema") {
      if (value != std::to_string(kConfigSchema)) {
        throw ConfigError("unsupported schema '" + value + "', expected " + std::to_string(kConfigSchema), line);
      }
      continue;
    }
    apply_setting(base, key, value, line);
  }
  return base;
}

Settings load_settings(const std::string& path, Settings base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
  return parse_settings(in, std::move(base));
}

std::pair<std::string, std::string> split_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not of the form key=value");
  return {trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1))};
}

std::string write_settings(const Settings& s) {
  std::string out = "schema = " + std::to_string(kConfigSchema) + "\n";
  for (const auto& [name, e] : registry()) out += name + " = " + e.get(s) + "\n";
  return out;
}

bool operator==(const Settings& a, const Settings& b) {
  for (const auto& [name, e] : registry()) {
    if (e.get(a) != e.get(b)) return false;
  }
  return true;
}

}  // namespace nanolaser
