#pragma once

// Flat key = value scenario documents. Every physical key carries its unit as
// a suffix (_hz for ordinary frequencies, _nm, _nm3, _um2, _uw_per_um2, _deg,
// _debye); values are converted to SI on read and back on write.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aers/constants.hpp"
#include "aers/em_corrections.hpp"
#include "aers/errors.hpp"
#include "aers/lindblad.hpp"
#include "aers/physics_models.hpp"

namespace aers {

struct EngineSettings {
  int cavity_levels = 0;  // 0: chosen per run from the coherent cavity amplitude
  int phonon_levels = 4;
  SolverKind solver = SolverKind::automatic;
  int tau_points = 4096;
  double tau_span = 8.0;  // delay window in units of the slowest decay time
};

struct SpectrumSettings {
  std::optional<double> detuning_min;  // rad/s relative to the laser
  std::optional<double> detuning_max;
  int points = 801;
};

struct SweepSpec {
  std::string key;
  std::vector<double> values;  // in the unit of `key`
};

struct EmSettings {
  double sphere_radius = 100e-9;
  double eps_metal_re = -9.53;
  double eps_metal_im = 1.51;
  double eps_substrate = 5.86;
  double molecule_height = 1e-9;
  std::optional<double> wavelength;  // defaults to 2 pi c / omega_l
  std::vector<double> gaps;          // m; empty means 1..20 nm
};

struct Scenario {
  Preset preset = Preset::hybrid;
  ScenarioParams params;
  EngineSettings engine;
  SpectrumSettings spectrum;
  std::optional<SweepSpec> sweep;
  EmSettings em;

  EmGeometry em_geometry() const {
    EmGeometry g;
    g.sphere_radius = em.sphere_radius;
    g.eps_metal = Complex(em.eps_metal_re, em.eps_metal_im);
    g.eps_substrate = em.eps_substrate;
    g.emitter_depth = params.antenna.position_depth;
    g.molecule_height = em.molecule_height;
    g.wavelength = em.wavelength.value_or(2.0 * si::pi * si::c / params.drive.omega_l);
    return g;
  }
  std::vector<double> em_gaps() const { return em.gaps.empty() ? default_gap_grid() : em.gaps; }
};

/// The shipped default: parameter table values with a weak drive.
inline Scenario default_scenario() {
  Scenario s;
  s.params = table1_scenario();
  return s;
}

namespace scenario_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key + ": '" + t + "' is not a number");
  }
  if (!std::isfinite(v)) throw ConfigError(key + ": value must be finite");
  return v;
}

inline int parse_int(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key + ": '" + t + "' is not an integer");
  }
  return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string shortest(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline constexpr const char* si_prefix = "si:";

/// Shortest decimal text t such that parse(t) * scale reproduces `si` bit for
/// bit; values no file-unit decimal can reach are written in SI as "si:<value>".
inline std::string format_scaled(double value_si, double scale) {
  if (scale == 1.0) return shortest(value_si);
  std::string best;
  double x = value_si / scale;
  for (int k = 0; k < 64; ++k) x = std::nextafter(x, -std::numeric_limits<double>::infinity());
  for (int k = 0; k <= 128; ++k, x = std::nextafter(x, std::numeric_limits<double>::infinity())) {
    if (x * scale != value_si) continue;
    std::string t = shortest(x);
    if (best.empty() || t.size() < best.size()) best = std::move(t);
  }
  return best.empty() ? si_prefix + shortest(value_si) : best;
}

/// Inverse of format_scaled.
inline double parse_scaled(const std::string& text, double scale, const std::string& key) {
  if (text.rfind(si_prefix, 0) == 0) return parse_double(trim(text.substr(3)), key);
  return parse_double(text, key) * scale;
}

struct Field {
  std::string key;
  bool required = false;
  std::function<void(Scenario&, const std::string&)> read;
  std::function<std::optional<std::string>(const Scenario&)> write;  // nullopt: omit
  std::function<double&(Scenario&)> numeric;  // for sweeps; empty if not sweepable
  double scale = 1.0;
};

using Ref = std::function<double&(Scenario&)>;
using OptRef = std::function<std::optional<double>&(Scenario&)>;

inline Field number(std::string key, double scale, Ref ref, bool required = true) {
  Field f;
  f.key = key;
  f.required = required;
  f.scale = scale;
  f.read = [key, scale, ref](Scenario& s, const std::string& v) { ref(s) = parse_scaled(v, scale, key); };
  f.write = [scale, ref](const Scenario& s) -> std::optional<std::string> {
    return format_scaled(ref(const_cast<Scenario&>(s)), scale);
  };
  f.numeric = ref;
  return f;
}

inline Field optional_number(std::string key, double scale, OptRef ref) {
  Field f;
  f.key = key;
  f.scale = scale;
  f.read = [key, scale, ref](Scenario& s, const std::string& v) { ref(s) = parse_scaled(v, scale, key); };
  f.write = [scale, ref](const Scenario& s) -> std::optional<std::string> {
    const auto& o = ref(const_cast<Scenario&>(s));
    if (!o) return std::nullopt;
    return format_scaled(*o, scale);
  };
  return f;
}

inline Field integer(std::string key, std::function<int&(Scenario&)> ref) {
  Field f;
  f.key = key;
  f.read = [key, ref](Scenario& s, const std::string& v) { ref(s) = parse_int(v, key); };
  f.write = [ref](const Scenario& s) -> std::optional<std::string> {
    return std::to_string(ref(const_cast<Scenario&>(s)));
  };
  return f;
}

inline Field text(std::string key, bool required, std::function<void(Scenario&, const std::string&)> read,
                  std::function<std::optional<std::string>(const Scenario&)> write) {
  Field f;
  f.key = std::move(key);
  f.required = required;
  f.read = std::move(read);
  f.write = std::move(write);
  return f;
}

inline std::string solver_name(SolverKind k) {
  switch (k) {
    case SolverKind::automatic: return "automatic";
    case SolverKind::direct: return "direct";
    case SolverKind::iterative: return "iterative";
  }
  return "?";
}

inline SolverKind parse_solver(const std::string& s) {
  if (s == "automatic") return SolverKind::automatic;
  if (s == "direct") return SolverKind::direct;
  if (s == "iterative") return SolverKind::iterative;
  throw ConfigError("engine.solver: expected automatic, direct or iterative, got '" + s + "'");
}

inline const std::vector<Field>& fields() {
  const double hz = si::two_pi, nm = 1e-9, nm3 = 1e-27, um2 = 1e-12;
  const double deg = si::pi / 180.0;
  static const std::vector<Field> table = {
      text("preset", true, [](Scenario& s, const std::string& v) { s.preset = parse_preset(v); },
           [](const Scenario& s) { return std::optional(to_string(s.preset)); }),
      number("antenna.omega_sigma_hz", hz, [](Scenario& s) -> double& { return s.params.antenna.omega_sigma; }),
      number("antenna.gamma0_hz", hz, [](Scenario& s) -> double& { return s.params.antenna.gamma0; }),
      number("antenna.gamma_total_hz", hz, [](Scenario& s) -> double& { return s.params.antenna.gamma_total; }),
      number("antenna.depth_nm", nm, [](Scenario& s) -> double& { return s.params.antenna.position_depth; }),
      number("antenna.refractive_index", 1.0,
             [](Scenario& s) -> double& { return s.params.antenna.refractive_index; }),
      optional_number("antenna.dipole_moment_debye", si::debye,
                      [](Scenario& s) -> std::optional<double>& { return s.params.antenna.dipole_moment; }),
      text("cavity.detuning_policy", false,
           [](Scenario& s, const std::string& v) {
             if (v == "explicit") s.params.cavity.detuning_policy = DetuningPolicy::explicit_value;
             else if (v == "stokes_matched") s.params.cavity.detuning_policy = DetuningPolicy::stokes_matched;
             else throw ConfigError("cavity.detuning_policy: expected explicit or stokes_matched, got '" + v + "'");
           },
           [](const Scenario& s) {
             return std::optional<std::string>(s.params.cavity.detuning_policy == DetuningPolicy::stokes_matched
                                                   ? "stokes_matched"
                                                   : "explicit");
           }),
      number("cavity.delta_a_hz", hz, [](Scenario& s) -> double& { return s.params.cavity.delta_a; }, false),
      number("cavity.kappa_hz", hz, [](Scenario& s) -> double& { return s.params.cavity.kappa; }),
      number("cavity.v_eff_nm3", nm3, [](Scenario& s) -> double& { return s.params.cavity.V_eff; }),
      number("cavity.sigma_ext_um2", um2, [](Scenario& s) -> double& { return s.params.cavity.sigma_ext; }),
      number("vibration.omega_b_hz", hz, [](Scenario& s) -> double& { return s.params.vibration.omega_b; }),
      number("vibration.gamma_hz", hz, [](Scenario& s) -> double& { return s.params.vibration.Gamma; }),
      // Raman activity R Q0 entered as a polarizability volume, R Q0 = 4 pi eps0 V.
      number("vibration.raman_volume_nm3", 4.0 * si::pi * si::epsilon0 * nm3,
             [](Scenario& s) -> double& { return s.params.vibration.RQ0; }),
      number("vibration.n_b_th", 1.0, [](Scenario& s) -> double& { return s.params.vibration.n_b_th; }),
      number("drive.intensity_uw_per_um2", si::uw_per_um2,
             [](Scenario& s) -> double& { return s.params.drive.intensity; }),
      number("drive.omega_l_hz", hz, [](Scenario& s) -> double& { return s.params.drive.omega_l; }),
      number("drive.incidence_angle_deg", deg,
             [](Scenario& s) -> double& { return s.params.drive.incidence_angle; }),
      number("drive.n_incident", 1.0, [](Scenario& s) -> double& { return s.params.drive.n_incident; }),
      optional_number("drive.t_p", 1.0, [](Scenario& s) -> std::optional<double>& { return s.params.drive.t_p; }),
      number("drive.spot_area_um2", um2, [](Scenario& s) -> double& { return s.params.drive.spot_area; }),
      number("coupling.separation_nm", nm, [](Scenario& s) -> double& { return s.params.separation_sigma_m; }),
      number("coupling.g_jc_hz", hz, [](Scenario& s) -> double& { return s.params.g_jc; }),
      optional_number("coupling.g0_sigma_hz", hz,
                      [](Scenario& s) -> std::optional<double>& { return s.params.couplings_override.g0_sigma; }),
      optional_number("coupling.g0_a_hz", hz,
                      [](Scenario& s) -> std::optional<double>& { return s.params.couplings_override.g0_a; }),
      optional_number("coupling.g_res_hz", hz, [](Scenario& s) -> std::optional<double>& { return s.params.g_res; }),
      text("engine.cavity_levels", false,
           [](Scenario& s, const std::string& v) {
             s.engine.cavity_levels = v == "auto" ? 0 : parse_int(v, "engine.cavity_levels");
           },
           [](const Scenario& s) {
             return std::optional(s.engine.cavity_levels == 0 ? std::string("auto")
                                                              : std::to_string(s.engine.cavity_levels));
           }),
      integer("engine.phonon_levels", [](Scenario& s) -> int& { return s.engine.phonon_levels; }),
      text("engine.solver", false, [](Scenario& s, const std::string& v) { s.engine.solver = parse_solver(v); },
           [](const Scenario& s) { return std::optional(solver_name(s.engine.solver)); }),
      integer("engine.tau_points", [](Scenario& s) -> int& { return s.engine.tau_points; }),
      number("engine.tau_span", 1.0, [](Scenario& s) -> double& { return s.engine.tau_span; }, false),
      optional_number("spectrum.detuning_min_hz", hz,
                      [](Scenario& s) -> std::optional<double>& { return s.spectrum.detuning_min; }),
      optional_number("spectrum.detuning_max_hz", hz,
                      [](Scenario& s) -> std::optional<double>& { return s.spectrum.detuning_max; }),
      integer("spectrum.points", [](Scenario& s) -> int& { return s.spectrum.points; }),
      text("sweep.key", false,
           [](Scenario& s, const std::string& v) {
             if (!s.sweep) s.sweep.emplace();
             s.sweep->key = v;
           },
           [](const Scenario& s) -> std::optional<std::string> {
             if (!s.sweep) return std::nullopt;
             return s.sweep->key;
           }),
      text("sweep.values", false,
           [](Scenario& s, const std::string& v) {
             if (!s.sweep) s.sweep.emplace();
             s.sweep->values.clear();
             for (const auto& item : split_list(v)) s.sweep->values.push_back(parse_double(item, "sweep.values"));
           },
           [](const Scenario& s) -> std::optional<std::string> {
             if (!s.sweep) return std::nullopt;
             std::string out;
             for (std::size_t i = 0; i < s.sweep->values.size(); ++i) {
               if (i) out += ", ";
               out += shortest(s.sweep->values[i]);
             }
             return out;
           }),
      number("em.radius_nm", nm, [](Scenario& s) -> double& { return s.em.sphere_radius; }, false),
      number("em.eps_metal_re", 1.0, [](Scenario& s) -> double& { return s.em.eps_metal_re; }, false),
      number("em.eps_metal_im", 1.0, [](Scenario& s) -> double& { return s.em.eps_metal_im; }, false),
      number("em.eps_substrate", 1.0, [](Scenario& s) -> double& { return s.em.eps_substrate; }, false),
      number("em.molecule_height_nm", nm, [](Scenario& s) -> double& { return s.em.molecule_height; }, false),
      optional_number("em.wavelength_nm", nm, [](Scenario& s) -> std::optional<double>& { return s.em.wavelength; }),
      text("em.gaps_nm", false,
           [nm](Scenario& s, const std::string& v) {
             s.em.gaps.clear();
             for (const auto& item : split_list(v)) s.em.gaps.push_back(parse_scaled(item, nm, "em.gaps_nm"));
           },
           [nm](const Scenario& s) -> std::optional<std::string> {
             if (s.em.gaps.empty()) return std::nullopt;
             std::string out;
             for (std::size_t i = 0; i < s.em.gaps.size(); ++i) {
               if (i) out += ", ";
               out += format_scaled(s.em.gaps[i], nm);
             }
             return out;
           }),
  };
  return table;
}

inline const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

inline std::string stem(const std::string& key) {
  static const char* suffixes[] = {"_uw_per_um2", "_hz", "_nm3", "_nm", "_um2", "_m2", "_deg", "_debye",
                                   "_thz", "_ghz", "_mhz", "_khz", "_m", "_m3", "_rad", "_s"};
  std::string out = key;
  for (bool again = true; again;) {
    again = false;
    for (const char* sfx : suffixes) {
      const std::string s(sfx);
      if (out.size() > s.size() && out.compare(out.size() - s.size(), s.size(), s) == 0) {
        out.resize(out.size() - s.size());
        again = true;
        break;
      }
    }
  }
  return out;
}

inline std::string unknown_key_message(const std::string& key) {
  const std::string st = stem(key);
  for (const auto& f : fields()) {
    if (stem(f.key) == st && f.key != key) {
      return "unknown key '" + key + "' (unit suffix mismatch: expected '" + f.key + "')";
    }
  }
  return "unknown key '" + key + "'";
}

}  // namespace scenario_detail

/// Parses scenario text. Unknown keys, duplicates, malformed lines and missing
/// required keys raise ConfigError naming the line and key.
inline Scenario parse_scenario(const std::string& text) {
  using namespace scenario_detail;
  Scenario s = default_scenario();
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) throw ConfigError("line " + std::to_string(lineno) + ": " + unknown_key_message(key));
    if (seen.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen[key] = lineno;
    try {
      f->read(s, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (const auto& f : fields()) {
    if (f.required && !seen.count(f.key)) throw ConfigError("missing required key '" + f.key + "'");
  }
  if (s.sweep) {
    if (s.sweep->key.empty()) throw ConfigError("sweep.values given without sweep.key");
    const Field* f = find_field(s.sweep->key);
    if (!f || !f->numeric) throw ConfigError("sweep.key '" + s.sweep->key + "' is not a numeric scenario key");
    if (s.sweep->values.empty()) throw ConfigError("sweep.values must hold at least one value");
  }
  if (s.engine.cavity_levels < 0 || s.engine.phonon_levels < 1) throw ConfigError("engine truncations must be >= 1");
  if (s.engine.tau_points < 2) throw ConfigError("engine.tau_points must be >= 2");
  if (s.spectrum.points < 2) throw ConfigError("spectrum.points must be >= 2");
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str());
}

/// Canonical text: every key in table order, values that re-parse to identical SI.
inline std::string serialize_scenario(const Scenario& s) {
  using namespace scenario_detail;
  std::string out;
  for (const auto& f : fields()) {
    const auto v = f.write(s);
    if (v) out += f.key + " = " + *v + "\n";
  }
  return out;
}

/// FNV-1a 64 of the canonical text, as 16 hex digits.
inline std::string scenario_hash(const Scenario& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize_scenario(s)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Copy of `s` with the swept key set to `value` (in the key's unit).
inline Scenario with_sweep_value(const Scenario& s, const std::string& key, double value) {
  const auto* f = scenario_detail::find_field(key);
  if (!f || !f->numeric) throw ConfigError("'" + key + "' is not a numeric scenario key");
  Scenario out = s;
  f->numeric(out) = value * f->scale;
  return out;
}

}  // namespace aers
