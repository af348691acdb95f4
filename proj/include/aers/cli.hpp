#pragma once

// Command-line drivers: params | spectrum | sweep | em. Each command writes a
// CSV plus a JSON sidecar carrying the canonical scenario and its hash.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "aers/analytic_spectra.hpp"
#include "aers/em_corrections.hpp"
#include "aers/errors.hpp"
#include "aers/lindblad.hpp"
#include "aers/physics_models.hpp"
#include "aers/scenario.hpp"

namespace aers {

inline constexpr const char* tool_version = "1.0.0";

enum class Method { numeric, linearized, mollow };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::numeric: return "numeric";
    case Method::linearized: return "linearized";
    case Method::mollow: return "mollow";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "numeric") return Method::numeric;
  if (s == "linearized") return Method::linearized;
  if (s == "mollow") return Method::mollow;
  throw ConfigError("--method: expected numeric, linearized or mollow, got '" + s + "'");
}

struct CliOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  Method method = Method::numeric;
  bool strict = false;
  int workers = 1;
  std::optional<std::pair<int, int>> truncation;
  bool unit_factors = false;
};

inline std::pair<int, int> parse_truncation(const std::string& text) {
  const auto parts = scenario_detail::split_list(text);
  if (parts.size() != 2) throw ConfigError("--truncation expects Na,Nb");
  const int na = scenario_detail::parse_int(parts[0], "--truncation");
  const int nb = scenario_detail::parse_int(parts[1], "--truncation");
  if (na < 1 || nb < 1) throw ConfigError("--truncation levels must be >= 1");
  return {na, nb};
}

// ---------------------------------------------------------------- output

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_value(row[i]);
    out += "\n";
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << content;
}

inline nlohmann::ordered_json sidecar(const std::string& command, const Scenario& s) {
  nlohmann::ordered_json j;
  j["tool"] = "aers";
  j["version"] = tool_version;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["command"] = command;
  j["scenario_hash"] = scenario_hash(s);
  j["scenario"] = serialize_scenario(s);
  return j;
}

inline void emit(const CliOptions& o, const std::string& stem, const std::string& csv, nlohmann::ordered_json meta) {
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / (stem + ".csv"), csv);
  write_file(dir / (stem + ".json"), meta.dump(2) + "\n");
}

// ---------------------------------------------------------------- engine glue

inline HilbertConfig resolve_truncation(const Scenario& s, const ScenarioParams& p,
                                        const std::optional<std::pair<int, int>>& override_levels) {
  HilbertConfig cfg;
  if (override_levels) {
    cfg.cavity_levels = override_levels->first;
    cfg.phonon_levels = override_levels->second;
  } else {
    cfg.cavity_levels = s.engine.cavity_levels > 0 ? s.engine.cavity_levels : adaptive_cavity_levels(p);
    cfg.phonon_levels = s.engine.phonon_levels;
  }
  cfg.validate();
  return cfg;
}

struct NumericPeaks {
  double stokes = std::numeric_limits<double>::quiet_NaN();
  double antistokes = std::numeric_limits<double>::quiet_NaN();
  double population = 0.0;
  Complex coherence = 0.0;
  Complex cavity = 0.0;
  double phonons = 0.0;
  std::vector<std::string> warnings;
};

/// Steady state plus Stokes / anti-Stokes maxima of the incoherent cavity
/// spectrum, each searched within two vibrational linewidths of the line.
inline NumericPeaks numeric_peaks(const ScenarioParams& p, Preset preset, const HilbertConfig& cfg,
                                  SolverKind solver) {
  const Model m = build_full_model(p, cfg, preset);
  const Liouvillian l = m.liouvillian();
  SteadyStateOptions opt;
  opt.solver = solver;
  const SteadyStateResult ss = steady_state(l, opt);
  NumericPeaks out;
  out.warnings = ss.warnings;
  out.population = expectation(m.sigma.adjoint() * m.sigma, ss.rho).real();
  out.coherence = expectation(m.sigma, ss.rho);
  if (!m.a) return out;
  out.cavity = expectation(*m.a, ss.rho);
  out.phonons = expectation(m.b->adjoint() * *m.b, ss.rho).real();
  ResolventSpectrum rs(l, ss.rho, m.a->adjoint(), *m.a, m.omega_l, solver);
  const double G = p.vibration.Gamma;
  const double ws = p.omega_stokes(), was = p.omega_antistokes();
  out.stokes = rs.peak(ws - 2.0 * G, ws + 2.0 * G).second;
  out.antistokes = rs.peak(was - 2.0 * G, was + 2.0 * G).second;
  return out;
}

inline std::vector<double> spectrum_grid(const Scenario& s, const ScenarioParams& p) {
  const double lo = s.spectrum.detuning_min.value_or(-1.5 * p.vibration.omega_b);
  const double hi = s.spectrum.detuning_max.value_or(1.5 * p.vibration.omega_b);
  if (!(hi > lo)) throw ConfigError("spectrum detuning range must satisfy min < max");
  const int n = s.spectrum.points;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = p.drive.omega_l + lo + (hi - lo) * i / (n - 1);
  return w;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads; results keep input order.
template <class R, class F>
std::vector<R> ordered_parallel(std::size_t n, int workers, F fn) {
  std::vector<R> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < count; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

inline void enforce_strict(const CliOptions& o, const std::vector<std::string>& warnings) {
  if (o.strict && !warnings.empty()) throw ModelValidityError(warnings.front());
}

// ---------------------------------------------------------------- commands

inline int cmd_params(const Scenario& s, const CliOptions& o) {
  const ScenarioParams& p = s.params;
  const DerivedParams d = derive_parameters(p);
  enforce_strict(o, d.warnings);
  const double ev = si::hbar / si::e_charge;
  const double uw = si::uw_per_um2;
  const EfficiencyReport eff = stokes_power_and_efficiency(p, CouplingChoice::sigma);
  struct Row {
    const char* name;
    double value;
    const char* unit;
    const char* formula;
  };
  const std::vector<Row> rows = {
      {"d_sigma", d.d_sigma / si::debye, "D", "sqrt(3 pi eps0 hbar c^3 gamma0 / (n omega_sigma^3))"},
      {"t_p", d.t_p, "1", "2 n1 cos(ti) / (n2 cos(ti) + n1 cos(tt))"},
      {"e_sigma", d.e_sigma, "V/m", "d_sigma / (4 pi eps0 r^3)"},
      {"e_a", d.e_a, "V/m", "sqrt(hbar omega_a / (2 eps0 V_eff))"},
      {"omega_a", si::rad_to_hz(d.omega_a), "Hz", "detuning policy"},
      {"Q", d.Q, "1", "omega_a / kappa"},
      {"hbar_g0_sigma", d.g0_sigma * ev, "eV", "R Q0 e_sigma e_a / 2"},
      {"hbar_g0_a", d.g0_a * ev, "eV", "R Q0 e_a^2 / 2"},
      {"hbar_g0_a_literal", d.g0_a_literal * ev, "eV", "R Q0 omega_a / (2 eps0 V_eff)"},
      {"C0_sigma", d.coop.C0_sigma, "1", "4 g0_sigma^2 / (gamma Gamma)"},
      {"C0_a", d.coop.C0_a, "1", "4 g0_a^2 / (kappa Gamma)"},
      {"antenna_intensity", d.antenna_intensity / uw, "uW/um^2", "|alpha_sigma| = 1 at zero detuning"},
      {"plasmon_threshold", d.plasmon_threshold / uw, "uW/um^2", "kappa^2 hbar Q / sigma_ext"},
      {"Omega", si::rad_to_hz(d.Omega), "Hz", "d_sigma t_p sqrt(4 I / (c eps0)) / hbar"},
      {"alpha_sigma_sq", std::norm(d.alpha_sigma), "1", "Omega^2 / (Delta^2 + gamma^2/4)"},
      {"Omega_a", si::rad_to_hz(d.Omega_a), "Hz", "sqrt(I sigma_ext / (4 hbar Q))"},
      {"alpha_a_sq", std::norm(d.alpha_a), "1", "Omega_a^2 / (Delta_a^2 + kappa^2/4)"},
      {"eta_prime", eff.eta_prime, "kg/s", "omega_l omega_S^3 d_a^2 (n+1) 8pi/3 / (4 pi^2 eps0 c^3 D+ sigma_spot)"},
      {"eta_sigma", eff.eta_sigma, "1", "eta' g0_sigma^2 |alpha_sigma|^2 / I"},
      {"eta_a", eff.eta_a, "1", "eta' g0_a^2 |alpha_a|^2 / I"},
      {"stokes_flux", eff.stokes_flux, "1/s", "P_S / (hbar omega_S)"},
      {"pump_flux", eff.pump_flux, "1/s", "I sigma_spot / (hbar omega_l)"},
  };
  std::string csv = "quantity,value,unit,formula\n";
  for (const auto& r : rows) {
    csv += std::string(r.name) + "," + format_value(r.value) + "," + r.unit + ",\"" + r.formula + "\"\n";
    std::printf("%-20s %14.6e %-8s %s\n", r.name, r.value, r.unit, r.formula);
  }
  auto meta = sidecar("params", s);
  meta["warnings"] = d.warnings;
  emit(o, "params", csv, meta);
  return 0;
}

inline int cmd_spectrum(const Scenario& s, const CliOptions& o) {
  const ScenarioParams& p = s.params;
  const DerivedParams d = derive_parameters(p);
  std::vector<std::string> warnings = d.warnings;
  auto meta = sidecar("spectrum", s);
  meta["method"] = to_string(o.method);
  SpectrumResult result;

  if (o.method == Method::numeric) {
    if (s.preset == Preset::antenna_only) {
      const Model m = build_antenna_model(p, d);
      const Liouvillian l = m.liouvillian();
      SteadyStateOptions opt;
      opt.solver = s.engine.solver;
      const SteadyStateResult ss = steady_state(l, opt);
      warnings.insert(warnings.end(), ss.warnings.begin(), ss.warnings.end());
      const auto tau = default_tau_grid(l, s.engine.tau_points, s.engine.tau_span);
      const CorrelationSeries c = two_time_correlator(l, ss.rho, m.sigma.adjoint(), m.sigma, tau);
      std::optional<std::vector<double>> nu;
      if (s.spectrum.detuning_min || s.spectrum.detuning_max) {
        std::vector<double> g = spectrum_grid(s, p);
        for (double& w : g) w -= p.drive.omega_l;
        nu = g;
      }
      result = spectrum_from_correlator(c, p.drive.omega_l, true, nu);
      meta["grid"] = {{"tau_max_s", tau.back()}, {"tau_points", tau.size()}};
      meta["truncation"] = {{"dimension", 2}};
    } else {
      const HilbertConfig cfg = resolve_truncation(s, p, o.truncation);
      const Model m = build_full_model(p, cfg, s.preset);
      const Liouvillian l = m.liouvillian();
      SteadyStateOptions opt;
      opt.solver = s.engine.solver;
      const SteadyStateResult ss = steady_state(l, opt);
      warnings.insert(warnings.end(), ss.warnings.begin(), ss.warnings.end());
      ResolventSpectrum rs(l, ss.rho, m.a->adjoint(), *m.a, m.omega_l, s.engine.solver);
      result = rs.evaluate(spectrum_grid(s, p));
      meta["truncation"] = {{"cavity_levels", cfg.cavity_levels}, {"phonon_levels", cfg.phonon_levels}};
      meta["solver"] = ss.solver;
    }
  } else {
    if (s.preset == Preset::antenna_only) throw ConfigError("analytic methods need a cavity preset");
    LinearizedInputs in = linearized_inputs(p, s.preset);
    if (in.markov_violated()) warnings.push_back("Markov condition violated: Gamma > kappa/10");
    if (o.method == Method::linearized) {
      result = linearized_spectrum(in, spectrum_grid(s, p));
    } else {
      const BlochSteadyState b = bloch_steady_state(d.Omega, p.delta_sigma(), p.antenna.gamma_total);
      result = mollow_regime_spectrum(d.g0_sigma, incoherent_population(b.population, b.coherence), in,
                                      spectrum_grid(s, p));
    }
  }
  warnings.insert(warnings.end(), result.diagnostics.begin(), result.diagnostics.end());
  enforce_strict(o, warnings);

  Table t{{"omega_abs_hz", "density"}, {}};
  for (std::size_t i = 0; i < result.omega.size(); ++i) {
    t.rows.push_back({si::rad_to_hz(result.omega[i]), result.density[i]});
  }
  meta["points"] = result.omega.size();
  meta["clipped_negatives"] = result.clipped_count;
  meta["warnings"] = warnings;
  emit(o, "spectrum_" + to_string(o.method), to_csv(t), meta);
  std::printf("spectrum (%s, %s): %zu points\n", to_string(o.method).c_str(), to_string(s.preset).c_str(),
              result.omega.size());
  return 0;
}

struct SweepRow {
  std::vector<double> values;
  std::vector<std::string> warnings;
};

inline SweepRow sweep_row(const Scenario& base, const CliOptions& o, double value) {
  const Scenario s = with_sweep_value(base, base.sweep->key, value);
  const ScenarioParams& p = s.params;
  const DerivedParams d = derive_parameters(p);
  SweepRow row;
  row.warnings = d.warnings;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double coh2 = nan, pop = nan, st = nan, ast = nan, cst = nan, cast = nan, na = 0;

  if (o.method == Method::numeric) {
    if (s.preset == Preset::antenna_only) {
      const Model m = build_antenna_model(p, d);
      SteadyStateOptions opt;
      opt.solver = s.engine.solver;
      const SteadyStateResult ss = steady_state(m.liouvillian(), opt);
      pop = expectation(m.sigma.adjoint() * m.sigma, ss.rho).real();
      coh2 = std::norm(expectation(m.sigma, ss.rho));
      row.warnings.insert(row.warnings.end(), ss.warnings.begin(), ss.warnings.end());
    } else {
      const HilbertConfig cfg = resolve_truncation(s, p, o.truncation);
      na = cfg.cavity_levels;
      const NumericPeaks main = numeric_peaks(p, s.preset, cfg, s.engine.solver);
      const NumericPeaks conv = numeric_peaks(p, Preset::conventional, cfg, s.engine.solver);
      pop = main.population;
      coh2 = std::norm(main.coherence);
      st = main.stokes;
      ast = main.antistokes;
      cst = conv.stokes;
      cast = conv.antistokes;
      row.warnings.insert(row.warnings.end(), main.warnings.begin(), main.warnings.end());
    }
  } else {
    const BlochSteadyState b = bloch_steady_state(d.Omega, p.delta_sigma(), p.antenna.gamma_total);
    pop = b.population;
    coh2 = std::norm(b.coherence);
    if (s.preset != Preset::antenna_only) {
      LinearizedInputs in = linearized_inputs(p, s.preset);
      if (o.method == Method::mollow) {
        in.g_eff = Complex(d.g0_sigma * std::sqrt(incoherent_population(b.population, b.coherence)), 0.0);
      }
      const PeakPair main = peak_intensities(in);
      const PeakPair conv = peak_intensities(linearized_inputs(p, Preset::conventional));
      st = main.stokes;
      ast = main.antistokes;
      cst = conv.stokes;
      cast = conv.antistokes;
    }
  }
  row.values = {value, coh2, pop, st, ast, cst, cast, na};
  return row;
}

inline int cmd_sweep(const Scenario& s, const CliOptions& o) {
  if (!s.sweep) throw ConfigError("sweep command needs sweep.key and sweep.values in the scenario");
  const auto rows = ordered_parallel<SweepRow>(s.sweep->values.size(), o.workers,
                                               [&](std::size_t i) { return sweep_row(s, o, s.sweep->values[i]); });
  Table t{{s.sweep->key, "coherence_sq", "population", "stokes_peak", "antistokes_peak", "conv_stokes_peak",
           "conv_antistokes_peak", "cavity_levels"},
          {}};
  std::vector<std::string> warnings;
  for (const auto& r : rows) {
    t.rows.push_back(r.values);
    for (const auto& w : r.warnings) {
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
    }
  }
  enforce_strict(o, warnings);
  auto meta = sidecar("sweep", s);
  meta["method"] = to_string(o.method);
  meta["rows"] = rows.size();
  if (o.truncation) meta["truncation"] = {o.truncation->first, o.truncation->second};
  meta["warnings"] = warnings;
  emit(o, "sweep_" + to_string(o.method), to_csv(t), meta);
  std::printf("sweep (%s): %zu rows\n", to_string(o.method).c_str(), rows.size());
  return 0;
}

inline int cmd_em(const Scenario& s, const CliOptions& o) {
  const EmGeometry g = s.em_geometry();
  const auto gaps = s.em_gaps();
  const auto rows = corrected_efficiency_sweep(s.params, gaps, g, o.unit_factors);
  Table t{{"gap_nm", "K_inc_sq", "K_mol", "F_P", "gamma_over_gamma_tot", "eta_sigma", "corrected_eta_sigma", "eta_a"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.gap_d / si::nm, r.factors.K_inc * r.factors.K_inc, r.factors.K_mol, r.factors.F_P,
                      1.0 / r.factors.gamma_tot_over_gamma, r.eta_sigma, r.corrected_eta_sigma, r.eta_a});
  }
  auto meta = sidecar("em", s);
  meta["unit_factors"] = o.unit_factors;
  meta["rows"] = rows.size();
  emit(o, "em", to_csv(t), meta);
  std::printf("em: %zu gaps\n", rows.size());
  return 0;
}

// ---------------------------------------------------------------- entry point

/// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
/// 4 model-validity violation.
inline int run(int argc, char** argv) {
  CLI::App app{"Atomic-antenna Raman scattering simulator"};
  app.require_subcommand(1, 1);
  CliOptions o;
  std::string method = "numeric", truncation;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario_path, "scenario file (defaults to the built-in parameter table)");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_flag("--strict", o.strict, "treat model-validity warnings as errors");
  };
  auto* params = app.add_subcommand("params", "derived parameter report");
  auto* spectrum = app.add_subcommand("spectrum", "emission spectrum");
  auto* sweep = app.add_subcommand("sweep", "parameter sweep of populations and Raman peaks");
  auto* em = app.add_subcommand("em", "nanoparticle-corrected efficiencies across gap distances");
  for (auto* sub : {params, spectrum, sweep, em}) add_common(sub);
  for (auto* sub : {spectrum, sweep}) {
    sub->add_option("--method", method, "numeric | linearized | mollow");
    sub->add_option("--truncation", truncation, "cavity and phonon levels, Na,Nb");
  }
  sweep->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  em->add_flag("--unit-factors", o.unit_factors, "force all correction factors to 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    o.method = parse_method(method);
    if (!truncation.empty()) o.truncation = parse_truncation(truncation);
    const Scenario s = o.scenario_path.empty() ? default_scenario() : load_scenario(o.scenario_path);
    if (*params) return cmd_params(s, o);
    if (*spectrum) return cmd_spectrum(s, o);
    if (*sweep) return cmd_sweep(s, o);
    return cmd_em(s, o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ModelValidityError& e) {
    std::cerr << "model validity: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace aers
