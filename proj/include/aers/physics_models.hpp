#pragma once

// Parameter derivations for the antenna / cavity / vibration system and the
// Hamiltonians + dissipators handed to the Lindblad engine.

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "aers/constants.hpp"
#include "aers/errors.hpp"
#include "aers/lindblad.hpp"
#include "aers/quantum_core.hpp"

namespace aers {

// ---------------------------------------------------------------- params

struct AntennaParams {
  double omega_sigma = 0.0;       // rad/s
  double gamma0 = 0.0;            // rad/s, radiative
  double gamma_total = 0.0;       // rad/s
  double position_depth = 0.0;    // m below the surface
  double refractive_index = 1.0;  // host medium
  std::optional<double> dipole_moment;  // C m; derived from gamma0 when absent
};

enum class DetuningPolicy { stokes_matched, explicit_value };

struct CavityParams {
  double kappa = 0.0;      // rad/s
  double V_eff = 0.0;      // m^3
  double sigma_ext = 0.0;  // m^2
  DetuningPolicy detuning_policy = DetuningPolicy::explicit_value;
  double delta_a = 0.0;    // omega_a - omega_l, rad/s (explicit policy only)
};

struct VibrationParams {
  double omega_b = 0.0;  // rad/s
  double Gamma = 0.0;    // rad/s
  double RQ0 = 0.0;      // C m^2 / V  (4 pi eps0 x volume)
  double n_b_th = 0.0;
};

struct DriveParams {
  double intensity = 0.0;        // W/m^2
  double omega_l = 0.0;          // rad/s
  double incidence_angle = 0.0;  // rad
  double n_incident = 1.0;
  std::optional<double> t_p;     // Fresnel amplitude; derived when absent
  double spot_area = 0.0;        // m^2
};

struct CouplingOverride {
  std::optional<double> g0_sigma;  // rad/s
  std::optional<double> g0_a;      // rad/s
};

struct ScenarioParams {
  AntennaParams antenna;
  CavityParams cavity;
  VibrationParams vibration;
  DriveParams drive;
  double separation_sigma_m = 0.0;  // m
  double g_jc = 0.0;                // rad/s
  CouplingOverride couplings_override;
  std::optional<double> g_res;      // rad/s, resonant-SERRS preset only

  double omega_a() const {
    return cavity.detuning_policy == DetuningPolicy::stokes_matched ? drive.omega_l - vibration.omega_b
                                                                   : drive.omega_l + cavity.delta_a;
  }
  double delta_a() const { return omega_a() - drive.omega_l; }
  double delta_sigma() const { return antenna.omega_sigma - drive.omega_l; }
  double omega_stokes() const { return drive.omega_l - vibration.omega_b; }
  double omega_antistokes() const { return drive.omega_l + vibration.omega_b; }
};

/// Shipped defaults (the published parameter table). Intensity defaults to a
/// weak Heitler-regime value.
inline ScenarioParams table1_scenario() {
  using si::hz_to_rad;
  ScenarioParams p;
  p.antenna.omega_sigma = hz_to_rad(498e12);
  p.antenna.gamma0 = hz_to_rad(25e6);
  p.antenna.gamma_total = 4.0 * p.antenna.gamma0;
  p.antenna.position_depth = 2e-9;
  p.antenna.refractive_index = 2.42;

  p.cavity.kappa = hz_to_rad(50e12);
  p.cavity.V_eff = 1e3 * 1e-27;
  p.cavity.sigma_ext = 1e-13;
  p.cavity.detuning_policy = DetuningPolicy::explicit_value;
  p.cavity.delta_a = 0.0;

  p.vibration.omega_b = hz_to_rad(40e12);
  p.vibration.Gamma = hz_to_rad(1e12);
  p.vibration.RQ0 = 4.0 * si::pi * si::epsilon0 * 2e-30;
  p.vibration.n_b_th = 5e-2;

  p.drive.intensity = 1e-4 * si::uw_per_um2;
  p.drive.omega_l = p.antenna.omega_sigma;
  p.drive.incidence_angle = 60.0 * si::pi / 180.0;
  p.drive.n_incident = 1.0;
  p.drive.spot_area = 1e-12;

  p.separation_sigma_m = 3e-9;
  p.g_jc = 1e11;
  return p;
}

// ---------------------------------------------------------------- formulas

inline void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be finite and >= 0");
}
inline void require_pos(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be finite and > 0");
}

/// |d| = sqrt(gamma0 * 3 pi eps0 hbar c^3 / (n omega^3)).
inline double derive_dipole_moment(double gamma0, double omega_sigma, double n) {
  require_nonneg(gamma0, "gamma0");
  require_pos(omega_sigma, "omega_sigma");
  require_pos(n, "refractive index");
  return std::sqrt(gamma0 * 3.0 * si::pi * si::epsilon0 * si::hbar * std::pow(si::c, 3) /
                   (n * std::pow(omega_sigma, 3)));
}

/// p-polarized amplitude transmission 2 n1 cos(ti) / (n2 cos(ti) + n1 cos(tt)).
inline double fresnel_tp(double n1, double n2, double theta) {
  require_pos(n1, "n1");
  require_pos(n2, "n2");
  const double s = n1 * std::sin(theta) / n2;
  if (std::abs(s) >= 1.0) throw DomainError("total internal reflection: no propagating transmitted wave");
  const double ci = std::cos(theta);
  const double ct = std::sqrt(1.0 - s * s);
  return 2.0 * n1 * ci / (n2 * ci + n1 * ct);
}

/// Peak field of a plane wave of intensity I in vacuum, sqrt(4 I / (c eps0)).
inline double incident_field(double intensity) {
  require_nonneg(intensity, "intensity");
  return std::sqrt(4.0 * intensity / (si::c * si::epsilon0));
}

/// hbar Omega = |d| t_p sqrt(4 I / (c eps0)); returns Omega in rad/s.
inline double drive_omega(double d_sigma, double t_p, double intensity) {
  require_nonneg(d_sigma, "dipole moment");
  return d_sigma * t_p * incident_field(intensity) / si::hbar;
}

/// Intensity for which drive_omega returns omega.
inline double intensity_for_omega(double d_sigma, double t_p, double omega) {
  require_pos(d_sigma * t_p, "d * t_p");
  const double e = si::hbar * omega / (d_sigma * t_p);
  return e * e * si::c * si::epsilon0 / 4.0;
}

/// i Omega / (-detuning + i gamma/2).
inline Complex alpha_sigma_linear(double omega_drive, double detuning, double gamma) {
  require_pos(gamma, "gamma");
  return Complex(0.0, omega_drive) / Complex(-detuning, gamma / 2.0);
}

/// Near-field magnitude |d| / (4 pi eps0 r^3) of the antenna dipole at distance r.
inline double antenna_field_at_molecule(double d_sigma, double omega_sigma, double r) {
  require_pos(r, "antenna-molecule separation");
  require_pos(omega_sigma, "omega_sigma");
  require_nonneg(d_sigma, "dipole moment");
  return d_sigma / (4.0 * si::pi * si::epsilon0 * r * r * r);
}

/// Single-quantum cavity field sqrt(hbar omega_a / (2 eps0 V)).
inline double cavity_field(double omega_a, double V_eff) {
  require_pos(V_eff, "V_eff");
  require_nonneg(omega_a, "omega_a");
  return std::sqrt(si::hbar * omega_a / (2.0 * si::epsilon0 * V_eff));
}

/// hbar g0_sigma = RQ0 e_sigma e_a / 2.
inline double coupling_g0_sigma(double RQ0, double e_sigma, double e_a) {
  require_nonneg(RQ0, "RQ0");
  require_nonneg(e_sigma, "e_sigma");
  require_nonneg(e_a, "e_a");
  return 0.5 * RQ0 * e_sigma * e_a / si::hbar;
}

struct CavityCoupling {
  double g0_a = 0.0;     // hbar g = RQ0 e_a^2 / 2 (rad/s)
  double literal = 0.0;  // RQ0 omega_a / (2 eps0 V), twice the above
};

inline CavityCoupling coupling_g0_a(double RQ0, double omega_a, double V_eff) {
  require_nonneg(RQ0, "RQ0");
  const double ea = cavity_field(omega_a, V_eff);
  return {0.5 * RQ0 * ea * ea / si::hbar, RQ0 * omega_a / (2.0 * si::epsilon0 * V_eff)};
}

struct PlasmonDrive {
  double Omega_a = 0.0;               // rad/s
  Complex alpha_a = 0.0;
  double threshold_intensity = 0.0;   // W/m^2 for |alpha_a| = 1 on resonance
};

/// Omega_a = sqrt(I sigma_ext / (4 hbar Q)), alpha_a = i Omega_a / (-Delta_a + i kappa/2).
inline PlasmonDrive plasmon_drive_and_amplitude(double intensity, double sigma_ext, double Q, double kappa,
                                                double detuning) {
  require_nonneg(intensity, "intensity");
  require_pos(sigma_ext, "sigma_ext");
  require_pos(Q, "Q");
  require_pos(kappa, "kappa");
  PlasmonDrive out;
  out.Omega_a = std::sqrt(intensity * sigma_ext / (4.0 * si::hbar * Q));
  out.alpha_a = Complex(0.0, out.Omega_a) / Complex(-detuning, kappa / 2.0);
  out.threshold_intensity = (kappa * kappa / 4.0) * 4.0 * si::hbar * Q / sigma_ext;
  return out;
}

struct Cooperativities {
  double C0_sigma = 0.0;
  double C0_a = 0.0;
};

/// C0 = 4 g0^2 / (decay x Gamma): gamma for the antenna channel, kappa for the cavity.
inline Cooperativities cooperativities(double g0_sigma, double g0_a, double gamma, double kappa, double Gamma) {
  require_pos(gamma, "gamma");
  require_pos(kappa, "kappa");
  require_pos(Gamma, "Gamma");
  return {4.0 * g0_sigma * g0_sigma / (gamma * Gamma), 4.0 * g0_a * g0_a / (kappa * Gamma)};
}

/// Inverts F_P = 4 g^2 kappa / ((kappa^2 + Delta^2) gamma).
inline double jc_coupling_from_purcell(double F_P, double kappa, double gamma, double detuning) {
  require_nonneg(F_P, "Purcell factor");
  require_pos(kappa, "kappa");
  require_pos(gamma, "gamma");
  return std::sqrt(F_P * (kappa * kappa + detuning * detuning) * gamma / (4.0 * kappa));
}

// ---------------------------------------------------------------- report

struct DerivedParams {
  double d_sigma = 0.0;           // C m
  double t_p = 0.0;
  double e_sigma = 0.0;           // V/m
  double e_a = 0.0;               // V/m
  double omega_a = 0.0;           // rad/s
  double delta_a = 0.0;           // rad/s
  double Q = 0.0;
  double g0_sigma = 0.0;          // rad/s (override applied)
  double g0_a = 0.0;              // rad/s (override applied)
  double g0_a_literal = 0.0;      // rad/s, diagnostic
  Cooperativities coop;
  double Omega = 0.0;             // rad/s at the scenario intensity
  Complex alpha_sigma = 0.0;
  double Omega_a = 0.0;
  Complex alpha_a = 0.0;
  double antenna_intensity = 0.0;    // W/m^2 for |alpha_sigma| = 1 at zero detuning
  double plasmon_threshold = 0.0;    // W/m^2 for |alpha_a| = 1 on resonance
  std::vector<std::string> warnings;
};

inline double resolved_t_p(const ScenarioParams& p) {
  if (p.drive.t_p) {
    if (!(*p.drive.t_p > 0.0 && *p.drive.t_p <= 1.0)) throw DomainError("t_p must lie in (0, 1]");
    return *p.drive.t_p;
  }
  return fresnel_tp(p.drive.n_incident, p.antenna.refractive_index, p.drive.incidence_angle);
}

inline double resolved_dipole(const ScenarioParams& p) {
  if (p.antenna.dipole_moment) {
    require_nonneg(*p.antenna.dipole_moment, "dipole moment");
    return *p.antenna.dipole_moment;
  }
  return derive_dipole_moment(p.antenna.gamma0, p.antenna.omega_sigma, p.antenna.refractive_index);
}

inline void validate(const ScenarioParams& p) {
  require_pos(p.antenna.omega_sigma, "antenna.omega_sigma");
  require_nonneg(p.antenna.gamma0, "antenna.gamma0");
  require_pos(p.antenna.gamma_total, "antenna.gamma_total");
  if (p.antenna.gamma_total < p.antenna.gamma0) throw DomainError("antenna.gamma_total must be >= gamma0");
  require_pos(p.cavity.kappa, "cavity.kappa");
  require_pos(p.cavity.V_eff, "cavity.V_eff");
  require_pos(p.cavity.sigma_ext, "cavity.sigma_ext");
  require_pos(p.vibration.Gamma, "vibration.Gamma");
  if (!(p.vibration.omega_b > p.vibration.Gamma)) throw DomainError("vibration.omega_b must exceed Gamma");
  require_nonneg(p.vibration.RQ0, "vibration.RQ0");
  require_nonneg(p.vibration.n_b_th, "vibration.n_b_th");
  require_nonneg(p.drive.intensity, "drive.intensity");
  require_pos(p.drive.omega_l, "drive.omega_l");
  require_pos(p.separation_sigma_m, "separation");
  require_nonneg(p.g_jc, "g_jc");
  if (!(p.omega_a() > 0.0)) throw DomainError("resolved cavity frequency must be > 0");
}

inline DerivedParams derive_parameters(const ScenarioParams& p) {
  validate(p);
  DerivedParams out;
  out.d_sigma = resolved_dipole(p);
  out.t_p = resolved_t_p(p);
  out.omega_a = p.omega_a();
  out.delta_a = p.delta_a();
  out.Q = out.omega_a / p.cavity.kappa;
  out.e_sigma = antenna_field_at_molecule(out.d_sigma, p.antenna.omega_sigma, p.separation_sigma_m);
  out.e_a = cavity_field(out.omega_a, p.cavity.V_eff);
  const CavityCoupling ca = coupling_g0_a(p.vibration.RQ0, out.omega_a, p.cavity.V_eff);
  out.g0_sigma = p.couplings_override.g0_sigma.value_or(coupling_g0_sigma(p.vibration.RQ0, out.e_sigma, out.e_a));
  out.g0_a = p.couplings_override.g0_a.value_or(ca.g0_a);
  out.g0_a_literal = ca.literal;
  out.coop = cooperativities(out.g0_sigma, out.g0_a, p.antenna.gamma_total, p.cavity.kappa, p.vibration.Gamma);
  out.Omega = drive_omega(out.d_sigma, out.t_p, p.drive.intensity);
  out.alpha_sigma = alpha_sigma_linear(out.Omega, p.delta_sigma(), p.antenna.gamma_total);
  const PlasmonDrive pd =
      plasmon_drive_and_amplitude(p.drive.intensity, p.cavity.sigma_ext, out.Q, p.cavity.kappa, out.delta_a);
  out.Omega_a = pd.Omega_a;
  out.alpha_a = pd.alpha_a;
  out.plasmon_threshold = pd.threshold_intensity;
  out.antenna_intensity = out.d_sigma > 0.0
                              ? intensity_for_omega(out.d_sigma, out.t_p, p.antenna.gamma_total / 2.0)
                              : std::numeric_limits<double>::infinity();
  if (p.vibration.Gamma > p.cavity.kappa / 10.0) {
    out.warnings.push_back("Markov condition Gamma << kappa violated (Gamma > kappa/10)");
  }
  return out;
}

/// Heitler-regime mean fields of antenna and cavity including the
/// Jaynes-Cummings exchange: solves the 2x2 linear system
///   0 = -(i Ds + g/2) s - i Omega  - i gJC a
///   0 = -(i Da + k/2) a - i Omega_a - i gJC s.
struct MeanField {
  Complex sigma = 0.0;
  Complex a = 0.0;
};

inline MeanField heitler_mean_field(const ScenarioParams& p, const DerivedParams& d) {
  const Complex i(0.0, 1.0);
  const Complex m11 = i * p.delta_sigma() + p.antenna.gamma_total / 2.0;
  const Complex m22 = i * d.delta_a + p.cavity.kappa / 2.0;
  const Complex m12 = i * p.g_jc;
  const Complex r1 = -i * d.Omega, r2 = -i * d.Omega_a;
  const Complex det = m11 * m22 - m12 * m12;
  return {(r1 * m22 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det};
}

// ---------------------------------------------------------------- models

enum class Preset { hybrid, conventional, antenna_only, resonant_serrs };

inline std::string to_string(Preset p) {
  switch (p) {
    case Preset::hybrid: return "hybrid";
    case Preset::conventional: return "conventional";
    case Preset::antenna_only: return "antenna_only";
    case Preset::resonant_serrs: return "resonant_serrs";
  }
  return "?";
}

inline Preset parse_preset(const std::string& s) {
  if (s == "hybrid") return Preset::hybrid;
  if (s == "conventional") return Preset::conventional;
  if (s == "antenna_only") return Preset::antenna_only;
  if (s == "resonant_serrs") return Preset::resonant_serrs;
  throw ConfigError("unknown preset '" + s + "'");
}

struct Model {
  Preset preset = Preset::hybrid;
  OperatorMatrix hamiltonian;            // rad/s, frame rotating at omega_l
  std::vector<CollapseChannel> channels;
  OperatorMatrix sigma;
  std::optional<OperatorMatrix> a;       // absent for antenna_only
  std::optional<OperatorMatrix> b;
  double omega_l = 0.0;

  int dim() const { return hamiltonian.dim(); }
  Liouvillian liouvillian() const { return Liouvillian::assemble(hamiltonian, channels); }
};

/// Two-level antenna alone (dimension 2): detuned drive plus total decay.
inline Model build_antenna_model(const ScenarioParams& p, const DerivedParams& d) {
  const Matrix s = spin_lowering();
  const Matrix h = p.delta_sigma() * s.adjoint() * s + d.Omega * (s + s.adjoint());
  Model m;
  m.preset = Preset::antenna_only;
  m.hamiltonian = {h, "H_antenna"};
  m.sigma = {s, "sigma"};
  m.channels = {{m.sigma, p.antenna.gamma_total}};
  m.omega_l = p.drive.omega_l;
  return m;
}

inline Model build_full_model(const ScenarioParams& p, const OperatorSet& ops, Preset preset) {
  const DerivedParams d = derive_parameters(p);
  if (preset == Preset::antenna_only) return build_antenna_model(p, d);
  if (preset == Preset::resonant_serrs && !p.g_res) {
    throw ConfigError("resonant_serrs preset requires g_res");
  }

  const Matrix& s = ops.sigma.entries;
  const Matrix& a = ops.a.entries;
  const Matrix& b = ops.b.entries;
  const Matrix sd = s.adjoint(), ad = a.adjoint(), bd = b.adjoint();
  const Matrix x_b = b + bd;
  const Matrix exchange = sd * a + ad * s;

  Matrix h = p.vibration.omega_b * bd * b + p.delta_sigma() * sd * s + d.delta_a * ad * a +
             d.Omega * (s + sd) + d.Omega_a * (a + ad) + p.g_jc * exchange;
  switch (preset) {
    case Preset::hybrid:
      h -= d.g0_sigma * exchange * x_b + d.g0_a * ad * a * x_b;
      break;
    case Preset::conventional:
      h -= d.g0_a * ad * a * x_b;
      break;
    case Preset::resonant_serrs:
      h += *p.g_res * sd * s * x_b;
      break;
    case Preset::antenna_only:
      break;
  }
  h = 0.5 * (h + h.adjoint()).eval();

  Model m;
  m.preset = preset;
  m.hamiltonian = {h, "H_" + to_string(preset)};
  m.sigma = ops.sigma;
  m.a = ops.a;
  m.b = ops.b;
  m.omega_l = p.drive.omega_l;
  const double G = p.vibration.Gamma, nth = p.vibration.n_b_th;
  m.channels = {{ops.a, p.cavity.kappa},
                {ops.sigma, p.antenna.gamma_total},
                {ops.b, G * (nth + 1.0)},
                {ops.b.adjoint(), G * nth}};
  return m;
}

/// Poisson tail P(n >= levels) for mean occupation nbar.
inline double poisson_tail(double nbar, int levels) {
  if (nbar <= 0.0) return 0.0;
  double term = std::exp(-nbar);
  for (int k = 1; k <= levels; ++k) term *= nbar / k;
  double sum = 0.0;
  for (int k = levels; k < levels + 200 && term > 0.0; ++k) {
    sum += term;
    term *= nbar / (k + 1);
  }
  return std::min(1.0, sum);
}

/// Smallest cavity truncation whose coherent-state tail is below `tail`, using
/// the mean-field cavity amplitude with the antenna coherence capped at 1/2.
inline int adaptive_cavity_levels(const ScenarioParams& p, int min_levels = 4, int max_levels = 24,
                                  double tail = 1e-10) {
  const DerivedParams d = derive_parameters(p);
  const MeanField mf = heitler_mean_field(p, d);
  const double sigma_abs = std::min(std::abs(mf.sigma), 0.5);
  const double den = std::abs(Complex(d.delta_a, p.cavity.kappa / 2.0));
  const double amp = (d.Omega_a + p.g_jc * sigma_abs) / den;
  const double nbar = amp * amp;
  int n = min_levels;
  while (n < max_levels && poisson_tail(nbar, n) > tail) ++n;
  return n;
}

inline Model build_full_model(const ScenarioParams& p, const HilbertConfig& config, Preset preset) {
  if (preset == Preset::antenna_only) return build_antenna_model(p, derive_parameters(p));
  return build_full_model(p, build_operators(config), preset);
}

}  // namespace aers
