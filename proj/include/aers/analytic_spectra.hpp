#pragma once

// Closed-form layer: linearized Raman spectra, optomechanical rates, phonon
// rate balance, Mollow-regime substitution, Stokes power and efficiencies.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "aers/constants.hpp"
#include "aers/errors.hpp"
#include "aers/lindblad.hpp"
#include "aers/physics_models.hpp"

namespace aers {

struct LinearizedInputs {
  Complex g_eff = 0.0;  // rad/s
  double Delta_a = 0.0;
  double kappa = 0.0;
  double Gamma = 0.0;
  double omega_b = 0.0;
  double omega_l = 0.0;
  double n_b = 0.0;

  void validate() const {
    require_pos(kappa, "kappa");
    require_pos(Gamma, "Gamma");
    require_nonneg(n_b, "n_b");
  }
  /// Markov (adiabatic cavity) assumption requires Gamma << kappa.
  bool markov_violated() const { return Gamma > kappa / 10.0; }

  double d_plus() const { return (Delta_a + omega_b) * (Delta_a + omega_b) + kappa * kappa / 4.0; }
  double d_minus() const { return (Delta_a - omega_b) * (Delta_a - omega_b) + kappa * kappa / 4.0; }
  double omega_stokes() const { return omega_l - omega_b; }
  double omega_antistokes() const { return omega_l + omega_b; }
};

/// Two-Lorentzian Raman spectrum with the omega^4 factor at each grid point:
///   S = w^4 |g|^2 [ n/D- * G/((w-wl-wb)^2+G^2/4) + (n+1)/D+ * G/((w-wl+wb)^2+G^2/4) ].
/// Normalized as 2 Re of the one-sided transform of <da^dag(tau) da(0)>.
inline double linearized_density(const LinearizedInputs& in, double omega) {
  const double g2 = std::norm(in.g_eff);
  const double G = in.Gamma;
  const double xa = omega - in.omega_l - in.omega_b;
  const double xs = omega - in.omega_l + in.omega_b;
  const double anti = in.n_b / in.d_minus() * G / (xa * xa + G * G / 4.0);
  const double stokes = (in.n_b + 1.0) / in.d_plus() * G / (xs * xs + G * G / 4.0);
  return std::pow(omega, 4) * g2 * (anti + stokes);
}

inline SpectrumResult linearized_spectrum(const LinearizedInputs& in, const std::vector<double>& omega_grid) {
  in.validate();
  SpectrumResult out;
  out.frame_shift = in.omega_l;
  out.omega = omega_grid;
  out.density.resize(omega_grid.size());
  for (std::size_t i = 0; i < omega_grid.size(); ++i) out.density[i] = linearized_density(in, omega_grid[i]);
  if (in.markov_violated()) out.diagnostics.push_back("Markov condition violated: Gamma > kappa/10");
  return out;
}

struct PeakPair {
  double stokes = 0.0;
  double antistokes = 0.0;
};

/// Line-centre values 4 w^4 |g|^2 (n+1) / (D+ Gamma) and 4 w^4 |g|^2 n / (D- Gamma).
inline PeakPair peak_intensities(const LinearizedInputs& in) {
  in.validate();
  const double g2 = std::norm(in.g_eff);
  const double ws = in.omega_stokes(), was = in.omega_antistokes();
  return {4.0 * std::pow(ws, 4) * g2 * (in.n_b + 1.0) / (in.d_plus() * in.Gamma),
          4.0 * std::pow(was, 4) * g2 * in.n_b / (in.d_minus() * in.Gamma)};
}

struct OptomechRates {
  double Gamma_plus = 0.0;
  double Gamma_minus = 0.0;
};

/// Gamma_pm = |g|^2 kappa / ((Delta_a pm omega_b)^2 + kappa^2/4).
inline OptomechRates optomech_rates(double g_eff_abs, double Delta_a, double kappa, double omega_b) {
  require_pos(kappa, "kappa");
  const double g2 = g_eff_abs * g_eff_abs;
  const double dp = (Delta_a + omega_b) * (Delta_a + omega_b) + kappa * kappa / 4.0;
  const double dm = (Delta_a - omega_b) * (Delta_a - omega_b) + kappa * kappa / 4.0;
  return {g2 * kappa / dp, g2 * kappa / dm};
}

struct RateBalance {
  double Gamma_plus = 0.0;
  double Gamma_minus = 0.0;
  double Gamma_eff = 0.0;
  double n_b_ss = 0.0;  // NaN when unstable
  bool stable = true;
};

/// dn/dt = -Gamma (n - n_th) + Gamma_+ (n + 1) - Gamma_- n.
inline double phonon_rate(double n, double Gamma, double n_th, double gp, double gm) {
  return -Gamma * (n - n_th) + gp * (n + 1.0) - gm * n;
}

inline RateBalance phonon_steady_state(double Gamma, double n_b_th, double Gamma_plus, double Gamma_minus) {
  RateBalance r;
  r.Gamma_plus = Gamma_plus;
  r.Gamma_minus = Gamma_minus;
  r.Gamma_eff = Gamma + Gamma_minus - Gamma_plus;
  r.stable = r.Gamma_eff > 0.0;
  // n_th plus the optomechanical shift, so vanishing rates return n_th bit for bit.
  const double shift = (Gamma_plus * (n_b_th + 1.0) - Gamma_minus * n_b_th) / r.Gamma_eff;
  r.n_b_ss = r.stable ? n_b_th + shift : std::numeric_limits<double>::quiet_NaN();
  return r;
}

/// Bose-Einstein occupation 1/(exp(hbar w / kT) - 1); zero at T = 0.
inline double thermal_occupancy(double omega, double temperature) {
  require_nonneg(temperature, "temperature");
  require_pos(omega, "omega");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(si::hbar * omega / (si::k_B * temperature));
}

/// Linearized form with |g|^2 replaced by g0_sigma^2 <dsigma^dag dsigma>.
inline SpectrumResult mollow_regime_spectrum(double g0_sigma, double delta_sigma_population, LinearizedInputs in,
                                             const std::vector<double>& omega_grid) {
  if (!(delta_sigma_population >= 0.0 && delta_sigma_population <= 1.0)) {
    throw DomainError("incoherent antenna population must lie in [0, 1]");
  }
  in.g_eff = Complex(g0_sigma * std::sqrt(delta_sigma_population), 0.0);
  return linearized_spectrum(in, omega_grid);
}

struct BlochSteadyState {
  double population = 0.0;  // <sigma^dag sigma>
  Complex coherence = 0.0;  // <sigma>
};

/// Driven two-level steady state for H = Delta s^dag s + Omega (s + s^dag), decay gamma.
inline BlochSteadyState bloch_steady_state(double Omega, double Delta, double gamma) {
  require_pos(gamma, "gamma");
  const double base = Delta * Delta + gamma * gamma / 4.0;
  BlochSteadyState out;
  out.population = Omega * Omega / (base + 2.0 * Omega * Omega);
  const double inversion = 2.0 * out.population - 1.0;
  out.coherence = Complex(0.0, Omega * inversion) / Complex(gamma / 2.0, Delta);
  return out;
}

/// <sigma^dag sigma> - |<sigma>|^2.
inline double incoherent_population(double population, Complex coherence) {
  return std::max(0.0, population - std::norm(coherence));
}

// ---------------------------------------------------------------- efficiencies

enum class CouplingChoice { sigma, a };

struct EfficiencyReport {
  double eta_prime = 0.0;         // kg/s
  double eta_sigma = 0.0;
  double eta_a = 0.0;
  double corrected_eta_sigma = 0.0;  // equals eta_sigma until corrected_efficiency is applied
  double stokes_power = 0.0;      // W, for the chosen coupling
  double stokes_flux = 0.0;       // photons/s
  double pump_flux = 0.0;         // photons/s
  double eta = 0.0;               // stokes_flux / pump_flux for the chosen coupling
  double d_a = 0.0;               // C m
};

inline constexpr double dipole_angular_factor = 8.0 * si::pi / 3.0;  // int sin^3 dtheta int dphi

/// Cavity dipole from hbar Omega_a = d_a E_inc; intensity-independent.
inline double cavity_dipole(double sigma_ext, double Q) {
  return si::hbar * std::sqrt(sigma_ext / (4.0 * si::hbar * Q)) / std::sqrt(4.0 / (si::c * si::epsilon0));
}

inline EfficiencyReport stokes_power_and_efficiency(const ScenarioParams& p, CouplingChoice choice,
                                                    std::optional<double> n_b = std::nullopt) {
  const DerivedParams d = derive_parameters(p);
  if (!(p.drive.spot_area > 0.0)) throw DomainError("spot area must be > 0");
  const double nb = n_b.value_or(p.vibration.n_b_th);
  const double ws = p.omega_stokes(), wl = p.drive.omega_l;
  const double kappa = p.cavity.kappa;
  const double dplus = (d.delta_a + p.vibration.omega_b) * (d.delta_a + p.vibration.omega_b) + kappa * kappa / 4.0;

  EfficiencyReport r;
  r.d_a = cavity_dipole(p.cavity.sigma_ext, d.Q);
  const double radiation = std::pow(ws, 3) * r.d_a * r.d_a /
                           (4.0 * si::pi * si::pi * si::epsilon0 * std::pow(si::c, 3)) * (nb + 1.0) / dplus *
                           dipole_angular_factor;
  r.eta_prime = wl * radiation / p.drive.spot_area;

  // |alpha|^2 / I, intensity independent in the linear regime.
  const double omega_unit = drive_omega(d.d_sigma, d.t_p, 1.0);
  const double ds = p.delta_sigma(), g = p.antenna.gamma_total;
  const double alpha_s2_per_i = omega_unit * omega_unit / (ds * ds + g * g / 4.0);
  const double omega_a_unit = plasmon_drive_and_amplitude(1.0, p.cavity.sigma_ext, d.Q, kappa, d.delta_a).Omega_a;
  const double alpha_a2_per_i = omega_a_unit * omega_a_unit / (d.delta_a * d.delta_a + kappa * kappa / 4.0);

  r.eta_sigma = r.eta_prime * d.g0_sigma * d.g0_sigma * alpha_s2_per_i;
  r.eta_a = r.eta_prime * d.g0_a * d.g0_a * alpha_a2_per_i;
  r.corrected_eta_sigma = r.eta_sigma;

  const double I = p.drive.intensity;
  const double g2 = choice == CouplingChoice::sigma ? d.g0_sigma * d.g0_sigma * alpha_s2_per_i * I
                                                    : d.g0_a * d.g0_a * alpha_a2_per_i * I;
  r.stokes_power = ws * radiation * g2;
  r.stokes_flux = r.stokes_power / (si::hbar * ws);
  r.pump_flux = I * p.drive.spot_area / (si::hbar * wl);
  r.eta = r.pump_flux > 0.0 ? r.stokes_flux / r.pump_flux
                            : (choice == CouplingChoice::sigma ? r.eta_sigma : r.eta_a);
  return r;
}

/// eta * K_inc^2 K_mol^2 (gamma / gamma_tot)^2.
inline double corrected_efficiency(double eta_sigma, double K_inc, double K_mol, double gamma_over_gamma_tot) {
  require_nonneg(eta_sigma, "eta_sigma");
  require_nonneg(K_inc, "K_inc");
  require_nonneg(K_mol, "K_mol");
  require_nonneg(gamma_over_gamma_tot, "gamma/gamma_tot");
  return eta_sigma * K_inc * K_inc * K_mol * K_mol * gamma_over_gamma_tot * gamma_over_gamma_tot;
}

/// Linearized inputs for a scenario using Heitler mean fields (including the
/// antenna-cavity exchange); conventional drops the antenna-mediated term.
inline LinearizedInputs linearized_inputs(const ScenarioParams& p, Preset preset) {
  const DerivedParams d = derive_parameters(p);
  const MeanField mf = heitler_mean_field(p, d);
  LinearizedInputs in;
  const double gs = preset == Preset::conventional ? 0.0 : d.g0_sigma;
  in.g_eff = gs * mf.sigma + d.g0_a * mf.a;
  in.Delta_a = d.delta_a;
  in.kappa = p.cavity.kappa;
  in.Gamma = p.vibration.Gamma;
  in.omega_b = p.vibration.omega_b;
  in.omega_l = p.drive.omega_l;
  in.n_b = p.vibration.n_b_th;
  return in;
}

}  // namespace aers
