#pragma once

// Quasi-static stand-in for the nanoparticle corrections: a gold sphere above
// a dielectric half-space, treated as a point dipole with image dipoles for the
// interface. Produces K_inc, K_mol, the Purcell factor and gamma_tot/gamma.
//
// Geometry: substrate (eps_s) fills z < 0, air z > 0. The emitter sits at
// z = -depth, the molecule at z = +molecule_height, the sphere centre at
// z = gap + radius; all on the z axis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "aers/analytic_spectra.hpp"
#include "aers/constants.hpp"
#include "aers/errors.hpp"
#include "aers/physics_models.hpp"

namespace aers {

using Vec3 = Eigen::Vector3cd;

struct EmGeometry {
  double sphere_radius = 100e-9;
  Complex eps_metal{-9.53, 1.51};
  double eps_substrate = 5.86;
  double gap_d = 5e-9;
  double emitter_depth = 2e-9;
  double molecule_height = 1e-9;
  double wavelength = 602e-9;

  void validate() const {
    require_pos(sphere_radius, "sphere radius");
    require_pos(eps_substrate, "substrate permittivity");
    require_pos(emitter_depth, "emitter depth");
    require_pos(molecule_height, "molecule height");
    require_pos(wavelength, "wavelength");
    if (!(gap_d >= min_gap)) {
      throw DomainError("gap " + std::to_string(gap_d * 1e9) + " nm below the quasi-static validity floor of 0.5 nm");
    }
  }

  /// Molecule height inside the gap; capped at mid-gap when the gap is narrower than twice the nominal height.
  double molecule_z() const { return std::min(molecule_height, 0.5 * gap_d); }

  static constexpr double min_gap = 0.5e-9;
};

struct EmFactors {
  double K_inc = 1.0;
  double K_mol = 1.0;
  double F_P = 1.0;
  double gamma_tot_over_gamma = 1.0;
};

/// alpha = 4 pi R^3 (eps - eps_h) / (eps + 2 eps_h), so that p = eps0 eps_h alpha E.
inline Complex sphere_polarizability(double radius, Complex eps, double eps_host) {
  require_pos(radius, "radius");
  require_pos(eps_host, "host permittivity");
  const Complex denom = eps + 2.0 * eps_host;
  if (std::abs(denom) < 1e-12 * (std::abs(eps) + eps_host)) {
    throw DomainError("sphere polarizability at the eps = -2 eps_h pole");
  }
  return 4.0 * si::pi * radius * radius * radius * (eps - eps_host) / denom;
}

/// Radiative-reaction correction alpha / (1 - i k^3 alpha / (6 pi)).
inline Complex radiative_correction(Complex alpha, double k) {
  return alpha / (1.0 - Complex(0.0, k * k * k / (6.0 * si::pi)) * alpha);
}

namespace em_detail {

/// Vacuum quasi-static dipole field at displacement r from the dipole.
inline Vec3 dipole_field(const Vec3& p, const Eigen::Vector3d& r) {
  const double rn = r.norm();
  const Eigen::Vector3d u = r / rn;
  const Vec3 uc = u.cast<Complex>();
  const Complex pu = uc.dot(p);  // u is real: u^T p
  return (3.0 * pu * uc - p) / (4.0 * si::pi * si::epsilon0 * rn * rn * rn);
}

/// Image of a dipole across z = 0 for a source in medium 1 facing medium 2:
/// p'_par = -beta p_par, p'_z = +beta p_z, beta = (eps2 - eps1)/(eps2 + eps1).
inline Vec3 image_dipole(const Vec3& p, double eps1, double eps2) {
  const double beta = (eps2 - eps1) / (eps2 + eps1);
  return Vec3(-beta * p.x(), -beta * p.y(), beta * p.z());
}

inline Eigen::Vector3d on_axis(double z) { return {0.0, 0.0, z}; }

/// Field at `obs` from a dipole at `src`, both possibly on either side of z = 0.
inline Vec3 field_from(const Vec3& p, double z_src, double z_obs, double eps_air, double eps_sub,
                       const Eigen::Vector3d& obs_offset = Eigen::Vector3d::Zero()) {
  const Eigen::Vector3d src = on_axis(z_src);
  const Eigen::Vector3d obs = on_axis(z_obs) + obs_offset;
  const bool src_air = z_src > 0.0, obs_air = z_obs > 0.0;
  const double eps1 = src_air ? eps_air : eps_sub;
  const double eps2 = src_air ? eps_sub : eps_air;
  if (src_air == obs_air) {
    const Vec3 img = image_dipole(p, eps1, eps2);
    return (dipole_field(p, obs - src) + dipole_field(img, obs - on_axis(-z_src))) / eps1;
  }
  return dipole_field(p, obs - src) * (2.0 / (eps1 + eps2));
}

/// Nanoparticle dipole induced by external field e_ext at its centre, including
/// its own image in the substrate.
inline Vec3 sphere_response(const EmGeometry& g, const Vec3& e_ext, double z_c) {
  const double k0 = 2.0 * si::pi / g.wavelength;
  const Complex alpha = radiative_correction(sphere_polarizability(g.sphere_radius, g.eps_metal, 1.0), k0);
  const double beta = (g.eps_substrate - 1.0) / (g.eps_substrate + 1.0);
  const double sep = 2.0 * z_c;
  const double c3 = 4.0 * si::pi * sep * sep * sep;
  // On-axis image field: z gets 2 beta p_z / (4 pi eps0 D^3), parallel gets beta p_par / (4 pi eps0 D^3).
  Vec3 p;
  p.x() = si::epsilon0 * alpha * e_ext.x() / (1.0 - alpha * beta / c3);
  p.y() = si::epsilon0 * alpha * e_ext.y() / (1.0 - alpha * beta / c3);
  p.z() = si::epsilon0 * alpha * e_ext.z() / (1.0 - 2.0 * alpha * beta / c3);
  return p;
}

/// p-polarized plane wave (unit incident amplitude) at a point on the axis.
inline Vec3 plane_wave_field(double z, double theta, double eps_sub, double k0) {
  const double n2 = std::sqrt(eps_sub);
  const double ci = std::cos(theta), si_ = std::sin(theta);
  const double st = si_ / n2, ct = std::sqrt(1.0 - st * st);
  const double T = 2.0 * ci / (ct + n2 * ci);
  const double R = n2 * T - 1.0;
  const Complex I(0.0, 1.0);
  if (z >= 0.0) {
    const Vec3 inc(ci, 0.0, si_);
    const Vec3 ref(-ci, 0.0, si_);
    return inc * std::exp(-I * k0 * ci * z) + R * ref * std::exp(I * k0 * ci * z);
  }
  return T * Vec3(ct, 0.0, st) * std::exp(-I * k0 * n2 * ct * z);
}

}  // namespace em_detail

inline EmFactors em_factors(const EmGeometry& g, double incidence_angle, double radiative_fraction = 0.25) {
  using namespace em_detail;
  g.validate();
  const double k0 = 2.0 * si::pi / g.wavelength;
  const double eps_s = g.eps_substrate;
  const double z_c = g.gap_d + g.sphere_radius;
  const double z_e = -g.emitter_depth;
  const double z_m = g.molecule_z();
  EmFactors f;

  // Incident field at the emitter, with and without the sphere.
  const Vec3 e0_emitter = plane_wave_field(z_e, incidence_angle, eps_s, k0);
  const Vec3 p_np_inc = sphere_response(g, plane_wave_field(z_c, incidence_angle, eps_s, k0), z_c);
  const Vec3 e_emitter = e0_emitter + field_from(p_np_inc, z_c, z_e, 1.0, eps_s);
  f.K_inc = e_emitter.norm() / e0_emitter.norm();

  // Vertical emitter dipole: field at the molecule and back-action at the emitter.
  const Vec3 p_e(0.0, 0.0, 1e-29);
  const Vec3 e0_mol = field_from(p_e, z_e, z_m, 1.0, eps_s);
  const Vec3 p_np_e = sphere_response(g, field_from(p_e, z_e, z_c, 1.0, eps_s), z_c);
  const Vec3 e_mol = e0_mol + field_from(p_np_e, z_c, z_m, 1.0, eps_s);
  f.K_mol = e_mol.norm() / e0_mol.norm();

  const Vec3 e_back = field_from(p_np_e, z_c, z_e, 1.0, eps_s);
  const double n_s = std::sqrt(eps_s);
  const double norm_p2 = p_e.squaredNorm();
  f.F_P = 1.0 + 6.0 * si::pi * si::epsilon0 / (n_s * k0 * k0 * k0 * norm_p2) * std::imag(p_e.dot(e_back));
  f.gamma_tot_over_gamma = f.F_P * radiative_fraction + (1.0 - radiative_fraction);
  return f;
}

/// K_mol with source and observation swapped: vertical dipole at the molecule,
/// field observed at the emitter site.
inline double k_mol_swapped(const EmGeometry& g) {
  using namespace em_detail;
  g.validate();
  const double z_c = g.gap_d + g.sphere_radius;
  const double z_e = -g.emitter_depth, z_m = g.molecule_z();
  const Vec3 p_m(0.0, 0.0, 1e-29);
  const Vec3 e0 = field_from(p_m, z_m, z_e, 1.0, g.eps_substrate);
  const Vec3 p_np = sphere_response(g, field_from(p_m, z_m, z_c, 1.0, g.eps_substrate), z_c);
  const Vec3 e = e0 + field_from(p_np, z_c, z_e, 1.0, g.eps_substrate);
  return e.norm() / e0.norm();
}

struct EmSweepRow {
  double gap_d = 0.0;
  EmFactors factors;
  double eta_sigma = 0.0;            // uncorrected
  double corrected_eta_sigma = 0.0;
  double eta_a = 0.0;
};

inline std::vector<double> default_gap_grid() {
  std::vector<double> d;
  for (int i = 1; i <= 20; ++i) d.push_back(i * 1e-9);
  return d;
}

/// Corrected efficiencies across gap distances; eta_a does not depend on the gap.
inline std::vector<EmSweepRow> corrected_efficiency_sweep(const ScenarioParams& p, const std::vector<double>& d_grid,
                                                          EmGeometry geometry = {}, bool force_unity = false) {
  const EfficiencyReport eff = stokes_power_and_efficiency(p, CouplingChoice::sigma);
  const double radiative_fraction = p.antenna.gamma0 / p.antenna.gamma_total;
  std::vector<EmSweepRow> rows;
  rows.reserve(d_grid.size());
  for (double d : d_grid) {
    EmSweepRow row;
    row.gap_d = d;
    geometry.gap_d = d;
    row.factors = force_unity ? EmFactors{} : em_factors(geometry, p.drive.incidence_angle, radiative_fraction);
    row.eta_sigma = eff.eta_sigma;
    row.eta_a = eff.eta_a;
    row.corrected_eta_sigma = corrected_efficiency(eff.eta_sigma, row.factors.K_inc, row.factors.K_mol,
                                                   1.0 / row.factors.gamma_tot_over_gamma);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace aers
