#include <gtest/gtest.h>

#include "aers/physics_models.hpp"

using namespace aers;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
constexpr double ev_per_rad_s = si::hbar / si::e_charge;

}  // namespace

TEST(Derivation, DipoleFromRadiativeRate) {
  // Independent evaluation: gamma0 = n omega^3 d^2 / (3 pi eps0 hbar c^3).
  const double gamma0 = si::hz_to_rad(25e6), w = si::hz_to_rad(498e12), n = 2.42;
  const double d = derive_dipole_moment(gamma0, w, n);
  const double back = n * w * w * w * d * d / (3.0 * si::pi * si::epsilon0 * si::hbar * std::pow(si::c, 3));
  EXPECT_NEAR(back, gamma0, 1e-12 * gamma0);
  EXPECT_NEAR(d / si::debye, 6.7, 0.02 * 6.7);
}

TEST(Derivation, FresnelTransmissionAtSixtyDegrees) {
  EXPECT_NEAR(fresnel_tp(1.0, 2.42, si::pi / 3.0), 0.46, 0.01);
  EXPECT_NEAR(fresnel_tp(1.0, 1.0, 0.4), 1.0, 1e-15);
  EXPECT_THROW(fresnel_tp(2.42, 1.0, 1.2), DomainError);
}

TEST(Derivation, ParameterTable) {
  const DerivedParams d = derive_parameters(table1_scenario());
  EXPECT_LT(rel(d.e_sigma, 7.5e6), 0.05);
  EXPECT_LT(rel(d.e_a, 1.4e8), 0.05);
  EXPECT_LT(rel(d.g0_sigma * ev_per_rad_s, 7e-7), 0.10);
  EXPECT_LT(rel(d.g0_a * ev_per_rad_s, 1.4e-5), 0.10);
  EXPECT_DOUBLE_EQ(d.g0_a_literal, 2.0 * d.g0_a);
  EXPECT_LT(rel(d.coop.C0_sigma, 1.3e-3), 0.20);
  EXPECT_LT(rel(d.coop.C0_a, 8.6e-7), 0.20);
  EXPECT_LT(rel(d.antenna_intensity / si::uw_per_um2, 6.9e-3), 0.10);
  EXPECT_LT(rel(d.plasmon_threshold / si::uw_per_um2, 1e3), 0.20);
  EXPECT_TRUE(d.warnings.empty());
}

TEST(Derivation, ZeroRadiativeRateSilencesAntenna) {
  ScenarioParams p = table1_scenario();
  p.antenna.gamma0 = 0.0;
  const DerivedParams d = derive_parameters(p);
  EXPECT_EQ(d.d_sigma, 0.0);
  EXPECT_EQ(d.g0_sigma, 0.0);
  EXPECT_EQ(d.Omega, 0.0);
}

TEST(Derivation, ModeVolumeScaling) {
  ScenarioParams p = table1_scenario();
  const DerivedParams base = derive_parameters(p);
  p.cavity.V_eff *= 8.0;
  const DerivedParams big = derive_parameters(p);
  EXPECT_NEAR(big.g0_a, base.g0_a / 8.0, 1e-12 * base.g0_a);
  EXPECT_NEAR(big.e_a, base.e_a / std::sqrt(8.0), 1e-12 * base.e_a);
}

TEST(Derivation, MarkovWarning) {
  ScenarioParams p = table1_scenario();
  p.vibration.Gamma = p.cavity.kappa / 5.0;
  EXPECT_EQ(derive_parameters(p).warnings.size(), 1u);
}

TEST(Derivation, DriveInversion) {
  const double d = 6.7 * si::debye, tp = 0.46;
  const double omega = drive_omega(d, tp, 123.0);
  EXPECT_NEAR(intensity_for_omega(d, tp, omega), 123.0, 1e-10);
}

TEST(Derivation, JaynesCummingsFromPurcell) {
  const double kappa = 3.0, gamma = 0.01, det = 0.5;
  const double g = jc_coupling_from_purcell(2.0, kappa, gamma, det);
  EXPECT_NEAR(4.0 * g * g * kappa / ((kappa * kappa + det * det) * gamma), 2.0, 1e-12);
}

TEST(Derivation, StokesMatchedPolicy) {
  ScenarioParams p = table1_scenario();
  p.cavity.detuning_policy = DetuningPolicy::stokes_matched;
  EXPECT_DOUBLE_EQ(p.delta_a(), -p.vibration.omega_b);
  EXPECT_DOUBLE_EQ(p.omega_a(), p.omega_stokes());
}

TEST(Validation, RejectsUnphysicalInputs) {
  ScenarioParams p = table1_scenario();
  p.cavity.kappa = -1.0;
  EXPECT_THROW(derive_parameters(p), DomainError);
  p = table1_scenario();
  p.antenna.gamma_total = 0.5 * p.antenna.gamma0;
  EXPECT_THROW(derive_parameters(p), DomainError);
}

TEST(MeanField, WithoutExchangeReducesToIndependentResponses) {
  ScenarioParams p = table1_scenario();
  p.g_jc = 0.0;
  const DerivedParams d = derive_parameters(p);
  const MeanField mf = heitler_mean_field(p, d);
  const Complex s = Complex(0.0, -d.Omega) / Complex(p.antenna.gamma_total / 2.0, p.delta_sigma());
  const Complex a = Complex(0.0, -d.Omega_a) / Complex(p.cavity.kappa / 2.0, d.delta_a);
  EXPECT_NEAR(std::abs(mf.sigma - s), 0.0, 1e-15 * std::abs(s));
  EXPECT_NEAR(std::abs(mf.a - a), 0.0, 1e-15 * std::abs(a));
  EXPECT_NEAR(std::norm(mf.sigma), std::norm(d.alpha_sigma), 1e-12 * std::norm(s));
}

TEST(Models, HamiltonianStructure) {
  const ScenarioParams p = table1_scenario();
  const DerivedParams d = derive_parameters(p);
  const OperatorSet ops = build_operators({3, 3});
  const Model h = build_full_model(p, ops, Preset::hybrid);
  const Model c = build_full_model(p, ops, Preset::conventional);
  EXPECT_TRUE(h.hamiltonian.is_hermitian());
  EXPECT_EQ(h.dim(), 18);
  const Matrix& s = ops.sigma.entries;
  const Matrix& a = ops.a.entries;
  const Matrix& b = ops.b.entries;
  const Matrix expected = -d.g0_sigma * (s.adjoint() * a + a.adjoint() * s) * (b + b.adjoint());
  EXPECT_LT((h.hamiltonian.entries - c.hamiltonian.entries - expected).cwiseAbs().maxCoeff(),
            1e-12 * d.g0_sigma);
  ASSERT_EQ(h.channels.size(), 4u);
  EXPECT_DOUBLE_EQ(h.channels[2].rate, p.vibration.Gamma * (p.vibration.n_b_th + 1.0));
  EXPECT_DOUBLE_EQ(h.channels[3].rate, p.vibration.Gamma * p.vibration.n_b_th);
}

TEST(Models, AntennaOnlyIsTwoLevel) {
  const Model m = build_full_model(table1_scenario(), HilbertConfig{}, Preset::antenna_only);
  EXPECT_EQ(m.dim(), 2);
  EXPECT_FALSE(m.a.has_value());
}

TEST(Models, ResonantPresetNeedsCoupling) {
  ScenarioParams p = table1_scenario();
  EXPECT_THROW(build_full_model(p, HilbertConfig{3, 3}, Preset::resonant_serrs), ConfigError);
  p.g_res = 1e9;
  EXPECT_NO_THROW(build_full_model(p, HilbertConfig{3, 3}, Preset::resonant_serrs));
}

TEST(Models, PresetNames) {
  for (Preset p : {Preset::hybrid, Preset::conventional, Preset::antenna_only, Preset::resonant_serrs}) {
    EXPECT_EQ(parse_preset(to_string(p)), p);
  }
  EXPECT_THROW(parse_preset("full"), ConfigError);
}

TEST(Truncation, PoissonTailMatchesDirectSum) {
  for (double nbar : {0.01, 0.3, 2.0}) {
    for (int n : {2, 4, 7}) {
      double head = 0.0, term = std::exp(-nbar);
      for (int k = 0; k < n; ++k) {
        head += term;
        term *= nbar / (k + 1);
      }
      EXPECT_NEAR(poisson_tail(nbar, n), 1.0 - head, 1e-13) << nbar << " " << n;
    }
  }
}

TEST(Truncation, AdaptiveCavityLevelsGrowWithDrive) {
  ScenarioParams p = table1_scenario();
  EXPECT_EQ(adaptive_cavity_levels(p), 4);
  p.drive.intensity = 43.4 * si::uw_per_um2;
  EXPECT_EQ(adaptive_cavity_levels(p), 6);
}
