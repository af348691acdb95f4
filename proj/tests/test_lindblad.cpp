#include <gtest/gtest.h>

#include <random>

#include "aers/lindblad.hpp"

using namespace aers;

namespace {

// Driven damped cavity with a thermal bath:
//   H = Delta a^dag a + Omega (a + a^dag), jumps a (k(n+1)), a^dag (k n).
struct ThermalCavity {
  double delta = 0.7e9, kappa = 1.0e9, omega = 0.35e9, n_th = 0.2;
  int levels = 12;

  OperatorMatrix a() const { return {annihilation(levels), "a"}; }
  Liouvillian liouvillian() const {
    const Matrix am = annihilation(levels);
    const Matrix h = delta * am.adjoint() * am + omega * (am + am.adjoint());
    return Liouvillian::assemble({h, "H"}, {{a(), kappa * (n_th + 1.0)}, {a().adjoint(), kappa * n_th}});
  }
  Complex alpha() const { return Complex(0.0, -omega) / Complex(kappa / 2.0, delta); }
};

Liouvillian two_level(double omega, double delta, double gamma) {
  const Matrix s = spin_lowering();
  const Matrix h = delta * s.adjoint() * s + omega * (s + s.adjoint());
  return Liouvillian::assemble({h, "H"}, {{{s, "sigma"}, gamma}});
}

Matrix random_state(int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
  Matrix rho = m * m.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST(Vectorization, ColumnMajorRoundTrip) {
  Matrix m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Vector v = vectorize(m);
  EXPECT_EQ(v[1], Complex(3.0));  // column-major
  EXPECT_EQ((unvectorize(v, 2) - m).norm(), 0.0);
}

TEST(Liouvillian, SuperoperatorMatchesOperatorForm) {
  const ThermalCavity c{.levels = 5};
  const Liouvillian l = c.liouvillian();
  std::mt19937 rng(3);
  const Matrix rho = random_state(5, rng);
  const Vector lhs = l.matrix() * vectorize(rho);
  EXPECT_LT((unvectorize(lhs, 5) - l.apply(rho)).norm(), 1e-12 * l.max_abs_entry());
}

TEST(Liouvillian, TracePreserving) {
  const ThermalCavity c;
  EXPECT_LT(c.liouvillian().trace_preservation_defect(), 1e-14);
}

TEST(Liouvillian, RejectsBadInputs) {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 1) = 1.0;  // not Hermitian
  EXPECT_THROW(Liouvillian::assemble({h, "H"}, {}), ConfigError);
  const Matrix s = spin_lowering();
  EXPECT_THROW(Liouvillian::assemble({Matrix::Zero(2, 2), "H"}, {{{s, "s"}, -1.0}}), ConfigError);
  EXPECT_THROW(Liouvillian::assemble({Matrix::Zero(2, 2), "H"}, {{{annihilation(3), "a"}, 1.0}}), DimensionError);
}

TEST(SteadyState, TwoLevelMatchesBlochSolution) {
  const double omega = 1.3, delta = 0.4, gamma = 1.0;
  const auto ss = steady_state(two_level(omega, delta, gamma));
  const double base = delta * delta + gamma * gamma / 4.0;
  const double pop = omega * omega / (base + 2.0 * omega * omega);
  const Complex coh = Complex(0.0, omega * (2.0 * pop - 1.0)) / Complex(gamma / 2.0, delta);
  EXPECT_NEAR(ss.rho.entries()(1, 1).real(), pop, 1e-12);
  EXPECT_NEAR(std::abs(ss.rho.entries()(1, 0) - coh), 0.0, 1e-12);  // <sigma> = rho_eg
}

TEST(SteadyState, ThermalCavityOccupation) {
  const ThermalCavity c;
  const auto ss = steady_state(c.liouvillian());
  const OperatorMatrix a = c.a();
  const double expect = std::norm(c.alpha()) + c.n_th;
  EXPECT_NEAR(expectation(a.adjoint() * a, ss.rho).real(), expect, 1e-6 * expect);
  EXPECT_NEAR(std::abs(expectation(a, ss.rho) - c.alpha()), 0.0, 1e-6);
}

TEST(SteadyState, DirectAndIterativeAgree) {
  const ThermalCavity c{.levels = 10};
  SteadyStateOptions direct, iterative;
  direct.solver = SolverKind::direct;
  iterative.solver = SolverKind::iterative;
  const auto a = steady_state(c.liouvillian(), direct);
  const auto b = steady_state(c.liouvillian(), iterative);
  EXPECT_EQ(a.solver, "sparse-lu");
  EXPECT_EQ(b.solver, "gmres");
  EXPECT_LT((a.rho.entries() - b.rho.entries()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SteadyState, DegenerateNullSpaceDetected) {
  // Level 2 is dark and isolated, so |0><0| and |2><2| are both stationary.
  Matrix h = Matrix::Zero(3, 3);
  Matrix jump = Matrix::Zero(3, 3);
  jump(0, 1) = 1.0;
  const Liouvillian l = Liouvillian::assemble({h, "H"}, {{{jump, "j"}, 1.0}});
  EXPECT_THROW(steady_state(l), DegenerateSteadyStateError);
}

TEST(Propagation, PreservesTraceHermiticityPositivity) {
  const ThermalCavity c{.levels = 6};
  const Liouvillian l = c.liouvillian();
  std::mt19937 rng(11);
  const auto states = propagate(l, random_state(6, rng), 0.2 / c.kappa, 60);
  for (const auto& rho : states) {
    const DensityMatrix d = DensityMatrix::unchecked(rho);
    EXPECT_NEAR(std::abs(d.trace() - 1.0), 0.0, 1e-10);
    EXPECT_LT(d.hermiticity_defect(), 1e-10);
    EXPECT_GT(d.min_eigenvalue(), -1e-10);
  }
}

TEST(Propagation, RelaxesToSteadyState) {
  const Liouvillian l = two_level(1.0, 0.3, 1.0);
  const auto ss = steady_state(l);
  const auto states = propagate(l, Matrix::Identity(2, 2) * 0.5, 0.5, 120);
  EXPECT_LT((states.back() - ss.rho.entries()).norm(), 1e-10);
}

TEST(Correlator, ThermalCavityFirstOrderCoherence) {
  // <da^dag(tau) da(0)> = n_th exp((i Delta - kappa/2) tau).
  const ThermalCavity c{.levels = 10};
  const Liouvillian l = c.liouvillian();
  const auto ss = steady_state(l);
  const auto tau = uniform_grid(4.0 / c.kappa, 64);
  const auto series = two_time_correlator(l, ss.rho, c.a().adjoint(), c.a(), tau);
  for (std::size_t k = 0; k < tau.size(); ++k) {
    const Complex expect = c.n_th * std::exp(Complex(-c.kappa / 2.0, c.delta) * tau[k]);
    EXPECT_NEAR(std::abs(series.values[k] - series.plateau - expect), 0.0, 2e-5) << k;
  }
}

TEST(Correlator, RejectsNonUniformGrid) {
  const Liouvillian l = two_level(1.0, 0.0, 1.0);
  const auto ss = steady_state(l);
  std::vector<double> tau{0.0, 0.1, 0.3};
  const OperatorMatrix s(spin_lowering(), "s");
  EXPECT_THROW(two_time_correlator(l, ss.rho, s.adjoint(), s, tau), ConfigError);
}

TEST(Spectrum, ExponentialCorrelatorGivesLorentzian) {
  CorrelationSeries c;
  const double rate = 2.0, shift = 3.0;
  c.tau = uniform_grid(12.0, 6001);
  for (double t : c.tau) c.values.push_back(std::exp(Complex(-rate, shift) * t));
  c.plateau = 0.0;
  const std::vector<double> nu{-2.0, 0.0, 3.0, 5.0, 9.0};
  const auto s = spectrum_from_correlator(c, 0.0, true, nu);
  for (std::size_t j = 0; j < nu.size(); ++j) {
    const double expect = 2.0 * rate / ((nu[j] - shift) * (nu[j] - shift) + rate * rate);
    // omega^4 weight with omega_l = 0 is nu^4; compare the bare transform.
    const double w4 = std::pow(nu[j], 4);
    if (w4 == 0.0) continue;
    EXPECT_NEAR(s.density[j] / w4, expect, 1e-4 * expect) << nu[j];
  }
}

TEST(Spectrum, UndecayedCorrelatorRaisesTruncation) {
  CorrelationSeries c;
  c.tau = uniform_grid(1.0, 101);
  for (double t : c.tau) c.values.push_back(std::exp(-0.5 * t));
  try {
    spectrum_from_correlator(c, 1.0, true);
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_GT(e.required_tau_max(), 1.0);
  }
}

TEST(Spectrum, ResolventMatchesTimeDomain) {
  const double omega_l = 50.0;
  const Liouvillian l = two_level(2.0, 0.5, 1.0);
  const auto ss = steady_state(l);
  const OperatorMatrix s(spin_lowering(), "s");
  const auto tau = default_tau_grid(l, 4096, 30.0);
  const auto series = two_time_correlator(l, ss.rho, s.adjoint(), s, tau);
  const std::vector<double> nu{-5.0, -4.1, -1.0, 0.0, 0.4, 2.0, 4.6};
  const auto td = spectrum_from_correlator(series, omega_l, true, nu);
  ResolventSpectrum rs(l, ss.rho, s.adjoint(), s, omega_l, SolverKind::direct);
  ResolventSpectrum ri(l, ss.rho, s.adjoint(), s, omega_l, SolverKind::iterative);
  for (std::size_t j = 0; j < nu.size(); ++j) {
    const double d = rs.density(omega_l + nu[j]);
    EXPECT_NEAR(td.density[j], d, 1e-3 * std::abs(d)) << nu[j];
    EXPECT_NEAR(ri.density(omega_l + nu[j]), d, 1e-8 * std::abs(d)) << nu[j];
  }
}

TEST(Spectrum, NegativeValuesClippedOrReported) {
  SpectrumResult out;
  std::vector<double> raw{1.0, -1e-9, -0.5};
  detail::finish_spectrum(out, raw, 1e-6);
  EXPECT_EQ(out.clipped_count, 1);
  EXPECT_EQ(out.density[1], 0.0);
  EXPECT_EQ(out.diagnostics.size(), 1u);
  EXPECT_EQ(out.min_raw, -0.5);
}

TEST(Spectrum, ResolventPeakSearchFindsLorentzianCentre) {
  const ThermalCavity c{.levels = 14};
  const Liouvillian l = c.liouvillian();
  const auto ss = steady_state(l);
  const double wl = 1e12;
  ResolventSpectrum rs(l, ss.rho, c.a().adjoint(), c.a(), wl);
  const auto [w, s] = rs.peak(wl - 2.0 * c.kappa, wl + 3.0 * c.kappa, 9, 1e-5);
  // Density = w^4 x Lorentzian(nu - Delta); locate the maximum of that product by brute force.
  double best_w = 0.0, best = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double nu = -2.0 * c.kappa + 5.0 * c.kappa * i / 200000.0;
    const double v = std::pow(wl + nu, 4) * 2.0 * c.n_th * (c.kappa / 2.0) /
                     ((nu - c.delta) * (nu - c.delta) + c.kappa * c.kappa / 4.0);
    if (v > best) { best = v; best_w = wl + nu; }
  }
  EXPECT_NEAR(w, best_w, 1e-3 * c.kappa);
  EXPECT_NEAR(s, best, 1e-5 * best);
}
