#include <gtest/gtest.h>

#include <random>

#include "aers/quantum_core.hpp"

using namespace aers;

namespace {

Matrix random_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

}  // namespace

TEST(Annihilation, MatrixElements) {
  const Matrix a = annihilation(5);
  for (int n = 0; n < 5; ++n) {
    for (int m = 0; m < 5; ++m) {
      const double expect = (m == n + 1) ? std::sqrt(static_cast<double>(m)) : 0.0;
      EXPECT_DOUBLE_EQ(a(n, m).real(), expect);
      EXPECT_EQ(a(n, m).imag(), 0.0);
    }
  }
}

TEST(Annihilation, CommutatorIsIdentityBelowCutoff) {
  const int n = 6;
  const Matrix a = annihilation(n);
  const Matrix c = commutator(a, a.adjoint());
  for (int k = 0; k + 1 < n; ++k) EXPECT_NEAR(c(k, k).real(), 1.0, 1e-14);
  EXPECT_NEAR(c(n - 1, n - 1).real(), 1.0 - n, 1e-12);
}

TEST(SpinLowering, Algebra) {
  const Matrix s = spin_lowering();
  EXPECT_NEAR((s * s).norm(), 0.0, 0.0);
  const Matrix p = s.adjoint() * s;  // |e><e|
  EXPECT_EQ(p(1, 1), Complex(1.0));
  EXPECT_EQ(p(0, 0), Complex(0.0));
}

TEST(Kron, MixedProductProperty) {
  std::mt19937 rng(7);
  const Matrix a = random_matrix(2, rng), b = random_matrix(3, rng);
  const Matrix c = random_matrix(2, rng), d = random_matrix(3, rng);
  EXPECT_LT((kron(a, b) * kron(c, d) - kron(a * c, b * d)).norm(), 1e-12);
}

TEST(HilbertConfig, DimensionAndCap) {
  HilbertConfig cfg{4, 4};
  EXPECT_EQ(cfg.dimension(), 32);
  EXPECT_NO_THROW(cfg.validate());
  HilbertConfig big{10, 10};
  EXPECT_THROW(big.validate(), SizingError);
  HilbertConfig tiny{1, 4};
  EXPECT_THROW(tiny.validate(), SizingError);
}

TEST(BuildOperators, EmbeddingOrderAndCommutation) {
  const OperatorSet ops = build_operators({3, 4});
  EXPECT_EQ(ops.dim(), 24);
  // Operators on different factors commute.
  EXPECT_LT(commutator(ops.a.entries, ops.b.entries).norm(), 1e-14);
  EXPECT_LT(commutator(ops.sigma.entries, ops.a.entries).norm(), 1e-14);
  // Ordering antenna (x) cavity (x) phonon: sigma acts on the slowest index.
  const Matrix s_expected = kron(kron(spin_lowering(), Matrix::Identity(3, 3)), Matrix::Identity(4, 4));
  EXPECT_EQ((ops.sigma.entries - s_expected).norm(), 0.0);
}

TEST(DensityMatrix, AcceptsValidState) {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.25;
  rho(1, 1) = 0.75;
  rho(0, 1) = Complex(0.1, 0.2);
  rho(1, 0) = std::conj(rho(0, 1));
  EXPECT_NO_THROW(DensityMatrix{rho});
}

TEST(DensityMatrix, RejectsInvalidStates) {
  Matrix non_herm = Matrix::Identity(2, 2) * 0.5;
  non_herm(0, 1) = 0.3;
  EXPECT_THROW(DensityMatrix{non_herm}, NumericalError);
  EXPECT_THROW(DensityMatrix{Matrix::Identity(2, 2)}, NumericalError);
  Matrix negative = Matrix::Zero(2, 2);
  negative(0, 0) = 1.2;
  negative(1, 1) = -0.2;
  EXPECT_THROW(DensityMatrix{negative}, NumericalError);
}

TEST(Expectation, DimensionMismatchThrows) {
  const DensityMatrix rho(thermal_mode_state(3, 0.5));
  const OperatorMatrix a(annihilation(4), "a");
  EXPECT_THROW(expectation(a, rho), DimensionError);
}

TEST(Expectation, ThermalOccupationConverges) {
  const double nbar = 0.3;
  const DensityMatrix rho(thermal_mode_state(40, nbar));
  const OperatorMatrix a(annihilation(40), "a");
  EXPECT_NEAR(expectation(a.adjoint() * a, rho).real(), nbar, 1e-12);
  EXPECT_NEAR(rho.purity(), 1.0 / (2.0 * nbar + 1.0), 1e-12);
}

TEST(ThermalState, ZeroOccupationIsVacuum) {
  const Matrix rho = thermal_mode_state(4, 0.0);
  EXPECT_EQ(rho(0, 0), Complex(1.0));
  EXPECT_EQ(rho.trace(), Complex(1.0));
}
