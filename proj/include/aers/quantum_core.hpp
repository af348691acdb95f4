#pragma once

// Truncated composite Hilbert space (antenna ⊗ cavity ⊗ phonon) and the
// embedded ladder / pseudo-spin operators built on it.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "aers/errors.hpp"

namespace aers {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex I_unit{0.0, 1.0};

/// Fock truncations of the two bosonic modes. The antenna is always a
/// two-level system. Tensor ordering is fixed: antenna ⊗ cavity ⊗ phonon.
struct HilbertConfig {
  static constexpr int antenna_levels = 2;
  static constexpr int default_dimension_cap = 128;

  int cavity_levels = 4;
  int phonon_levels = 4;
  int dimension_cap = default_dimension_cap;

  int dimension() const { return antenna_levels * cavity_levels * phonon_levels; }

  void validate() const {
    if (cavity_levels < 2 || phonon_levels < 2) {
      throw SizingError("truncations must be >= 2 (cavity_levels=" +
                        std::to_string(cavity_levels) +
                        ", phonon_levels=" + std::to_string(phonon_levels) + ")");
    }
    const long long dim = static_cast<long long>(antenna_levels) * cavity_levels * phonon_levels;
    if (dim > dimension_cap) {
      throw SizingError("Hilbert dimension 2 x " + std::to_string(cavity_levels) + " x " +
                        std::to_string(phonon_levels) + " = " + std::to_string(dim) +
                        " exceeds the cap of " + std::to_string(dimension_cap));
    }
  }

  bool operator==(const HilbertConfig&) const = default;
};

/// Dense square operator on a (possibly composite) Hilbert space, in
/// dimensionless or angular-frequency units depending on its role.
struct OperatorMatrix {
  Matrix entries;
  std::string label;

  OperatorMatrix() = default;
  OperatorMatrix(Matrix m, std::string l = {}) : entries(std::move(m)), label(std::move(l)) {
    if (entries.rows() != entries.cols()) {
      throw DimensionError("operator '" + label + "' is not square");
    }
  }

  int dim() const { return static_cast<int>(entries.rows()); }

  OperatorMatrix adjoint() const {
    return {entries.adjoint(), label.empty() ? std::string{} : label + "^dag"};
  }

  bool is_hermitian(double tol = 1e-10) const {
    const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
  }
};

inline OperatorMatrix operator*(const OperatorMatrix& x, const OperatorMatrix& y) {
  if (x.dim() != y.dim()) throw DimensionError("operator product dimension mismatch");
  return {x.entries * y.entries, x.label + "*" + y.label};
}

inline Matrix commutator(const Matrix& x, const Matrix& y) { return x * y - y * x; }

inline Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

/// Truncated bosonic annihilation operator, <n|b|n+1> = sqrt(n+1).
inline Matrix annihilation(int levels) {
  Matrix m = Matrix::Zero(levels, levels);
  for (int n = 0; n + 1 < levels; ++n) m(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
  return m;
}

/// Pseudo-spin lowering operator |g><e| with basis {|g>, |e>}.
inline Matrix spin_lowering() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

struct OperatorSet {
  OperatorMatrix sigma;
  OperatorMatrix a;
  OperatorMatrix b;
  OperatorMatrix identity;
  HilbertConfig config;

  int dim() const { return identity.dim(); }
};

/// Embeds sigma, a, b into antenna ⊗ cavity ⊗ phonon. Pure and deterministic.
inline OperatorSet build_operators(const HilbertConfig& config) {
  config.validate();
  const Matrix id_s = Matrix::Identity(2, 2);
  const Matrix id_a = Matrix::Identity(config.cavity_levels, config.cavity_levels);
  const Matrix id_b = Matrix::Identity(config.phonon_levels, config.phonon_levels);
  const int dim = config.dimension();

  OperatorSet ops;
  ops.config = config;
  ops.sigma = {kron(kron(spin_lowering(), id_a), id_b), "sigma"};
  ops.a = {kron(kron(id_s, annihilation(config.cavity_levels)), id_b), "a"};
  ops.b = {kron(kron(id_s, id_a), annihilation(config.phonon_levels)), "b"};
  ops.identity = {Matrix::Identity(dim, dim), "I"};
  return ops;
}

/// Density matrix with validated physical invariants.
class DensityMatrix {
 public:
  static constexpr double hermiticity_tol = 1e-10;
  static constexpr double trace_tol = 1e-8;
  static constexpr double positivity_tol = 1e-8;

  DensityMatrix() = default;

  /// Validates Hermiticity, unit trace and positivity; throws NumericalError.
  explicit DensityMatrix(Matrix m) : entries_(std::move(m)) {
    if (entries_.rows() != entries_.cols()) throw DimensionError("density matrix is not square");
    check();
  }

  /// Skips validation; for intermediate results that are validated later.
  static DensityMatrix unchecked(Matrix m) {
    DensityMatrix rho;
    rho.entries_ = std::move(m);
    return rho;
  }

  const Matrix& entries() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  Complex trace() const { return entries_.trace(); }

  double min_eigenvalue() const {
    const Matrix herm = 0.5 * (entries_ + entries_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  double hermiticity_defect() const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  }

  double purity() const { return std::real((entries_ * entries_).trace()); }

  void check() const {
    if (hermiticity_defect() > hermiticity_tol) {
      throw NumericalError("density matrix not Hermitian (defect " +
                           std::to_string(hermiticity_defect()) + ")");
    }
    if (std::abs(trace() - 1.0) > trace_tol) {
      throw NumericalError("density matrix trace " + std::to_string(std::real(trace())) +
                           " != 1");
    }
    if (min_eigenvalue() < -positivity_tol) {
      throw NumericalError("density matrix has negative eigenvalue " +
                           std::to_string(min_eigenvalue()));
    }
  }

 private:
  Matrix entries_;
};

/// Tr[op * rho].
inline Complex expectation(const OperatorMatrix& op, const DensityMatrix& rho) {
  if (op.dim() != rho.dim()) {
    throw DimensionError("expectation: operator dim " + std::to_string(op.dim()) +
                         " vs state dim " + std::to_string(rho.dim()));
  }
  if (std::abs(rho.trace() - 1.0) > DensityMatrix::trace_tol) {
    throw NumericalError("expectation: state trace deviates from 1");
  }
  // Tr[A B] = sum_ij A_ij B_ji
  return (op.entries.transpose().cwiseProduct(rho.entries())).sum();
}

/// Thermal (Boltzmann) state of a single truncated mode with the given
/// untruncated mean occupation, renormalized on the truncated space.
inline Matrix thermal_mode_state(int levels, double mean_occupation) {
  Matrix rho = Matrix::Zero(levels, levels);
  if (mean_occupation <= 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  const double ratio = mean_occupation / (1.0 + mean_occupation);
  double norm = 0.0;
  for (int n = 0; n < levels; ++n) norm += std::pow(ratio, n);
  for (int n = 0; n < levels; ++n) rho(n, n) = std::pow(ratio, n) / norm;
  return rho;
}

}  // namespace aers
