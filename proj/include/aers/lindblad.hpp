#pragma once

// GKSL superoperators, steady states, quantum-regression correlators and
// omega^4-weighted emission spectra.
//
// Vectorization is column-major: vec(X)[i + j*d] = X(i, j), so that
// vec(A X B) = (B^T kron A) vec(X).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aers/errors.hpp"
#include "aers/quantum_core.hpp"

namespace aers {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<Complex>;

struct CollapseChannel {
  OperatorMatrix op;
  double rate = 0.0;  // rad/s; enters as (rate/2) D[op]
};

inline Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvectorize(const Vector& v, int dim) {
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

/// Tr[A X] for X given in vectorized form.
inline Complex trace_product(const Matrix& a, const Vector& vec_x) {
  const Eigen::Index d = a.rows();
  Complex acc = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) acc += a(j, i) * vec_x[i + j * d];
  }
  return acc;
}

namespace detail {

// Appends the nonzeros of (x kron y) * scale to the triplet list.
inline void kron_triplets(const Matrix& x, const Matrix& y, Complex scale,
                          std::vector<Triplet>& out) {
  const Eigen::Index ny = y.rows();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ynz;
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < ny; ++i)
      if (y(i, j) != Complex(0.0)) ynz.emplace_back(i, j);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Complex xv = x(i, j);
      if (xv == Complex(0.0)) continue;
      for (const auto& [yi, yj] : ynz) {
        out.emplace_back(i * ny + yi, j * ny + yj, scale * xv * y(yi, yj));
      }
    }
  }
}

inline double max_abs(const SparseMatrix& m) {
  double best = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
  return best;
}

using ComplexLD = std::complex<long double>;
using VectorLD = Eigen::Matrix<ComplexLD, Eigen::Dynamic, 1>;

// b - A x accumulated in extended precision, rounded back to double.
inline Vector residual_extended(const SparseMatrix& a, const Vector& x, const Vector& b) {
  VectorLD r(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) r[i] = ComplexLD(b[i].real(), b[i].imag());
  for (int k = 0; k < a.outerSize(); ++k) {
    const ComplexLD xk(x[k].real(), x[k].imag());
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      r[it.row()] -= ComplexLD(it.value().real(), it.value().imag()) * xk;
    }
  }
  Vector out(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i)
    out[i] = Complex(static_cast<double>(r[i].real()), static_cast<double>(r[i].imag()));
  return out;
}

}  // namespace detail

/// Superoperator L with L(rho) = -i[H, rho] + sum (r/2)(2 O rho O^dag - {O^dag O, rho}).
/// Stored sparse; a dense copy is materialized only for exponentials.
class Liouvillian {
 public:
  static Liouvillian assemble(const OperatorMatrix& h, const std::vector<CollapseChannel>& channels) {
    const int d = h.dim();
    if (!h.is_hermitian(1e-10)) throw ConfigError("Hamiltonian '" + h.label + "' is not Hermitian");
    for (const auto& ch : channels) {
      if (ch.op.dim() != d) {
        throw DimensionError("collapse operator '" + ch.op.label + "' has dim " +
                             std::to_string(ch.op.dim()) + ", Hamiltonian has " + std::to_string(d));
      }
      if (!(ch.rate >= 0.0) || !std::isfinite(ch.rate)) {
        throw ConfigError("collapse channel '" + ch.op.label + "' has invalid rate " +
                          std::to_string(ch.rate));
      }
    }

    const Matrix id = Matrix::Identity(d, d);
    std::vector<Triplet> trips;
    detail::kron_triplets(id, h.entries, Complex(0.0, -1.0), trips);
    detail::kron_triplets(h.entries.transpose(), id, Complex(0.0, 1.0), trips);
    for (const auto& ch : channels) {
      if (ch.rate == 0.0) continue;
      const Matrix& o = ch.op.entries;
      const Matrix odo = o.adjoint() * o;
      const double half = 0.5 * ch.rate;
      detail::kron_triplets(o.conjugate(), o, 2.0 * half, trips);
      detail::kron_triplets(id, odo, -half, trips);
      detail::kron_triplets(odo.transpose(), id, -half, trips);
    }
    Liouvillian out;
    out.dim_ = d;
    out.hamiltonian_ = h;
    out.channels_ = channels;
    out.matrix_.resize(d * d, d * d);
    out.matrix_.setFromTriplets(trips.begin(), trips.end());
    out.matrix_.prune(Complex(0.0), 0.0);
    out.matrix_.makeCompressed();
    return out;
  }

  int dim() const { return dim_; }
  int super_dim() const { return dim_ * dim_; }
  const SparseMatrix& matrix() const { return matrix_; }
  const OperatorMatrix& hamiltonian() const { return hamiltonian_; }
  const std::vector<CollapseChannel>& channels() const { return channels_; }

  Matrix dense() const { return Matrix(matrix_); }

  /// L(rho) evaluated directly in operator form.
  Matrix apply(const Matrix& rho) const {
    const Matrix& h = hamiltonian_.entries;
    Matrix out = Complex(0.0, -1.0) * (h * rho - rho * h);
    for (const auto& ch : channels_) {
      const Matrix& o = ch.op.entries;
      const Matrix odo = o.adjoint() * o;
      out += 0.5 * ch.rate * (2.0 * o * rho * o.adjoint() - odo * rho - rho * odo);
    }
    return out;
  }

  double max_abs_entry() const { return detail::max_abs(matrix_); }

  /// max_k |sum_i w_i L_ik| / max|L|, w = vec(I). Zero for an exact GKSL generator.
  double trace_preservation_defect() const {
    Vector col_sums = Vector::Zero(super_dim());
    for (int k = 0; k < matrix_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) {
        const int i = static_cast<int>(it.row());
        if (i % (dim_ + 1) == 0) col_sums[k] += it.value();
      }
    }
    const double scale = std::max(max_abs_entry(), std::numeric_limits<double>::min());
    return col_sums.cwiseAbs().maxCoeff() / scale;
  }

 private:
  int dim_ = 0;
  SparseMatrix matrix_;
  OperatorMatrix hamiltonian_;
  std::vector<CollapseChannel> channels_;
};

/// Sparse system "L - i nu" with row 0 replaced by the (scaled) trace functional.
/// The sparsity pattern is analyzed once and refactorized per shift.
class TraceConstrainedSolver {
 public:
  explicit TraceConstrainedSolver(const Liouvillian& l) : dim_(l.dim()) {
    const int n = l.super_dim();
    scale_ = std::max(l.max_abs_entry(), 1.0);
    std::vector<Triplet> trips;
    const SparseMatrix& m = l.matrix();
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
    for (int i = 1; i < n; ++i) trips.emplace_back(i, i, Complex(0.0));  // keep diagonal slots
    for (int i = 0; i < dim_; ++i) trips.emplace_back(0, i + i * dim_, Complex(scale_));
    base_.resize(n, n);
    base_.setFromTriplets(trips.begin(), trips.end());
    base_.makeCompressed();
    diag_index_.assign(n, -1);
    for (int k = 1; k < n; ++k) {
      for (SparseMatrix::InnerIterator it(base_, k); it; ++it) {
        if (it.row() == k) {
          diag_index_[k] = static_cast<Eigen::Index>(&it.valueRef() - base_.valuePtr());
        }
      }
    }
    current_ = base_;
    lu_.analyzePattern(current_);
  }

  /// Factorizes L - i*shift (rows 1..n-1). Returns false on a singular factorization.
  bool factorize(double shift) {
    current_ = base_;
    if (shift != 0.0) {
      Complex* vals = current_.valuePtr();
      for (std::size_t k = 1; k < diag_index_.size(); ++k) vals[diag_index_[k]] -= Complex(0.0, shift);
    }
    lu_.factorize(current_);
    factorized_ = lu_.info() == Eigen::Success;
    return factorized_;
  }

  /// Solves with one or more rounds of extended-precision iterative refinement.
  Vector solve(const Vector& rhs, int refinements = 1) const {
    Vector x = lu_.solve(rhs);
    for (int r = 0; r < refinements; ++r) x += lu_.solve(detail::residual_extended(current_, x, rhs));
    return x;
  }

  /// Estimate of sigma_min(M)/max|M| by inverse iteration on M^H M.
  double relative_sigma_min(int iterations = 30) const {
    const Eigen::Index n = current_.rows();
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(1.0 + 0.37 * std::sin(1.0 + i), 0.21 * std::cos(3.0 * i));
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
      const Vector u = lu_.solve(v);
      const Vector z = lu_.adjoint().solve(u);
      lambda = z.norm();
      if (!std::isfinite(lambda) || lambda == 0.0) return 0.0;
      v = z / lambda;
    }
    const double sigma = 1.0 / std::sqrt(lambda);
    return sigma / std::max(detail::max_abs(current_), std::numeric_limits<double>::min());
  }

  double trace_scale() const { return scale_; }
  int dim() const { return dim_; }

 private:
  int dim_;
  double scale_ = 1.0;
  SparseMatrix base_;
  SparseMatrix current_;
  std::vector<Eigen::Index> diag_index_;
  mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool factorized_ = false;
};

/// Matrix-free solver for (L - i nu + c Q Tr) Y = R on operator space, using
/// right-preconditioned restarted GMRES. The preconditioner inverts the
/// no-jump part G Y + Y G^dag - i nu Y (G = -iH - sum r/2 O^dag O) through a
/// Schur decomposition of G. The rank-one term c Q Tr(.) with Tr Q = 1 removes
/// the null space so that the steady state solves (...) rho = c Q.
class SylvesterGmresSolver {
 public:
  explicit SylvesterGmresSolver(const Liouvillian& l, double tolerance = 1e-10, int restart = 60,
                                int max_iterations = 3000)
      : dim_(l.dim()), tol_(tolerance), restart_(restart), max_iter_(max_iterations) {
    const int d = dim_;
    const Matrix& h = l.hamiltonian().entries;
    g_ = Complex(0.0, -1.0) * h;
    for (const auto& ch : l.channels()) {
      if (ch.rate == 0.0) continue;
      g_ -= 0.5 * ch.rate * (ch.op.entries.adjoint() * ch.op.entries);
      jumps_.push_back({ch.op.entries.sparseView(), ch.rate});
    }
    Eigen::ComplexSchur<Matrix> schur(g_);
    if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition of the no-jump generator failed");
    u_ = schur.matrixU();
    t_ = schur.matrixT();
    shift_scale_ = std::max(1.0, g_.cwiseAbs().maxCoeff());
    q_ = Matrix::Identity(d, d) / static_cast<double>(d);
  }

  int dim() const { return dim_; }
  double rank_one_scale() const { return shift_scale_; }
  const Matrix& rank_one_direction() const { return q_; }

  Matrix apply(const Matrix& y, double nu) const {
    Matrix out = g_ * y + y * g_.adjoint() - Complex(0.0, nu) * y + (shift_scale_ * y.trace()) * q_;
    for (const auto& jp : jumps_) {
      const Matrix oy = jp.op * y;
      out.noalias() += jp.rate * (oy * SparseMatrix(jp.op.adjoint()));
    }
    return out;
  }

  /// Solves T Z + Z T^dag - i nu Z = U^dag R U in the Schur basis.
  Matrix precondition(const Matrix& rhs, double nu) const {
    const int n = dim_;
    const Matrix c = u_.adjoint() * rhs * u_;
    Matrix z(n, n);
    Vector col(n);
    Matrix ts = t_;
    for (int j = n - 1; j >= 0; --j) {
      col = c.col(j);
      if (j + 1 < n) col.noalias() -= z.rightCols(n - j - 1) * t_.row(j).tail(n - j - 1).adjoint();
      const Complex shift = std::conj(t_(j, j)) - Complex(0.0, nu);
      ts.diagonal() = t_.diagonal().array() + shift;
      ts.triangularView<Eigen::Upper>().solveInPlace(col);
      z.col(j) = col;
    }
    return u_ * z * u_.adjoint();
  }

  /// Returns Y; throws NumericalError when GMRES stalls.
  Matrix solve(const Matrix& rhs, double nu, int refinements = 2) const {
    Matrix y = gmres(rhs, nu);
    for (int r = 0; r < refinements; ++r) {
      const Matrix res = residual_extended(y, rhs, nu);
      if (res.cwiseAbs().maxCoeff() == 0.0) break;
      y += gmres(res, nu);
    }
    return y;
  }

  int last_iterations() const { return last_iterations_; }

 private:
  using MatrixLD = Eigen::Matrix<detail::ComplexLD, Eigen::Dynamic, Eigen::Dynamic>;

  static MatrixLD to_ld(const Matrix& m) { return m.cast<detail::ComplexLD>(); }

  Matrix residual_extended(const Matrix& y, const Matrix& rhs, double nu) const {
    const MatrixLD yl = to_ld(y);
    const MatrixLD gl = to_ld(g_);
    MatrixLD out = to_ld(rhs) - (gl * yl + yl * gl.adjoint());
    out += detail::ComplexLD(0.0L, static_cast<long double>(nu)) * yl;
    const detail::ComplexLD tr = yl.trace() * static_cast<long double>(shift_scale_);
    out -= tr * to_ld(q_);
    for (const auto& jp : jumps_) {
      const Eigen::SparseMatrix<detail::ComplexLD> ol = jp.op.cast<detail::ComplexLD>();
      const MatrixLD oy = ol * yl;
      const Eigen::SparseMatrix<detail::ComplexLD> old = ol.adjoint();
      out -= static_cast<long double>(jp.rate) * (oy * old);
    }
    return out.cast<Complex>();
  }

  static Complex dot(const Matrix& a, const Matrix& b) { return (a.conjugate().cwiseProduct(b)).sum(); }

  Matrix gmres(const Matrix& b, double nu) const {
    const int n = dim_;
    const double bnorm = b.norm();
    Matrix x = Matrix::Zero(n, n);
    last_iterations_ = 0;
    if (bnorm == 0.0) return x;
    const int m = restart_;
    std::vector<Matrix> v(m + 1), z(m);
    Matrix hmat = Matrix::Zero(m + 1, m);
    Vector cs(m), sn(m), s(m + 1);
    Matrix r = b - apply(x, nu);
    int total = 0;
    while (total < max_iter_) {
      double beta = r.norm();
      if (beta <= tol_ * bnorm) return x;
      v[0] = r / beta;
      s.setZero();
      s[0] = beta;
      int k = 0;
      for (; k < m && total < max_iter_; ++k, ++total) {
        z[k] = precondition(v[k], nu);
        Matrix w = apply(z[k], nu);
        for (int i = 0; i <= k; ++i) {
          hmat(i, k) = dot(v[i], w);
          w -= hmat(i, k) * v[i];
        }
        hmat(k + 1, k) = w.norm();
        v[k + 1] = hmat(k + 1, k) != Complex(0.0) ? Matrix(w / hmat(k + 1, k)) : w;
        for (int i = 0; i < k; ++i) {
          const Complex t = std::conj(cs[i]) * hmat(i, k) + std::conj(sn[i]) * hmat(i + 1, k);
          hmat(i + 1, k) = -sn[i] * hmat(i, k) + cs[i] * hmat(i + 1, k);
          hmat(i, k) = t;
        }
        const double denom = std::hypot(std::abs(hmat(k, k)), std::abs(hmat(k + 1, k)));
        if (denom == 0.0) { cs[k] = 1.0; sn[k] = 0.0; }
        else { cs[k] = hmat(k, k) / denom; sn[k] = hmat(k + 1, k) / denom; }
        hmat(k, k) = std::conj(cs[k]) * hmat(k, k) + std::conj(sn[k]) * hmat(k + 1, k);
        hmat(k + 1, k) = 0.0;
        s[k + 1] = -sn[k] * s[k];
        s[k] = std::conj(cs[k]) * s[k];
        if (std::abs(s[k + 1]) <= tol_ * bnorm) { ++k; ++total; break; }
      }
      // back substitution on the k x k triangle
      Vector yk(k);
      for (int i = k - 1; i >= 0; --i) {
        Complex acc = s[i];
        for (int j = i + 1; j < k; ++j) acc -= hmat(i, j) * yk[j];
        yk[i] = acc / hmat(i, i);
      }
      for (int i = 0; i < k; ++i) x += yk[i] * z[i];
      r = b - apply(x, nu);
      last_iterations_ = total;
      if (r.norm() <= tol_ * bnorm) return x;
    }
    throw NumericalError("GMRES did not converge within " + std::to_string(max_iter_) +
                         " iterations (relative residual " + std::to_string(r.norm() / bnorm) + ")");
  }

  int dim_;
  double tol_;
  int restart_;
  int max_iter_;
  Matrix g_, u_, t_, q_;
  double shift_scale_ = 1.0;
  struct Jump {
    SparseMatrix op;
    double rate;
  };
  std::vector<Jump> jumps_;
  mutable int last_iterations_ = 0;
};

enum class SolverKind { automatic, direct, iterative };

/// Direct sparse LU up to this super-operator size, matrix-free GMRES above.
inline constexpr int direct_solver_limit = 1024;

inline bool use_direct(SolverKind kind, const Liouvillian& l) {
  if (kind == SolverKind::direct) return true;
  if (kind == SolverKind::iterative) return false;
  return l.super_dim() <= direct_solver_limit;
}

struct SteadyStateOptions {
  SolverKind solver = SolverKind::automatic;
  double degenerate_threshold = 1e-12;   // relative sigma_min below which the null space is not unique
  double warning_threshold = 1e-9;       // relative sigma_min below which a conditioning warning is attached
  double residual_tolerance = 1e-10;     // ||L rho|| / ||L|| (max norms)
  bool estimate_conditioning = true;     // direct solver only
};

struct SteadyStateResult {
  DensityMatrix rho;
  double relative_residual = 0.0;
  double relative_sigma_min = 0.0;  // NaN when not estimated
  std::string solver;
  std::vector<std::string> warnings;
};

inline SteadyStateResult steady_state(const Liouvillian& l, const SteadyStateOptions& opt = {}) {
  const int d = l.dim();
  SteadyStateResult res;
  res.relative_sigma_min = std::numeric_limits<double>::quiet_NaN();
  Matrix rho;
  if (use_direct(opt.solver, l)) {
    res.solver = "sparse-lu";
    TraceConstrainedSolver solver(l);
    if (!solver.factorize(0.0)) {
      throw DegenerateSteadyStateError("steady state is not unique: trace-constrained Liouvillian is singular");
    }
    if (opt.estimate_conditioning) {
      res.relative_sigma_min = solver.relative_sigma_min();
      if (!(res.relative_sigma_min >= opt.degenerate_threshold)) {
        throw DegenerateSteadyStateError("steady state is not unique: relative smallest singular value " +
                                         std::to_string(res.relative_sigma_min) + " below " +
                                         std::to_string(opt.degenerate_threshold));
      }
      if (res.relative_sigma_min < opt.warning_threshold) {
        res.warnings.push_back("ill-conditioned steady-state system (relative sigma_min " +
                               std::to_string(res.relative_sigma_min) + ")");
      }
    }
    Vector rhs = Vector::Zero(l.super_dim());
    rhs[0] = solver.trace_scale();
    rho = unvectorize(solver.solve(rhs, 2), d);
  } else {
    res.solver = "gmres";
    SylvesterGmresSolver solver(l);
    try {
      rho = solver.solve(solver.rank_one_scale() * solver.rank_one_direction(), 0.0);
    } catch (const NumericalError& e) {
      throw DegenerateSteadyStateError(std::string("steady-state solve failed (singular or non-unique?): ") +
                                       e.what());
    }
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  if (!std::isfinite(std::abs(rho.trace())) || std::abs(rho.trace()) == 0.0) {
    throw DegenerateSteadyStateError("steady-state solve produced a traceless or non-finite state");
  }
  rho /= rho.trace();

  const double lnorm = std::max(l.max_abs_entry(), std::numeric_limits<double>::min());
  res.relative_residual = l.apply(rho).cwiseAbs().maxCoeff() / lnorm;
  if (res.relative_residual > opt.residual_tolerance) {
    throw NumericalError("steady-state residual " + std::to_string(res.relative_residual) +
                         " exceeds tolerance");
  }
  res.rho = DensityMatrix(std::move(rho));
  return res;
}

/// One-step propagator exp(L dt), dense. Limited to small spaces.
inline Matrix step_propagator(const Liouvillian& l, double dt, int max_super_dim = 4096) {
  if (l.super_dim() > max_super_dim) {
    throw SizingError("dense propagator of size " + std::to_string(l.super_dim()) +
                      " exceeds limit " + std::to_string(max_super_dim));
  }
  const Matrix gen = l.dense() * dt;
  const Matrix p = gen.exp();
  if (!p.allFinite()) throw NumericalError("matrix exponential did not converge (non-finite entries)");
  // Trace functional must be a left fixed point of exp(L dt).
  const int d = l.dim();
  double defect = 0.0;
  for (Eigen::Index col = 0; col < p.cols(); ++col) {
    Complex s = 0.0;
    for (int i = 0; i < d; ++i) s += p(i + i * d, col);
    const Complex target = (col % (d + 1) == 0) ? Complex(1.0) : Complex(0.0);
    defect = std::max(defect, std::abs(s - target));
  }
  if (defect > 1e-8) {
    throw NumericalError("matrix exponential lost trace preservation (defect " + std::to_string(defect) + ")");
  }
  return p;
}

/// States exp(L t_k) rho0 on t_k = k*dt, k = 0..steps.
inline std::vector<Matrix> propagate(const Liouvillian& l, const Matrix& rho0, double dt, int steps) {
  const Matrix p = step_propagator(l, dt);
  std::vector<Matrix> out;
  out.reserve(steps + 1);
  Vector x = vectorize(rho0);
  out.push_back(rho0);
  for (int k = 0; k < steps; ++k) {
    x = p * x;
    out.push_back(unvectorize(x, l.dim()));
  }
  return out;
}

/// Smallest nonzero decay rate |Re lambda| of L (dense eigen-decomposition).
inline double slowest_decay_rate(const Liouvillian& l) {
  if (l.super_dim() > 1024) throw SizingError("eigen-decomposition of L limited to super-dimension 1024");
  Eigen::ComplexEigenSolver<Matrix> es(l.dense(), false);
  const auto& ev = es.eigenvalues();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev[i]));
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double r = std::abs(ev[i].real());
    if (r > 1e-9 * scale) best = std::min(best, r);
  }
  if (!std::isfinite(best)) throw NumericalError("Liouvillian has no decaying modes");
  return best;
}

struct CorrelationSeries {
  std::vector<double> tau;            // s, uniform, tau[0] = 0
  std::vector<Complex> values;        // <A(tau) B(0)>
  Complex plateau = 0.0;              // Tr[A rho] Tr[B rho]
  std::string label_a;
  std::string label_b;
};

inline std::vector<double> uniform_grid(double t_max, int points) {
  if (points < 2 || !(t_max > 0.0)) throw ConfigError("tau grid needs >= 2 points and t_max > 0");
  std::vector<double> t(points);
  const double h = t_max / (points - 1);
  for (int k = 0; k < points; ++k) t[k] = k * h;
  return t;
}

/// Default delay grid: `points` samples spanning span_factor / (slowest decay rate).
inline std::vector<double> default_tau_grid(const Liouvillian& l, int points = 4096, double span_factor = 8.0) {
  return uniform_grid(span_factor / slowest_decay_rate(l), points);
}

inline double grid_step(const std::vector<double>& tau) {
  if (tau.size() < 2) throw ConfigError("tau grid needs at least two points");
  if (tau.front() != 0.0) throw ConfigError("tau grid must start at 0");
  const double h = tau[1] - tau[0];
  if (!(h > 0.0)) throw ConfigError("tau grid must be increasing");
  for (std::size_t k = 1; k < tau.size(); ++k) {
    if (std::abs((tau[k] - tau[k - 1]) - h) > 1e-9 * h + 1e-12 * std::abs(tau[k])) {
      throw ConfigError("tau grid is not uniform at index " + std::to_string(k));
    }
  }
  return h;
}

/// <A(tau) B(0)> = Tr[A exp(L tau)(B rho_ss)] via a reused one-step exponential.
inline CorrelationSeries two_time_correlator(const Liouvillian& l, const DensityMatrix& rho_ss,
                                             const OperatorMatrix& a, const OperatorMatrix& b,
                                             const std::vector<double>& tau) {
  const double h = grid_step(tau);
  if (a.dim() != l.dim() || b.dim() != l.dim() || rho_ss.dim() != l.dim()) {
    throw DimensionError("correlator operands do not match the Liouvillian dimension");
  }
  const Matrix p = step_propagator(l, h);
  CorrelationSeries out;
  out.tau = tau;
  out.label_a = a.label;
  out.label_b = b.label;
  out.values.resize(tau.size());
  out.plateau = expectation(a, rho_ss) * expectation(b, rho_ss);
  Vector x = vectorize(b.entries * rho_ss.entries());
  for (std::size_t k = 0; k < tau.size(); ++k) {
    out.values[k] = trace_product(a.entries, x);
    if (k + 1 < tau.size()) x = p * x;
  }
  return out;
}

struct SpectrumResult {
  std::vector<double> omega;     // absolute angular frequency, rad/s
  std::vector<double> density;   // omega^4-weighted
  double frame_shift = 0.0;      // omega_l
  int clipped_count = 0;         // small negatives set to zero
  double min_raw = 0.0;          // most negative raw value before clipping
  double coherent_weight = 0.0;  // omega_l^4 * 2 pi * Re(plateau) when not subtracted
  std::vector<std::string> diagnostics;

  /// Index of the largest density value within [lo, hi] (absolute rad/s).
  std::size_t argmax_in(double lo, double hi) const {
    std::size_t best = omega.size();
    for (std::size_t i = 0; i < omega.size(); ++i) {
      if (omega[i] < lo || omega[i] > hi) continue;
      if (best == omega.size() || density[i] > density[best]) best = i;
    }
    if (best == omega.size()) throw ConfigError("no spectral grid points in requested window");
    return best;
  }

  /// Interior local maxima with density above rel_floor * global max.
  std::vector<std::size_t> local_maxima(double rel_floor = 1e-3) const {
    std::vector<std::size_t> out;
    if (density.size() < 3) return out;
    const double top = *std::max_element(density.begin(), density.end());
    for (std::size_t i = 1; i + 1 < density.size(); ++i) {
      if (density[i] > density[i - 1] && density[i] >= density[i + 1] && density[i] > rel_floor * top) {
        out.push_back(i);
      }
    }
    return out;
  }
};

/// Zero-padded (x pad) DFT detuning grid for a delay grid of step h and n points.
inline std::vector<double> default_detuning_grid(double h, std::size_t n, int pad = 4) {
  const std::size_t m = n * static_cast<std::size_t>(pad);
  const double dnu = 2.0 * std::numbers::pi / (static_cast<double>(m) * h);
  std::vector<double> nu(m);
  for (std::size_t j = 0; j < m; ++j) nu[j] = (static_cast<double>(j) - static_cast<double>(m / 2)) * dnu;
  return nu;
}

namespace detail {

// Applies the omega^4 weight and the negative-value policy.
inline void finish_spectrum(SpectrumResult& out, std::vector<double>& raw, double neg_rel) {
  double peak = 0.0;
  for (double v : raw) peak = std::max(peak, v);
  out.min_raw = raw.empty() ? 0.0 : *std::min_element(raw.begin(), raw.end());
  int deep = 0;
  for (double& v : raw) {
    if (v >= 0.0) continue;
    if (v >= -neg_rel * peak) {
      v = 0.0;
      ++out.clipped_count;
    } else {
      ++deep;
    }
  }
  if (deep > 0) {
    out.diagnostics.push_back(std::to_string(deep) + " spectral points below -" + std::to_string(neg_rel) +
                              " x peak (most negative " + std::to_string(out.min_raw) + ")");
  }
  out.density = std::move(raw);
}

}  // namespace detail

/// S(omega) = omega^4 * 2 Re int_0^inf e^{-i(omega - omega_l) tau} (c(tau) - c_inf) dtau,
/// with c_inf the analytic plateau. The integral treats c as piecewise linear
/// between samples and integrates the oscillatory factor exactly.
inline SpectrumResult spectrum_from_correlator(const CorrelationSeries& series, double omega_l,
                                               bool subtract_coherent,
                                               std::optional<std::vector<double>> detuning = std::nullopt,
                                               double decay_tolerance = 1e-3,
                                               double negative_tolerance = 1e-6) {
  const double h = grid_step(series.tau);
  const std::size_t n = series.values.size();
  std::vector<Complex> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = series.values[k] - series.plateau;

  const double f0 = std::abs(f.front());
  const double fend = std::abs(f.back());
  if (f0 > 0.0 && fend >= decay_tolerance * f0) {
    const double t_max = series.tau.back();
    double required = 2.0 * t_max;
    // envelope over the second half of the grid
    const double fmid = std::abs(f[n / 2]);
    if (fmid > fend && fend > 0.0) {
      const double rate = std::log(fmid / fend) / (t_max - series.tau[n / 2]);
      const double need = std::log(f0 / (decay_tolerance * f0 * 0.5)) / rate;
      if (std::isfinite(need)) required = std::max(required, need);
    }
    throw TruncationError("correlator has not decayed: |c(tau_max) - c_inf| / |c(0) - c_inf| = " +
                              std::to_string(fend / f0) + "; need tau_max >= " + std::to_string(required) + " s",
                          required);
  }

  SpectrumResult out;
  out.frame_shift = omega_l;
  const std::vector<double> nu = detuning ? *detuning : default_detuning_grid(h, n);
  out.omega.resize(nu.size());
  std::vector<double> raw(nu.size(), 0.0);

  for (std::size_t j = 0; j < nu.size(); ++j) {
    const double theta = nu[j] * h;
    Complex i0, i1;
    if (std::abs(theta) < 1e-2) {
      const double t2 = theta * theta;
      i0 = Complex(1.0 - t2 / 6.0 + t2 * t2 / 120.0, -theta / 2.0 + theta * t2 / 24.0);
      i1 = Complex(0.5 - t2 / 8.0 + t2 * t2 / 144.0, -theta / 3.0 + theta * t2 / 30.0);
    } else {
      const Complex a(0.0, -theta);
      const Complex ea = std::exp(a);
      i0 = (ea - 1.0) / a;
      i1 = ea * (1.0 / a - 1.0 / (a * a)) + 1.0 / (a * a);
    }
    const Complex w_left = i0 - i1;
    const Complex step = std::exp(Complex(0.0, -theta));
    Complex phase = 1.0;
    Complex acc = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (k % 256 == 0) phase = std::exp(Complex(0.0, -nu[j] * series.tau[k]));
      acc += phase * (f[k] * w_left + f[k + 1] * i1);
      phase *= step;
    }
    const double w = omega_l + nu[j];
    out.omega[j] = w;
    raw[j] = std::pow(w, 4) * 2.0 * (acc * h).real();
  }
  if (!subtract_coherent) {
    out.coherent_weight = std::pow(omega_l, 4) * 2.0 * std::numbers::pi * series.plateau.real();
  }
  detail::finish_spectrum(out, raw, negative_tolerance);
  return out;
}

/// Frequency-domain regression: S(omega) = omega^4 * 2 Re Tr[A Y], where
/// (L - i nu) Y = -(B rho - Tr[B rho] rho) and Tr Y = 0, nu = omega - omega_l.
/// Equivalent to the time-domain route without a delay grid.
class ResolventSpectrum {
 public:
  ResolventSpectrum(const Liouvillian& l, const DensityMatrix& rho_ss, const OperatorMatrix& a,
                    const OperatorMatrix& b, double omega_l, SolverKind kind = SolverKind::automatic)
      : a_(a.entries), omega_l_(omega_l), dim_(l.dim()) {
    if (a.dim() != l.dim() || b.dim() != l.dim() || rho_ss.dim() != l.dim()) {
      throw DimensionError("resolvent operands do not match the Liouvillian dimension");
    }
    const Matrix& rho = rho_ss.entries();
    const Complex mean_b = expectation(b, rho_ss);
    x_ = b.entries * rho - mean_b * rho;
    if (use_direct(kind, l)) {
      direct_.emplace(l);
      rhs_ = -vectorize(x_);
      rhs_[0] = 0.0;
    } else {
      iterative_.emplace(l);
    }
  }

  /// int_0^inf e^{-i nu tau} Tr[A e^{L tau} X] dtau.
  Complex transform(double nu) {
    if (direct_) {
      if (!direct_->factorize(nu)) {
        throw NumericalError("resolvent factorization failed at detuning " + std::to_string(nu));
      }
      return trace_product(a_, direct_->solve(rhs_, 1));
    }
    const Matrix y = iterative_->solve(-x_, nu);
    return (a_.transpose().cwiseProduct(y)).sum();
  }

  double density(double omega) {
    return std::pow(omega, 4) * 2.0 * transform(omega - omega_l_).real();
  }

  SpectrumResult evaluate(const std::vector<double>& omega, double negative_tolerance = 1e-6) {
    SpectrumResult out;
    out.frame_shift = omega_l_;
    out.omega = omega;
    std::vector<double> raw(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) raw[i] = density(omega[i]);
    detail::finish_spectrum(out, raw, negative_tolerance);
    return out;
  }

  /// Maximum of the density on [lo, hi]: coarse scan then golden-section refinement
  /// down to a bracket of rel_tol * (hi - lo).
  std::pair<double, double> peak(double lo, double hi, int coarse = 9, double rel_tol = 1e-3) {
    double best_w = lo, best_s = -std::numeric_limits<double>::infinity();
    const double step = (hi - lo) / (coarse - 1);
    for (int i = 0; i < coarse; ++i) {
      const double w = lo + i * step;
      const double s = density(w);
      if (s > best_s) { best_s = s; best_w = w; }
    }
    double a = std::max(lo, best_w - step), b = std::min(hi, best_w + step);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = density(c), fd = density(d);
    while ((b - a) > rel_tol * std::abs(hi - lo)) {
      if (fc > fd) { b = d; d = c; fd = fc; c = b - g * (b - a); fc = density(c); }
      else { a = c; c = d; fc = fd; d = a + g * (b - a); fd = density(d); }
    }
    const double w = 0.5 * (a + b);
    const double s = density(w);
    if (best_s > s) return {best_w, best_s};
    return {w, s};
  }

  double omega_l() const { return omega_l_; }
  bool direct() const { return direct_.has_value(); }

 private:
  std::optional<TraceConstrainedSolver> direct_;
  std::optional<SylvesterGmresSolver> iterative_;
  Matrix a_;
  Matrix x_;
  Vector rhs_;
  double omega_l_;
  int dim_;
};

}  // namespace aers
