#pragma once

// Dense complex operator algebra over qubit registers.
//
// Basis: computational ordering, site 0 is the leftmost tensor factor (most
// significant bit of the basis index). sigma_z = diag(+1, -1), so |0> is the
// +1 eigenvector and sigma_plus = |0><1| annihilates |0>.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>

#include "spinpurge/errors.hpp"

namespace spinpurge::qmat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr int kMaxQubits = 13;
inline constexpr double kHermitianTol = 1e-12;

inline bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

// Number of qubits q with 2^q == dim; throws for anything else.
inline int qubits_for_dim(Index dim) {
  if (dim < 2 || !is_power_of_two(dim)) {
    throw InvalidArgument("dimension " + std::to_string(dim) + " is not 2^q with q >= 1");
  }
  int q = 0;
  while ((Index{1} << q) < dim) ++q;
  return q;
}

inline Index dim_for_qubits(int qubits) {
  if (qubits < 1) throw InvalidArgument("qubit count must be >= 1");
  if (qubits > kMaxQubits) {
    throw LimitExceeded("qubit count " + std::to_string(qubits) + " exceeds dense ceiling " +
                        std::to_string(kMaxQubits));
  }
  return Index{1} << qubits;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const Matrix& m) { return max_abs(m - m.adjoint()); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

class DenseOperator {
 public:
  explicit DenseOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InvalidArgument("operator matrix must be square");
    qubits_ = qubits_for_dim(m_.rows());
    if (qubits_ > kMaxQubits) throw LimitExceeded("operator exceeds dense qubit ceiling");
  }

  static DenseOperator identity(int qubits) {
    const Index d = dim_for_qubits(qubits);
    return DenseOperator(Matrix::Identity(d, d));
  }
  static DenseOperator zero(int qubits) {
    const Index d = dim_for_qubits(qubits);
    return DenseOperator(Matrix::Zero(d, d));
  }

  int qubits() const noexcept { return qubits_; }
  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

  // Hermitian within tol in max-norm, scaled by the operator's magnitude when that exceeds 1.
  bool is_hermitian(double tol = kHermitianTol) const {
    return hermiticity_defect(m_) <= tol * std::max(1.0, max_abs(m_));
  }

  DenseOperator adjoint() const { return DenseOperator(m_.adjoint()); }

  DenseOperator& operator+=(const DenseOperator& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  DenseOperator& operator-=(const DenseOperator& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  DenseOperator& operator*=(Complex s) {
    m_ *= s;
    return *this;
  }

  friend DenseOperator operator+(DenseOperator a, const DenseOperator& b) { return a += b; }
  friend DenseOperator operator-(DenseOperator a, const DenseOperator& b) { return a -= b; }
  friend DenseOperator operator*(Complex s, DenseOperator a) { return a *= s; }
  friend DenseOperator operator*(DenseOperator a, Complex s) { return a *= s; }
  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
    a.check_same(b);
    return DenseOperator(a.m_ * b.m_);
  }

 private:
  void check_same(const DenseOperator& o) const {
    if (o.dim() != dim()) {
      throw InvalidArgument("operator dimension mismatch: " + std::to_string(dim()) + " vs " +
                            std::to_string(o.dim()));
    }
  }

  Matrix m_;
  int qubits_ = 0;
};

inline DenseOperator commutator(const DenseOperator& a, const DenseOperator& b) { return a * b - b * a; }

inline double max_norm(const DenseOperator& op) { return max_abs(op.matrix()); }

// Largest singular value.
inline double operator_norm(const DenseOperator& op) {
  Eigen::JacobiSVD<Matrix> svd(op.matrix());
  return svd.singularValues()(0);
}

enum class PauliAxis { X, Y, Z, Plus, Minus };

inline Eigen::Matrix2cd single_qubit(PauliAxis axis) {
  const Complex i{0.0, 1.0};
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (axis) {
    case PauliAxis::X: m << 0, 1, 1, 0; break;
    case PauliAxis::Y: m << 0, -i, i, 0; break;
    case PauliAxis::Z: m << 1, 0, 0, -1; break;
    case PauliAxis::Plus: m << 0, 1, 0, 0; break;
    case PauliAxis::Minus: m << 0, 0, 1, 0; break;
  }
  return m;
}

inline int bit_of(Index basis_index, int site, int qubits) {
  return static_cast<int>((basis_index >> (qubits - 1 - site)) & 1);
}

inline DenseOperator pauli_on_site(PauliAxis axis, int site, int qubits) {
  const Index d = dim_for_qubits(qubits);
  if (site < 0 || site >= qubits) {
    throw InvalidArgument("site " + std::to_string(site) + " out of range for " + std::to_string(qubits) +
                          " qubits");
  }
  const Eigen::Matrix2cd p = single_qubit(axis);
  const Index mask = Index{1} << (qubits - 1 - site);
  Matrix m = Matrix::Zero(d, d);
  for (Index col = 0; col < d; ++col) {
    const int b = bit_of(col, site, qubits);
    for (int b2 = 0; b2 < 2; ++b2) {
      const Complex v = p(b2, b);
      if (v == Complex{}) continue;
      const Index row = b2 == b ? col : (col ^ mask);
      m(row, col) = v;
    }
  }
  return DenseOperator(std::move(m));
}

// Swap of two qubit factors, the permutation (1 + XX + YY + ZZ)/2.
inline DenseOperator swap_operator(int site_a, int site_b, int qubits) {
  const Index d = dim_for_qubits(qubits);
  if (site_a < 0 || site_a >= qubits || site_b < 0 || site_b >= qubits) {
    throw InvalidArgument("swap site out of range");
  }
  Matrix m = Matrix::Zero(d, d);
  const Index ma = Index{1} << (qubits - 1 - site_a);
  const Index mb = Index{1} << (qubits - 1 - site_b);
  for (Index col = 0; col < d; ++col) {
    const bool ba = (col & ma) != 0;
    const bool bb = (col & mb) != 0;
    const Index row = ba == bb ? col : (col ^ ma ^ mb);
    m(row, col) = 1.0;
  }
  return DenseOperator(std::move(m));
}

// Spectral decomposition of a Hermitian generator; propagators at any time reuse it.
class HermitianPropagator {
 public:
  explicit HermitianPropagator(const DenseOperator& h) {
    if (!h.is_hermitian()) {
      throw InvalidArgument("generator is not Hermitian (defect " +
                            std::to_string(hermiticity_defect(h.matrix())) + ")");
    }
    const Matrix sym = 0.5 * (h.matrix() + h.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  const RealVector& eigenvalues() const noexcept { return values_; }
  const Matrix& eigenvectors() const noexcept { return vectors_; }

  // exp(-i H t)
  DenseOperator at(double t) const {
    Vector phases(values_.size());
    for (Index k = 0; k < values_.size(); ++k) phases(k) = std::polar(1.0, -values_(k) * t);
    return DenseOperator(vectors_ * phases.asDiagonal() * vectors_.adjoint());
  }

 private:
  RealVector values_;
  Matrix vectors_;
};

inline DenseOperator expm_hermitian(const DenseOperator& h, double t) { return HermitianPropagator(h).at(t); }

inline double unitarity_defect(const DenseOperator& u) {
  return max_abs(u.matrix().adjoint() * u.matrix() - Matrix::Identity(u.dim(), u.dim()));
}

struct StateTolerances {
  double trace = 1e-12;
  double hermitian = 1e-12;
  double positivity = 1e-10;
};

struct StateDefects {
  double trace_error = 0.0;
  double hermiticity = 0.0;
  double min_eigenvalue = 0.0;
};

inline RealVector hermitian_eigenvalues(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  return es.eigenvalues();
}

inline StateDefects state_defects(const Matrix& m) {
  StateDefects d;
  d.trace_error = std::abs(m.trace() - Complex{1.0, 0.0});
  d.hermiticity = hermiticity_defect(m);
  d.min_eigenvalue = hermitian_eigenvalues(m).minCoeff();
  return d;
}

class DensityMatrix {
 public:
  static DensityMatrix from_matrix(Matrix m, const StateTolerances& tol = {}) {
    if (m.rows() != m.cols()) throw InvalidArgument("density matrix must be square");
    qubits_for_dim(m.rows());
    const StateDefects d = state_defects(m);
    if (d.trace_error > tol.trace) {
      throw InvalidArgument("density matrix trace off by " + std::to_string(d.trace_error));
    }
    if (d.hermiticity > tol.hermitian) {
      throw InvalidArgument("density matrix not Hermitian (defect " + std::to_string(d.hermiticity) + ")");
    }
    if (d.min_eigenvalue < -tol.positivity) {
      throw InvalidArgument("density matrix has eigenvalue " + std::to_string(d.min_eigenvalue));
    }
    return DensityMatrix(std::move(m));
  }

  // Caller vouches for the invariants (e.g. output of a checked channel).
  static DensityMatrix unchecked(Matrix m) {
    if (m.rows() != m.cols()) throw InvalidArgument("density matrix must be square");
    qubits_for_dim(m.rows());
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix maximally_mixed(int qubits) {
    const Index d = dim_for_qubits(qubits);
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
  }

  static DensityMatrix basis_state(int qubits, std::uint64_t index) {
    const Index d = dim_for_qubits(qubits);
    if (static_cast<Index>(index) >= d) throw InvalidArgument("basis index out of range");
    Matrix m = Matrix::Zero(d, d);
    m(static_cast<Index>(index), static_cast<Index>(index)) = 1.0;
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix from_pure(const Vector& psi) {
    const double n = psi.norm();
    if (n == 0.0) throw InvalidArgument("zero state vector");
    const Vector u = psi / n;
    return from_matrix(u * u.adjoint());
  }

  int qubits() const { return qubits_for_dim(m_.rows()); }
  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

 private:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

// Trace over the leftmost qubit: out(s, s') = sum_a rho(a*d + s, a*d + s').
inline Matrix partial_trace_ancilla(const Matrix& joint) {
  if (joint.rows() != joint.cols()) throw InvalidArgument("partial trace needs a square matrix");
  if (joint.rows() < 4 || joint.rows() % 2 != 0) {
    throw InvalidArgument("partial trace needs dimension 2*d with d >= 2");
  }
  const Index d = joint.rows() / 2;
  return joint.topLeftCorner(d, d) + joint.bottomRightCorner(d, d);
}

inline DensityMatrix partial_trace_ancilla(const DensityMatrix& joint) {
  return DensityMatrix::unchecked(partial_trace_ancilla(joint.matrix()));
}

// Trace over everything except the leftmost qubit.
inline Eigen::Matrix2cd ancilla_state(const Matrix& joint) {
  const Index d = joint.rows() / 2;
  Eigen::Matrix2cd a;
  a(0, 0) = joint.topLeftCorner(d, d).trace();
  a(0, 1) = joint.topRightCorner(d, d).trace();
  a(1, 0) = joint.bottomLeftCorner(d, d).trace();
  a(1, 1) = joint.bottomRightCorner(d, d).trace();
  return a;
}

// Single-qubit marginal at `site`.
inline Eigen::Matrix2cd reduced_site_state(const Matrix& rho, int site) {
  const int q = qubits_for_dim(rho.rows());
  if (site < 0 || site >= q) throw InvalidArgument("site out of range");
  const Index mask = Index{1} << (q - 1 - site);
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (Index r = 0; r < rho.rows(); ++r) {
    if (r & mask) continue;
    out(0, 0) += rho(r, r);
    out(0, 1) += rho(r, r | mask);
    out(1, 0) += rho(r | mask, r);
    out(1, 1) += rho(r | mask, r | mask);
  }
  return out;
}

inline double purity(const Matrix& rho) { return rho.cwiseAbs2().sum(); }
inline double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

inline double entropy(const Matrix& rho) {
  const RealVector ev = hermitian_eigenvalues(rho);
  double s = 0.0;
  for (Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > 0.0) s -= ev(k) * std::log(ev(k));
  }
  return std::max(0.0, s);
}
inline double entropy(const DensityMatrix& rho) { return entropy(rho.matrix()); }

inline double fidelity_fgs(const Matrix& rho) { return std::clamp(rho(0, 0).real(), 0.0, 1.0); }
inline double fidelity_fgs(const DensityMatrix& rho) { return fidelity_fgs(rho.matrix()); }

// Schatten-1 norm of a Hermitian matrix.
inline double trace_norm(const Matrix& m) { return hermitian_eigenvalues(m).cwiseAbs().sum(); }

}  // namespace spinpurge::qmat
