#pragma once

// One-cycle channel (interaction, then ancilla reset), trajectories, and the
// real superoperator of the cycle map with its rank/nullity.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spinpurge/errors.hpp"
#include "spinpurge/model.hpp"
#include "spinpurge/parallel.hpp"
#include "spinpurge/qmat.hpp"

namespace spinpurge::engine {

using model::PiecewiseHamiltonian;
using model::ResetSpec;
using qmat::Complex;
using qmat::DensityMatrix;
using qmat::Index;
using qmat::Matrix;
using qmat::RealMatrix;
using qmat::RealVector;

inline constexpr int kMaxSuperoperatorQubits = 5;

// Time-ordered product of the segment propagators.
inline Matrix cycle_unitary(const PiecewiseHamiltonian& schedule) {
  if (schedule.segments.empty()) throw InvalidArgument("empty schedule");
  const Index d = schedule.segments.front().generator.dim();
  Matrix u = Matrix::Identity(d, d);
  for (const auto& seg : schedule.segments) {
    if (seg.generator.dim() != d) throw InvalidArgument("schedule segments differ in dimension");
    u = qmat::expm_hermitian(seg.generator, seg.duration).matrix() * u;
  }
  return u;
}

// rho_S -> Tr_A[U (rho_A (x) rho_S) U^dag] in Kraus form. Kraus operators are
// grouped by the ancilla output index a so the ancilla marginal is also available.
class CycleChannel {
 public:
  CycleChannel(const PiecewiseHamiltonian& schedule, const ResetSpec& reset)
      : CycleChannel(cycle_unitary(schedule), reset) {}

  CycleChannel(Matrix joint_unitary, const ResetSpec& reset) : u_(std::move(joint_unitary)), reset_(reset) {
    reset_.validate();
    if (u_.rows() != u_.cols() || u_.rows() < 4) throw InvalidArgument("joint unitary must be square, dim >= 4");
    qmat::qubits_for_dim(u_.rows());
    d_ = u_.rows() / 2;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(reset_.state());
    for (int b = 0; b < 2; ++b) {
      const double p = es.eigenvalues()(b);
      if (p <= 1e-15) continue;
      const Eigen::Vector2cd phi = es.eigenvectors().col(b);
      for (int a = 0; a < 2; ++a) {
        Matrix k = phi(0) * u_.block(a * d_, 0, d_, d_) + phi(1) * u_.block(a * d_, d_, d_, d_);
        kraus_[a].push_back(std::sqrt(p) * k);
      }
    }
  }

  int system_qubits() const { return qmat::qubits_for_dim(d_); }
  Index system_dim() const noexcept { return d_; }
  const Matrix& unitary() const noexcept { return u_; }
  const ResetSpec& reset() const noexcept { return reset_; }

  std::vector<Matrix> kraus() const {
    std::vector<Matrix> out(kraus_[0]);
    out.insert(out.end(), kraus_[1].begin(), kraus_[1].end());
    return out;
  }

  Matrix apply(const Matrix& rho) const {
    check_dim(rho);
    Matrix out = Matrix::Zero(d_, d_);
    for (const auto& group : kraus_)
      for (const auto& k : group) out.noalias() += k * rho * k.adjoint();
    return out;
  }

  DensityMatrix apply(const DensityMatrix& rho) const { return DensityMatrix::unchecked(apply(rho.matrix())); }

  // Ancilla marginal after the interaction, before the reset.
  Eigen::Matrix2cd ancilla_after(const Matrix& rho) const {
    check_dim(rho);
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (int a = 0; a < 2; ++a)
      for (int a2 = 0; a2 < 2; ++a2)
        for (std::size_t b = 0; b < kraus_[a].size(); ++b)
          out(a, a2) += (kraus_[a][b] * rho * kraus_[a2][b].adjoint()).trace();
    return out;
  }

 private:
  void check_dim(const Matrix& rho) const {
    if (rho.rows() != d_ || rho.cols() != d_) {
      throw InvalidArgument("state dimension " + std::to_string(rho.rows()) + " does not match channel dimension " +
                            std::to_string(d_));
    }
  }

  Matrix u_;
  ResetSpec reset_;
  Index d_ = 0;
  std::vector<Matrix> kraus_[2];
};

// Ideal: Tr_A then re-tensor |0><0|. Parametric: re-tensor the configured ancilla state.
inline DensityMatrix reset_channel(const DensityMatrix& joint, const ResetSpec& reset) {
  reset.validate();
  const Matrix sys = qmat::partial_trace_ancilla(joint.matrix());
  return DensityMatrix::unchecked(qmat::kron(reset.state(), sys));
}

// Cycle evaluated on the joint register: tensor, evolve segment by segment, trace out.
inline DensityMatrix apply_cycle_literal(const DensityMatrix& rho, const PiecewiseHamiltonian& schedule,
                                         const ResetSpec& reset) {
  if (schedule.segments.empty()) throw InvalidArgument("empty schedule");
  if (rho.dim() * 2 != schedule.segments.front().generator.dim()) {
    throw InvalidArgument("state dimension does not match schedule");
  }
  reset.validate();
  Matrix joint = qmat::kron(reset.state(), rho.matrix());
  for (const auto& seg : schedule.segments) {
    const Matrix u = qmat::expm_hermitian(seg.generator, seg.duration).matrix();
    joint = u * joint * u.adjoint();
  }
  return DensityMatrix::unchecked(qmat::partial_trace_ancilla(joint));
}

// ---- trajectories ----

struct ChannelTolerances {
  double trace = 1e-10;
  double hermitian = 1e-10;
  double min_eigenvalue = -1e-8;
};

struct RunOptions {
  int n_cycles = 1000;
  double steady_tol = 1e-10;  // <= 0 disables early stop
  bool check_invariants = true;
  bool record_ancilla = false;
  ChannelTolerances tol;
};

struct CycleTrace {
  // Entry n describes the state after n + 1 cycles.
  std::vector<double> purity;
  std::vector<double> entropy;
  std::vector<double> fgs_fidelity;
  std::vector<double> infidelity;
  std::vector<double> ancilla_purity;  // filled when requested
  std::optional<int> converged_at;     // cycle count at which the step fell below steady_tol

  std::size_t size() const noexcept { return purity.size(); }
};

struct RunResult {
  DensityMatrix state;
  CycleTrace trace;
};

inline void check_channel_output(const Matrix& rho, const RealVector& eigenvalues, const ChannelTolerances& tol,
                                 int cycle) {
  const double trace_err = std::abs(rho.trace() - Complex{1.0, 0.0});
  const double herm = qmat::hermiticity_defect(rho);
  const double min_ev = eigenvalues.minCoeff();
  if (trace_err > tol.trace || herm > tol.hermitian || min_ev < tol.min_eigenvalue) {
    std::ostringstream msg;
    msg << "channel invariant violated at cycle " << cycle << ": trace error " << trace_err << ", hermiticity "
        << herm << ", min eigenvalue " << min_ev;
    throw NumericalError(msg.str());
  }
}

inline RunResult run_cycles(const DensityMatrix& rho0, const CycleChannel& channel, const RunOptions& opt) {
  if (opt.n_cycles < 1) throw InvalidArgument("n_cycles must be >= 1");
  if (rho0.dim() != channel.system_dim()) throw InvalidArgument("initial state dimension does not match channel");
  RunResult res{rho0, {}};
  Matrix rho = rho0.matrix();
  auto& tr = res.trace;
  for (int n = 1; n <= opt.n_cycles; ++n) {
    if (opt.record_ancilla) {
      const Eigen::Matrix2cd a = channel.ancilla_after(rho);
      tr.ancilla_purity.push_back(a.cwiseAbs2().sum());
    }
    Matrix next = channel.apply(rho);
    const RealVector ev = qmat::hermitian_eigenvalues(next);
    if (opt.check_invariants) check_channel_output(next, ev, opt.tol, n);
    double s = 0.0;
    for (Index k = 0; k < ev.size(); ++k)
      if (ev(k) > 0.0) s -= ev(k) * std::log(ev(k));
    tr.purity.push_back(qmat::purity(next));
    tr.entropy.push_back(std::max(0.0, s));
    tr.fgs_fidelity.push_back(qmat::fidelity_fgs(next));
    tr.infidelity.push_back(1.0 - tr.fgs_fidelity.back());
    const bool steady = opt.steady_tol > 0.0 && qmat::trace_norm(next - rho) < opt.steady_tol;
    rho = std::move(next);
    if (steady) {
      tr.converged_at = n;
      break;
    }
  }
  res.state = DensityMatrix::unchecked(std::move(rho));
  return res;
}

inline RunResult run_cycles(const DensityMatrix& rho0, const PiecewiseHamiltonian& schedule, const ResetSpec& reset,
                            const RunOptions& opt) {
  return run_cycles(rho0, CycleChannel(schedule, reset), opt);
}

// First cycle count (1-based) at which purity reaches threshold.
inline std::optional<int> cycles_to_purity(const CycleTrace& trace, double threshold) {
  for (std::size_t n = 0; n < trace.purity.size(); ++n)
    if (trace.purity[n] >= threshold) return static_cast<int>(n + 1);
  return std::nullopt;
}

// ---- superoperator ----
//
// Real orthonormal basis of d x d Hermitian matrices (Hilbert-Schmidt):
//   k < d               E_kk
//   then per pair i<j   (E_ij + E_ji)/sqrt2,  (i E_ij - i E_ji)/sqrt2
// Coordinates of X: X_kk, sqrt2 Re X_ij, sqrt2 Im X_ij.

inline Index hermitian_basis_size(Index d) { return d * d; }

inline RealVector hermitian_coords(const Matrix& x) {
  const Index d = x.rows();
  RealVector c(d * d);
  const double r2 = std::sqrt(2.0);
  for (Index k = 0; k < d; ++k) c(k) = x(k, k).real();
  Index e = d;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      c(e++) = r2 * x(i, j).real();
      c(e++) = r2 * x(i, j).imag();
    }
  return c;
}

inline Matrix hermitian_basis_element(Index d, Index e) {
  Matrix b = Matrix::Zero(d, d);
  if (e < d) {
    b(e, e) = 1.0;
    return b;
  }
  Index k = d;
  const double s = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j, k += 2) {
      if (e == k) {
        b(i, j) = s;
        b(j, i) = s;
        return b;
      }
      if (e == k + 1) {
        b(i, j) = Complex{0.0, s};
        b(j, i) = Complex{0.0, -s};
        return b;
      }
    }
  throw InvalidArgument("Hermitian basis index out of range");
}

struct SuperoperatorMatrix {
  int system_qubits = 0;
  RealMatrix entries;  // column e = coords(Phi(B_e) - B_e)
};

inline SuperoperatorMatrix build_superoperator(const CycleChannel& channel) {
  const int n = channel.system_qubits();
  if (n > kMaxSuperoperatorQubits) {
    throw LimitExceeded("superoperator supports N <= " + std::to_string(kMaxSuperoperatorQubits) + ", got " +
                        std::to_string(n));
  }
  const Index d = channel.system_dim();
  const Index dd = hermitian_basis_size(d);
  SuperoperatorMatrix s{n, RealMatrix(dd, dd)};
  parallel_for(static_cast<std::size_t>(dd), [&](std::size_t e) {
    const Matrix b = hermitian_basis_element(d, static_cast<Index>(e));
    s.entries.col(static_cast<Index>(e)) = hermitian_coords(channel.apply(b) - b);
  });
  return s;
}

inline SuperoperatorMatrix build_superoperator(const PiecewiseHamiltonian& schedule, const ResetSpec& reset) {
  if (schedule.system_qubits() > kMaxSuperoperatorQubits) {
    throw LimitExceeded("superoperator supports N <= " + std::to_string(kMaxSuperoperatorQubits));
  }
  return build_superoperator(CycleChannel(schedule, reset));
}

inline constexpr double kSvdRelTol = 1e-9;

struct RankNullityReport {
  std::size_t dimension = 0;   // 4^N - 1
  std::size_t rank = 0;
  std::size_t nullity = 0;     // dimension - rank
  std::size_t kernel_dim = 0;  // 4^N - rank, trace direction included
  double threshold = 0.0;
  std::vector<double> singular_values;  // descending
  std::optional<double> gap_ratio;      // sigma[rank-1] / sigma[rank]
};

// Trace direction is projected out of the codomain before the SVD.
inline RankNullityReport numeric_rank_nullity(const SuperoperatorMatrix& m, double rel_tol = kSvdRelTol) {
  const Index dd = m.entries.rows();
  const Index d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(dd))));
  RealVector t = RealVector::Zero(dd);
  t.head(d).setConstant(1.0 / std::sqrt(static_cast<double>(d)));
  const RealMatrix projected = m.entries - t * (t.transpose() * m.entries);
  Eigen::BDCSVD<RealMatrix> svd(projected);
  const RealVector sv = svd.singularValues();
  RankNullityReport r;
  r.dimension = static_cast<std::size_t>(dd - 1);
  r.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() ? sv(0) : 0.0;
  r.threshold = rel_tol * smax;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv(k) > r.threshold) ++r.rank;
  r.rank = std::min(r.rank, r.dimension);
  r.nullity = r.dimension - r.rank;
  r.kernel_dim = static_cast<std::size_t>(dd) - r.rank;
  if (r.nullity > 0 && r.rank > 0) {
    const double below = sv(static_cast<Index>(r.rank));
    r.gap_ratio = below > 0.0 ? sv(static_cast<Index>(r.rank) - 1) / below : std::numeric_limits<double>::infinity();
  }
  return r;
}

enum class SteadyStateClass { UniqueSSS, DegenerateSSS };

inline const char* to_string(SteadyStateClass c) {
  return c == SteadyStateClass::UniqueSSS ? "unique" : "degenerate";
}

struct RcClassification {
  SteadyStateClass kind;
  std::optional<double> gap_ratio;
};

inline RcClassification classify_rc(std::size_t nullity, std::optional<double> gap_ratio = std::nullopt) {
  return {nullity == 0 ? SteadyStateClass::UniqueSSS : SteadyStateClass::DegenerateSSS, gap_ratio};
}

inline RcClassification classify_rc(const RankNullityReport& r) { return classify_rc(r.nullity, r.gap_ratio); }

// Natural (vec) representation sum_K K (x) conj(K), row-major vec convention.
inline Matrix natural_representation(const CycleChannel& channel) {
  const Index d = channel.system_dim();
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const auto& k : channel.kraus())
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        for (Index a = 0; a < d; ++a)
          for (Index b = 0; b < d; ++b) s(i * d + j, a * d + b) += k(i, a) * std::conj(k(j, b));
  return s;
}

// Number of channel eigenvalues within tol of 1 (dimension of the fixed-point space).
inline std::size_t fixed_point_dimension(const CycleChannel& channel, double tol = 1e-8) {
  Eigen::ComplexEigenSolver<Matrix> es(natural_representation(channel), false);
  std::size_t count = 0;
  for (Index k = 0; k < es.eigenvalues().size(); ++k)
    if (std::abs(es.eigenvalues()(k) - Complex{1.0, 0.0}) < tol) ++count;
  return count;
}

}  // namespace spinpurge::engine
