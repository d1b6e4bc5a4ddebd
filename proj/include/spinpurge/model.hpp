#pragma once

// Hamiltonians on the ancilla + network register and the per-cycle schedule.
// Qubit 0 is the ancilla; network node i is qubit i + 1.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spinpurge/errors.hpp"
#include "spinpurge/netgraph.hpp"
#include "spinpurge/qmat.hpp"

namespace spinpurge::model {

using netgraph::NetworkGraph;
using qmat::Complex;
using qmat::DenseOperator;
using qmat::Index;
using qmat::Matrix;

inline constexpr int kAncillaQubit = 0;
inline int node_qubit(int node) { return node + 1; }

enum class Protocol { RT, ADRT };

inline const char* to_string(Protocol p) { return p == Protocol::RT ? "RT" : "ADRT"; }

// Ancilla state written back at the end of every cycle: [[1-z, x], [conj(x), z]].
struct ResetSpec {
  double z = 0.0;
  Complex x{0.0, 0.0};

  static ResetSpec ideal() { return {}; }
  static ResetSpec parametric(double z, Complex x) {
    ResetSpec r{z, x};
    r.validate();
    return r;
  }

  bool is_ideal() const { return z == 0.0 && x == Complex{}; }

  void validate() const {
    if (!(z >= 0.0 && z <= 1.0)) throw InvalidArgument("reset population z must lie in [0, 1]");
    if (std::norm(x) > z * (1.0 - z) + 1e-15) {
      throw InvalidArgument("reset coherence violates |x|^2 <= z(1-z); state is not positive");
    }
  }

  Eigen::Matrix2cd state() const {
    Eigen::Matrix2cd m;
    m << 1.0 - z, x, std::conj(x), z;
    return m;
  }
};

struct ProtocolConfig {
  Protocol protocol = Protocol::RT;
  std::optional<double> tau;      // unset: pi / (2 * mean resonant coupling)
  double delta = 0.0;
  std::vector<double> g_tilde;    // per node, ADRT only
  double resonant_fraction = 0.5; // ADRT share of the cycle spent in the resonant segment
  int n_cycles = 1000;
  double steady_tol = 1e-10;
  ResetSpec reset;
};

inline double mean_resonant_coupling(const NetworkGraph& g) {
  const auto targets = g.ancilla_targets();
  if (targets.empty()) throw InvalidArgument("graph has no ancilla targets");
  double s = 0.0;
  for (const auto& t : targets) s += std::abs(t.g);
  return s / static_cast<double>(targets.size());
}

inline double default_tau(const NetworkGraph& g) {
  return std::numbers::pi / (2.0 * mean_resonant_coupling(g));
}

inline double resolved_tau(const ProtocolConfig& cfg, const NetworkGraph& g) {
  return cfg.tau ? *cfg.tau : default_tau(g);
}

// Throws on hard violations; returns soft warnings.
inline std::vector<std::string> validate(const ProtocolConfig& cfg, const NetworkGraph& g) {
  std::vector<std::string> warnings;
  if (!g.has_ancilla()) throw InvalidArgument("graph has no ancilla targets");
  if (cfg.tau && !(*cfg.tau > 0.0)) throw InvalidArgument("tau must be > 0");
  if (cfg.n_cycles < 1) throw InvalidArgument("n_cycles must be >= 1");
  if (!(cfg.steady_tol >= 0.0)) throw InvalidArgument("steady_tol must be >= 0");
  cfg.reset.validate();
  if (cfg.protocol == Protocol::ADRT) {
    if (static_cast<int>(cfg.g_tilde.size()) != g.size()) {
      throw InvalidArgument("ADRT needs g_tilde on all " + std::to_string(g.size()) + " nodes, got " +
                            std::to_string(cfg.g_tilde.size()));
    }
    if (!(cfg.resonant_fraction > 0.0 && cfg.resonant_fraction < 1.0)) {
      throw InvalidArgument("resonant_fraction must lie in (0, 1)");
    }
    for (std::size_t i = 0; i < cfg.g_tilde.size(); ++i)
      for (std::size_t j = i + 1; j < cfg.g_tilde.size(); ++j)
        if (cfg.g_tilde[i] == cfg.g_tilde[j]) {
          warnings.push_back("g_tilde not pairwise distinct (nodes " + std::to_string(i) + ", " + std::to_string(j) +
                             "); symmetry breaking incomplete");
          return warnings;
        }
  }
  return warnings;
}

namespace detail {

inline double zsign(Index r, int qubit, int qubits) { return qmat::bit_of(r, qubit, qubits) ? -1.0 : 1.0; }

inline Index qubit_mask(int qubit, int qubits) { return Index{1} << (qubits - 1 - qubit); }

}  // namespace detail

// sum_{i<j} J_ij (XX + YY + delta ZZ) + sum_i h_i Z_i, identity on the ancilla.
inline DenseOperator build_h_system(const NetworkGraph& g, double delta) {
  const int q = g.size() + 1;
  const Index d = qmat::dim_for_qubits(q);
  Matrix h = Matrix::Zero(d, d);
  for (Index r = 0; r < d; ++r) {
    double diag = 0.0;
    for (const auto& [key, w] : g.edges()) {
      const int a = node_qubit(key.first), b = node_qubit(key.second);
      diag += w * delta * detail::zsign(r, a, q) * detail::zsign(r, b, q);
      if (qmat::bit_of(r, a, q) != qmat::bit_of(r, b, q)) {
        h(r ^ detail::qubit_mask(a, q) ^ detail::qubit_mask(b, q), r) += 2.0 * w;
      }
    }
    for (int i = 0; i < g.size(); ++i) diag += g.self_loop(i) * detail::zsign(r, node_qubit(i), q);
    h(r, r) += diag;
  }
  return DenseOperator(std::move(h));
}

// (1/2) sum_k g_k (s+_A s-_k + s-_A s+_k)
inline DenseOperator build_h_res(const NetworkGraph& g) {
  const auto targets = g.ancilla_targets();
  if (targets.empty()) throw InvalidArgument("graph has no ancilla targets");
  const int q = g.size() + 1;
  const Index d = qmat::dim_for_qubits(q);
  Matrix h = Matrix::Zero(d, d);
  const Index ma = detail::qubit_mask(kAncillaQubit, q);
  for (Index r = 0; r < d; ++r) {
    for (const auto& t : targets) {
      const int k = node_qubit(t.node);
      if (qmat::bit_of(r, kAncillaQubit, q) != qmat::bit_of(r, k, q)) {
        h(r ^ ma ^ detail::qubit_mask(k, q), r) += 0.5 * t.g;
      }
    }
  }
  return DenseOperator(std::move(h));
}

// Z_A sum_k g_tilde_k Z_k
inline DenseOperator build_h_disp(const std::vector<double>& g_tilde) {
  if (g_tilde.empty()) throw InvalidArgument("g_tilde must cover at least one node");
  const int q = static_cast<int>(g_tilde.size()) + 1;
  const Index d = qmat::dim_for_qubits(q);
  Matrix h = Matrix::Zero(d, d);
  for (Index r = 0; r < d; ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < g_tilde.size(); ++k) s += g_tilde[k] * detail::zsign(r, node_qubit(static_cast<int>(k)), q);
    h(r, r) = detail::zsign(r, kAncillaQubit, q) * s;
  }
  return DenseOperator(std::move(h));
}

struct Segment {
  DenseOperator generator;
  double duration;
};

struct PiecewiseHamiltonian {
  std::vector<Segment> segments;

  int qubits() const { return segments.empty() ? 0 : segments.front().generator.qubits(); }
  int system_qubits() const { return qubits() - 1; }
  double total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }
};

inline PiecewiseHamiltonian make_schedule(std::vector<Segment> segments) {
  if (segments.empty()) throw InvalidArgument("schedule needs at least one segment");
  const Index d = segments.front().generator.dim();
  for (const auto& s : segments) {
    if (s.generator.dim() != d) throw InvalidArgument("schedule segments differ in dimension");
    if (!(s.duration >= 0.0)) throw InvalidArgument("segment duration must be >= 0");
    if (!s.generator.is_hermitian()) throw InvalidArgument("segment generator is not Hermitian");
  }
  if (segments.front().generator.qubits() < 2) throw InvalidArgument("schedule needs ancilla plus >= 1 node");
  return PiecewiseHamiltonian{std::move(segments)};
}

inline PiecewiseHamiltonian build_schedule(const ProtocolConfig& cfg, const NetworkGraph& g) {
  validate(cfg, g);
  const double tau = resolved_tau(cfg, g);
  const DenseOperator hs = build_h_system(g, cfg.delta);
  if (cfg.protocol == Protocol::RT) return make_schedule({{hs + build_h_res(g), tau}});
  const double t_res = tau * cfg.resonant_fraction;
  return make_schedule({{hs + build_h_res(g), t_res}, {hs + build_h_disp(cfg.g_tilde), tau - t_res}});
}

}  // namespace spinpurge::model
