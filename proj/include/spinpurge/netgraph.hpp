#pragma once

// Weighted spin networks, ancilla-pinned automorphism orbits, orbit-count
// rank/nullity, adjacency spectra and small connected-graph enumeration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spinpurge/errors.hpp"

namespace spinpurge::netgraph {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr int kMaxOrbitNodes = 10;
inline constexpr int kMaxEnumerationNodes = 7;
inline constexpr double kWeightTol = 1e-12;

struct AncillaTarget {
  int node;
  double g;
};

class NetworkGraph {
 public:
  explicit NetworkGraph(int n_nodes) : n_(n_nodes) {
    if (n_nodes < 1) throw InvalidArgument("graph needs at least one node");
    loops_.assign(static_cast<std::size_t>(n_nodes), 0.0);
    ancilla_.assign(static_cast<std::size_t>(n_nodes), 0.0);
  }

  int size() const noexcept { return n_; }

  // A zero weight removes the edge.
  void set_edge(int i, int j, double w) {
    check_node(i);
    check_node(j);
    if (i == j) throw InvalidArgument("edge (i,i) not allowed; use a self-loop");
    if (!std::isfinite(w)) throw InvalidArgument("edge weight must be finite");
    const auto key = ordered(i, j);
    if (w == 0.0) {
      edges_.erase(key);
    } else {
      edges_[key] = w;
    }
  }

  double edge(int i, int j) const {
    check_node(i);
    check_node(j);
    if (i == j) return 0.0;
    const auto it = edges_.find(ordered(i, j));
    return it == edges_.end() ? 0.0 : it->second;
  }

  void set_self_loop(int i, double h) {
    check_node(i);
    if (!std::isfinite(h)) throw InvalidArgument("self-loop weight must be finite");
    loops_[static_cast<std::size_t>(i)] = h;
  }

  double self_loop(int i) const {
    check_node(i);
    return loops_[static_cast<std::size_t>(i)];
  }

  // A zero coupling removes the node from the target set.
  void set_ancilla_target(int k, double g) {
    check_node(k);
    if (!std::isfinite(g)) throw InvalidArgument("ancilla coupling must be finite");
    ancilla_[static_cast<std::size_t>(k)] = g;
  }

  double ancilla_coupling(int k) const {
    check_node(k);
    return ancilla_[static_cast<std::size_t>(k)];
  }

  // Keys have first < second.
  const std::map<std::pair<int, int>, double>& edges() const noexcept { return edges_; }
  const std::vector<double>& self_loops() const noexcept { return loops_; }

  std::vector<AncillaTarget> ancilla_targets() const {
    std::vector<AncillaTarget> out;
    for (int k = 0; k < n_; ++k) {
      if (ancilla_[static_cast<std::size_t>(k)] != 0.0) out.push_back({k, ancilla_[static_cast<std::size_t>(k)]});
    }
    return out;
  }

  bool has_ancilla() const {
    return std::any_of(ancilla_.begin(), ancilla_.end(), [](double g) { return g != 0.0; });
  }

  RealMatrix adjacency() const {
    RealMatrix a = RealMatrix::Zero(n_, n_);
    for (const auto& [key, w] : edges_) {
      a(key.first, key.second) = w;
      a(key.second, key.first) = w;
    }
    for (int i = 0; i < n_; ++i) a(i, i) = loops_[static_cast<std::size_t>(i)];
    return a;
  }

  bool is_connected() const {
    std::vector<int> seen(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n_; ++v) {
        if (!seen[static_cast<std::size_t>(v)] && edge(u, v) != 0.0) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n_;
  }

  // Node i of this graph becomes node perm[i] of the result.
  NetworkGraph relabeled(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != n_) throw InvalidArgument("permutation size mismatch");
    std::vector<int> check = perm;
    std::sort(check.begin(), check.end());
    for (int i = 0; i < n_; ++i) {
      if (check[static_cast<std::size_t>(i)] != i) throw InvalidArgument("not a permutation");
    }
    NetworkGraph out(n_);
    for (const auto& [key, w] : edges_) out.set_edge(perm[static_cast<std::size_t>(key.first)], perm[static_cast<std::size_t>(key.second)], w);
    for (int i = 0; i < n_; ++i) {
      out.set_self_loop(perm[static_cast<std::size_t>(i)], loops_[static_cast<std::size_t>(i)]);
      out.set_ancilla_target(perm[static_cast<std::size_t>(i)], ancilla_[static_cast<std::size_t>(i)]);
    }
    return out;
  }

  bool operator==(const NetworkGraph&) const = default;

 private:
  void check_node(int i) const {
    if (i < 0 || i >= n_) {
      throw InvalidArgument("node " + std::to_string(i) + " out of range [0, " + std::to_string(n_) + ")");
    }
  }
  static std::pair<int, int> ordered(int i, int j) { return i < j ? std::pair{i, j} : std::pair{j, i}; }

  int n_;
  std::map<std::pair<int, int>, double> edges_;
  std::vector<double> loops_;
  std::vector<double> ancilla_;
};

// ---- common graphs ----

inline NetworkGraph path_graph(int n, double w = 1.0) {
  NetworkGraph g(n);
  for (int i = 0; i + 1 < n; ++i) g.set_edge(i, i + 1, w);
  return g;
}

inline NetworkGraph cycle_graph(int n, double w = 1.0) {
  NetworkGraph g = path_graph(n, w);
  if (n >= 3) g.set_edge(n - 1, 0, w);
  return g;
}

inline NetworkGraph complete_graph(int n, double w = 1.0) {
  NetworkGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.set_edge(i, j, w);
  return g;
}

inline NetworkGraph complete_bipartite(int m, int n, double w = 1.0) {
  NetworkGraph g(m + n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) g.set_edge(i, m + j, w);
  return g;
}

// N uncoupled spins, every one coupled to the ancilla with strength g.
inline NetworkGraph star_model(int n, double g = 1.0) {
  NetworkGraph out(n);
  for (int k = 0; k < n; ++k) out.set_ancilla_target(k, g);
  return out;
}

// Row/column 0 is the ancilla; node i sits at index i + 1.
inline RealMatrix augmented_adjacency(const NetworkGraph& g) {
  const int n = g.size();
  RealMatrix a = RealMatrix::Zero(n + 1, n + 1);
  a.bottomRightCorner(n, n) = g.adjacency();
  for (const auto& t : g.ancilla_targets()) {
    a(0, t.node + 1) = t.g;
    a(t.node + 1, 0) = t.g;
  }
  return a;
}

// ---- automorphism orbits ----

struct OrbitPartition {
  std::vector<std::vector<int>> orbits;  // each sorted; ordered by smallest member
  std::vector<int> counts;
  std::vector<int> orbit_of;  // node -> orbit id

  int k() const noexcept { return static_cast<int>(orbits.size()); }
};

inline OrbitPartition partition_from_labels(const std::vector<int>& root) {
  OrbitPartition p;
  std::map<int, int> id_of_root;
  p.orbit_of.resize(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    auto [it, inserted] = id_of_root.try_emplace(root[i], static_cast<int>(p.orbits.size()));
    if (inserted) p.orbits.emplace_back();
    p.orbits[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(i));
    p.orbit_of[i] = it->second;
  }
  for (const auto& o : p.orbits) p.counts.push_back(static_cast<int>(o.size()));
  return p;
}

namespace detail {

class AutomorphismSearch {
 public:
  AutomorphismSearch(const RealMatrix& a, double tol) : a_(a), m_(static_cast<int>(a.rows())), tol_(tol) {
    rows_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      auto& r = rows_[static_cast<std::size_t>(i)];
      for (int j = 0; j < m_; ++j)
        if (j != i) r.push_back(a(i, j));
      std::sort(r.begin(), r.end());
    }
  }

  bool compatible(int x, int y) const {
    if (std::abs(a_(x, x) - a_(y, y)) > tol_) return false;
    const auto& rx = rows_[static_cast<std::size_t>(x)];
    const auto& ry = rows_[static_cast<std::size_t>(y)];
    for (std::size_t k = 0; k < rx.size(); ++k)
      if (std::abs(rx[k] - ry[k]) > tol_) return false;
    return true;
  }

  // An automorphism fixing index 0 and sending u to v, if any.
  std::optional<std::vector<int>> find(int u, int v) {
    perm_.assign(static_cast<std::size_t>(m_), -1);
    used_.assign(static_cast<std::size_t>(m_), 0);
    order_.clear();
    order_.push_back(0);
    order_.push_back(u);
    for (int x = 1; x < m_; ++x)
      if (x != u) order_.push_back(x);
    perm_[0] = 0;
    used_[0] = 1;
    if (!consistent(0, 0)) return std::nullopt;
    if (u == 0) return std::nullopt;
    if (!compatible(u, v) || !consistent(1, v)) return std::nullopt;
    perm_[static_cast<std::size_t>(u)] = v;
    used_[static_cast<std::size_t>(v)] = 1;
    if (extend(2)) return perm_;
    return std::nullopt;
  }

 private:
  // Can order_[pos] map to y given the assignments before pos?
  bool consistent(std::size_t pos, int y) const {
    const int x = order_[pos];
    for (std::size_t q = 0; q < pos; ++q) {
      const int xp = order_[q];
      const int yp = perm_[static_cast<std::size_t>(xp)];
      if (std::abs(a_(x, xp) - a_(y, yp)) > tol_) return false;
    }
    return true;
  }

  bool extend(std::size_t pos) {
    if (pos == order_.size()) return true;
    const int x = order_[pos];
    for (int y = 1; y < m_; ++y) {
      if (used_[static_cast<std::size_t>(y)] || !compatible(x, y) || !consistent(pos, y)) continue;
      perm_[static_cast<std::size_t>(x)] = y;
      used_[static_cast<std::size_t>(y)] = 1;
      if (extend(pos + 1)) return true;
      used_[static_cast<std::size_t>(y)] = 0;
      perm_[static_cast<std::size_t>(x)] = -1;
    }
    return false;
  }

  const RealMatrix& a_;
  int m_;
  double tol_;
  std::vector<std::vector<double>> rows_;
  std::vector<int> perm_;
  std::vector<int> used_;
  std::vector<int> order_;
};

inline int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

inline void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
}

}  // namespace detail

// Orbits of the node permutations that fix the ancilla and preserve the augmented adjacency.
inline OrbitPartition automorphism_orbits(const NetworkGraph& g, double tol = kWeightTol) {
  const int n = g.size();
  if (n > kMaxOrbitNodes) {
    throw LimitExceeded("orbit search supports at most " + std::to_string(kMaxOrbitNodes) + " nodes, got " +
                        std::to_string(n));
  }
  const RealMatrix a = augmented_adjacency(g);
  detail::AutomorphismSearch search(a, tol);
  std::vector<int> parent(static_cast<std::size_t>(n + 1));
  std::iota(parent.begin(), parent.end(), 0);
  for (int u = 1; u <= n; ++u) {
    for (int v = u + 1; v <= n; ++v) {
      if (detail::find_root(parent, u) == detail::find_root(parent, v)) continue;
      if (!search.compatible(u, v)) continue;
      if (auto perm = search.find(u, v)) {
        for (int x = 1; x <= n; ++x) detail::unite(parent, x, (*perm)[static_cast<std::size_t>(x)]);
      }
    }
  }
  std::vector<int> root(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) root[static_cast<std::size_t>(i)] = detail::find_root(parent, i + 1);
  return partition_from_labels(root);
}

// ---- orbit-count algebra ----

struct RankNullity {
  std::uint64_t rank = 0;
  std::uint64_t nullity = 0;
  std::uint64_t dimension = 0;  // 4^N - 1
};

inline void check_counts(const std::vector<int>& counts, int n) {
  if (n < 1) throw InvalidArgument("node count must be >= 1");
  int sum = 0;
  for (int c : counts) {
    if (c < 1) throw InvalidArgument("orbit sizes must be positive");
    sum += c;
  }
  if (sum != n) throw InvalidArgument("orbit sizes sum to " + std::to_string(sum) + ", expected " + std::to_string(n));
}

// S_m: number of (p_1..p_K) with 0 <= p_j <= n_j and sum m, for m = 0..N.
inline std::vector<std::uint64_t> bounded_compositions(const std::vector<int>& counts) {
  std::vector<std::uint64_t> poly{1};
  for (int c : counts) {
    std::vector<std::uint64_t> next(poly.size() + static_cast<std::size_t>(c), 0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (int k = 0; k <= c; ++k) next[i + static_cast<std::size_t>(k)] += poly[i];
    poly = std::move(next);
  }
  return poly;
}

inline RankNullity analytic_rank_nullity(const std::vector<int>& counts, int n) {
  check_counts(counts, n);
  if (n > 30) throw LimitExceeded("analytic rank/nullity supports N <= 30");
  const auto s = bounded_compositions(counts);
  RankNullity r;
  r.dimension = (std::uint64_t{1} << (2 * n)) - 1;
  std::uint64_t pow3 = 1;
  for (int m = 1; m <= n; ++m) {
    pow3 *= 3;
    r.rank += pow3 * s[static_cast<std::size_t>(m)];
  }
  r.nullity = r.dimension - r.rank;
  return r;
}

inline RankNullity analytic_rank_nullity(const OrbitPartition& p) {
  int n = 0;
  for (int c : p.counts) n += c;
  return analytic_rank_nullity(p.counts, n);
}

// Largest analytic nullity over orbit distributions of N nodes (distribution (1, N-1)).
inline std::uint64_t max_analytic_nullity(int n) {
  if (n < 1 || n > 30) throw InvalidArgument("N out of range");
  std::uint64_t pow3 = 1;
  for (int i = 0; i < n; ++i) pow3 *= 3;
  return ((std::uint64_t{1} << (2 * n)) - 1) - (2 * pow3 - 3);
}

inline double polarizability_bound(int k, int n) {
  if (n < 1 || k < 1 || k > n) throw InvalidArgument("need 1 <= K <= N");
  return std::ldexp(1.0, -(n - k));
}

// Shannon entropy (natural log) of the orbit-size distribution.
inline double information_content(const std::vector<int>& counts) {
  int n = 0;
  for (int c : counts) {
    if (c < 1) throw InvalidArgument("orbit sizes must be positive");
    n += c;
  }
  double s = 0.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / n;
    s -= p * std::log(p);
  }
  return s;
}

inline double normalized_information_content(const std::vector<int>& counts) {
  const int n = std::accumulate(counts.begin(), counts.end(), 0);
  if (n < 2) throw InvalidArgument("normalized information content needs N >= 2");
  return information_content(counts) / std::log(static_cast<double>(n));
}

// p majorizes q (same total, sorted descending partial sums dominate).
inline bool majorizes(std::vector<int> p, std::vector<int> q) {
  std::sort(p.rbegin(), p.rend());
  std::sort(q.rbegin(), q.rend());
  const std::size_t len = std::max(p.size(), q.size());
  p.resize(len, 0);
  q.resize(len, 0);
  long sp = 0, sq = 0;
  for (std::size_t i = 0; i < len; ++i) {
    sp += p[i];
    sq += q[i];
    if (sp < sq) return false;
  }
  return sp == sq;
}

// Integer partitions of n in descending order, e.g. n = 3: (3), (2,1), (1,1,1).
inline std::vector<std::vector<int>> integer_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int rest, int cap) {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    for (int k = std::min(rest, cap); k >= 1; --k) {
      cur.push_back(k);
      rec(rest - k, k);
      cur.pop_back();
    }
  };
  rec(n, n);
  return out;
}

// ---- spectra ----

inline constexpr double kKernelRelTol = 1e-9;
inline constexpr double kNullSupportTol = 1e-9;

struct SpectralReport {
  std::vector<double> eigenvalues;  // ascending
  int kernel_dim = 0;
  RealMatrix kernel_basis;          // N x kernel_dim, orthonormal columns
  std::vector<int> null_support_nodes;
};

// Nodes where every column of the kernel basis is below amp_tol in magnitude.
inline std::vector<int> null_support_nodes(const RealMatrix& kernel_basis, double amp_tol = kNullSupportTol) {
  std::vector<int> out;
  if (kernel_basis.cols() == 0) return out;
  for (Eigen::Index x = 0; x < kernel_basis.rows(); ++x) {
    if (kernel_basis.row(x).cwiseAbs().maxCoeff() < amp_tol) out.push_back(static_cast<int>(x));
  }
  return out;
}

inline SpectralReport spectral_report(const RealMatrix& a, double rel_tol = kKernelRelTol,
                                      double amp_tol = kNullSupportTol) {
  if (a.rows() != a.cols()) throw InvalidArgument("spectral report needs a square matrix");
  if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > kWeightTol) {
    throw InvalidArgument("spectral report needs a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  const RealVector& ev = es.eigenvalues();
  SpectralReport r;
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  const double scale = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (std::abs(ev(k)) <= rel_tol * scale) kernel.push_back(k);
  r.kernel_dim = static_cast<int>(kernel.size());
  r.kernel_basis.resize(a.rows(), r.kernel_dim);
  for (std::size_t c = 0; c < kernel.size(); ++c) r.kernel_basis.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(kernel[c]);
  r.null_support_nodes = null_support_nodes(r.kernel_basis, amp_tol);
  return r;
}

// Dimension of the adjacency-kernel subspace that vanishes on every ancilla target.
inline int dark_kernel_dim(const NetworkGraph& g, const SpectralReport& rep, double rel_tol = kKernelRelTol) {
  if (rep.kernel_dim == 0) return 0;
  const auto targets = g.ancilla_targets();
  if (targets.empty()) return rep.kernel_dim;
  RealMatrix t(static_cast<Eigen::Index>(targets.size()), rep.kernel_dim);
  for (std::size_t r = 0; r < targets.size(); ++r) t.row(static_cast<Eigen::Index>(r)) = rep.kernel_basis.row(targets[r].node);
  Eigen::JacobiSVD<RealMatrix> svd(t);
  const RealVector sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > rel_tol * std::max(1.0, sv(0))) ++rank;
  return rep.kernel_dim - rank;
}

// ---- combined symmetry analysis ----

enum class Verdict { Polarizable, AoBlocked, SpsBlocked };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Polarizable: return "polarizable";
    case Verdict::AoBlocked: return "AO-blocked";
    case Verdict::SpsBlocked: return "SPS-blocked";
  }
  return "?";
}

struct SymmetryAnalysis {
  OrbitPartition orbits;
  RankNullity analytic;
  double info = 0.0;
  std::optional<double> info_normalized;
  double bound = 1.0;
  SpectralReport spectrum;  // system adjacency
  int augmented_kernel_dim = 0;
  int dark_dim = 0;
  Verdict verdict = Verdict::Polarizable;
};

inline SymmetryAnalysis analyze_symmetry(const NetworkGraph& g) {
  if (!g.has_ancilla()) throw InvalidArgument("graph has no ancilla targets");
  SymmetryAnalysis s;
  const int n = g.size();
  s.orbits = automorphism_orbits(g);
  s.analytic = analytic_rank_nullity(s.orbits.counts, n);
  s.info = information_content(s.orbits.counts);
  if (n >= 2) s.info_normalized = normalized_information_content(s.orbits.counts);
  s.bound = polarizability_bound(s.orbits.k(), n);
  s.spectrum = spectral_report(g.adjacency());
  s.augmented_kernel_dim = spectral_report(augmented_adjacency(g)).kernel_dim;
  s.dark_dim = dark_kernel_dim(g, s.spectrum);
  if (s.orbits.k() < n) {
    s.verdict = Verdict::AoBlocked;
  } else if (s.dark_dim > 0) {
    s.verdict = Verdict::SpsBlocked;
  } else {
    s.verdict = Verdict::Polarizable;
  }
  return s;
}

// ---- connected-graph enumeration ----

namespace detail {

inline int pair_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  // pairs ordered (0,1),(0,2)..(0,n-1),(1,2)..
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline std::uint64_t mask_of(const NetworkGraph& g) {
  std::uint64_t m = 0;
  for (const auto& [key, w] : g.edges()) {
    (void)w;
    m |= std::uint64_t{1} << pair_index(key.first, key.second, g.size());
  }
  return m;
}

inline bool mask_connected(std::uint64_t mask, int n) {
  std::uint32_t seen = 1, frontier = 1;
  while (frontier) {
    std::uint32_t next = 0;
    for (int u = 0; u < n; ++u) {
      if (!(frontier >> u & 1u)) continue;
      for (int v = 0; v < n; ++v)
        if (v != u && (mask >> pair_index(u, v, n) & 1u)) next |= 1u << v;
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == (1u << n) - 1;
}

struct PermutationTable {
  int n;
  int pairs;
  std::vector<std::vector<int>> images;  // per permutation: pair -> permuted pair

  explicit PermutationTable(int n_nodes) : n(n_nodes), pairs(n_nodes * (n_nodes - 1) / 2) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    do {
      std::vector<int> img(static_cast<std::size_t>(pairs));
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) img[static_cast<std::size_t>(pair_index(i, j, n))] = pair_index(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)], n);
      images.push_back(std::move(img));
    } while (std::next_permutation(p.begin(), p.end()));
  }

  std::uint64_t apply(std::size_t perm, std::uint64_t mask) const {
    std::uint64_t out = 0;
    const auto& img = images[perm];
    for (int b = 0; b < pairs; ++b)
      if (mask >> b & 1u) out |= std::uint64_t{1} << img[static_cast<std::size_t>(b)];
    return out;
  }

  bool is_minimal(std::uint64_t mask) const {
    for (std::size_t k = 0; k < images.size(); ++k)
      if (apply(k, mask) < mask) return false;
    return true;
  }

  std::uint64_t canonical(std::uint64_t mask) const {
    std::uint64_t best = mask;
    for (std::size_t k = 0; k < images.size(); ++k) best = std::min(best, apply(k, mask));
    return best;
  }
};

inline NetworkGraph graph_from_mask(std::uint64_t mask, int n) {
  NetworkGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (mask >> pair_index(i, j, n) & 1u) g.set_edge(i, j, 1.0);
  return g;
}

}  // namespace detail

// Smallest edge bitmask over all relabelings (unit-weight structure only).
inline std::uint64_t canonical_mask(const NetworkGraph& g) {
  if (g.size() > kMaxEnumerationNodes) throw LimitExceeded("canonical form supports N <= 7");
  return detail::PermutationTable(g.size()).canonical(detail::mask_of(g));
}

// Calls visit(mask, graph) once per isomorphism class of connected simple graphs, ascending mask order.
inline void for_each_connected_graph(int n, const std::function<void(std::uint64_t, const NetworkGraph&)>& visit) {
  if (n < 1) throw InvalidArgument("N must be >= 1");
  if (n > kMaxEnumerationNodes) {
    throw LimitExceeded("graph enumeration supports N <= " + std::to_string(kMaxEnumerationNodes));
  }
  if (n == 1) {
    visit(0, NetworkGraph(1));
    return;
  }
  const detail::PermutationTable table(n);
  const std::uint64_t total = std::uint64_t{1} << table.pairs;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (!detail::mask_connected(mask, n) || !table.is_minimal(mask)) continue;
    visit(mask, detail::graph_from_mask(mask, n));
  }
}

inline std::vector<NetworkGraph> enumerate_connected_graphs(int n) {
  std::vector<NetworkGraph> out;
  for_each_connected_graph(n, [&](std::uint64_t, const NetworkGraph& g) { out.push_back(g); });
  return out;
}

// ---- graph file format ----
//
//   N <count>        first record
//   E i j w          edge weight
//   L i h            self-loop (local field)
//   A k g            ancilla coupling
// '#' starts a comment; blank lines are ignored.

inline NetworkGraph parse_graph(std::istream& in, const std::string& source = "<graph>") {
  std::optional<NetworkGraph> g;
  std::map<std::pair<int, int>, long> seen_edges;
  std::string line;
  long lineno = 0;
  auto fail = [&](const std::string& msg) { throw ParseError(source, lineno, msg); };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    auto read_index = [&](const char* what) {
      long long v;
      if (!(ls >> v)) fail(std::string("expected integer ") + what);
      if (v < 0 || v >= g->size()) fail(std::string(what) + " " + std::to_string(v) + " out of range");
      return static_cast<int>(v);
    };
    auto read_real = [&](const char* what) {
      std::string tok;
      if (!(ls >> tok)) fail(std::string("expected real ") + what);
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
        return v;
      } catch (const std::exception&) {
        fail(std::string("bad real for ") + what + ": '" + tok + "'");
      }
      return 0.0;
    };
    if (tag == "N") {
      if (g) fail("duplicate N record");
      long long n;
      if (!(ls >> n) || n < 1) fail("N needs a positive count");
      g.emplace(static_cast<int>(n));
    } else {
      if (!g) fail("first record must be 'N <count>'");
      if (tag == "E") {
        const int i = read_index("node");
        const int j = read_index("node");
        if (i == j) fail("edge endpoints must differ; use 'L' for self-loops");
        const double w = read_real("weight");
        const auto key = std::minmax(i, j);
        if (auto [it, inserted] = seen_edges.try_emplace({key.first, key.second}, lineno); !inserted) {
          fail("edge " + std::to_string(i) + "-" + std::to_string(j) + " already given on line " +
               std::to_string(it->second));
        }
        g->set_edge(i, j, w);
      } else if (tag == "L") {
        const int i = read_index("node");
        g->set_self_loop(i, read_real("field"));
      } else if (tag == "A") {
        const int k = read_index("node");
        g->set_ancilla_target(k, read_real("coupling"));
      } else {
        fail("unknown record '" + tag + "'");
      }
    }
    std::string extra;
    if (ls >> extra) fail("unexpected trailing token '" + extra + "'");
  }
  if (!g) throw ParseError(source, lineno, "missing 'N <count>' record");
  return *g;
}

inline NetworkGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open graph file '" + path + "'");
  return parse_graph(in, path);
}

inline std::string format_graph(const NetworkGraph& g) {
  std::ostringstream out;
  out.precision(17);
  out << "N " << g.size() << '\n';
  for (const auto& [key, w] : g.edges()) out << "E " << key.first << ' ' << key.second << ' ' << w << '\n';
  for (int i = 0; i < g.size(); ++i)
    if (g.self_loop(i) != 0.0) out << "L " << i << ' ' << g.self_loop(i) << '\n';
  for (const auto& t : g.ancilla_targets()) out << "A " << t.node << ' ' << t.g << '\n';
  return out.str();
}

}  // namespace spinpurge::netgraph
