#include <gtest/gtest.h>

#include <random>

#include "spinpurge/model.hpp"

using namespace spinpurge;
using namespace spinpurge::model;
using netgraph::NetworkGraph;
using qmat::PauliAxis;
using qmat::pauli_on_site;

namespace {

DenseOperator P(PauliAxis a, int qubit, int q) { return pauli_on_site(a, qubit, q); }

// Hamiltonians assembled from Pauli products.
DenseOperator pauli_h_system(const NetworkGraph& g, double delta) {
  const int q = g.size() + 1;
  DenseOperator h = DenseOperator::zero(q);
  for (const auto& [key, w] : g.edges()) {
    const int a = node_qubit(key.first), b = node_qubit(key.second);
    h += w * (P(PauliAxis::X, a, q) * P(PauliAxis::X, b, q) + P(PauliAxis::Y, a, q) * P(PauliAxis::Y, b, q) +
              delta * P(PauliAxis::Z, a, q) * P(PauliAxis::Z, b, q));
  }
  for (int i = 0; i < g.size(); ++i) h += g.self_loop(i) * P(PauliAxis::Z, node_qubit(i), q);
  return h;
}

DenseOperator pauli_h_res(const NetworkGraph& g) {
  const int q = g.size() + 1;
  DenseOperator h = DenseOperator::zero(q);
  for (const auto& t : g.ancilla_targets()) {
    const int k = node_qubit(t.node);
    h += (0.5 * t.g) * (P(PauliAxis::Plus, 0, q) * P(PauliAxis::Minus, k, q) +
                        P(PauliAxis::Minus, 0, q) * P(PauliAxis::Plus, k, q));
  }
  return h;
}

DenseOperator pauli_h_disp(const std::vector<double>& gt) {
  const int q = static_cast<int>(gt.size()) + 1;
  DenseOperator s = DenseOperator::zero(q);
  for (std::size_t k = 0; k < gt.size(); ++k) s += gt[k] * P(PauliAxis::Z, node_qubit(static_cast<int>(k)), q);
  return P(PauliAxis::Z, 0, q) * s;
}

NetworkGraph random_graph(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NetworkGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) > -0.3) g.set_edge(i, j, u(rng));
  for (int i = 0; i < n; ++i) {
    g.set_self_loop(i, u(rng));
    if (u(rng) > 0.0 || i == 0) g.set_ancilla_target(i, 1.0 + u(rng));
  }
  return g;
}

qmat::Vector fgs_joint(int q) {
  qmat::Vector v = qmat::Vector::Zero(qmat::Index{1} << q);
  v(0) = 1.0;
  return v;
}

DenseOperator total_z(int q) {
  DenseOperator z = DenseOperator::zero(q);
  for (int s = 0; s < q; ++s) z += P(PauliAxis::Z, s, q);
  return z;
}

}  // namespace

TEST(HSystem, MatchesPauliProducts) {
  std::mt19937_64 rng(31);
  for (int n = 1; n <= 5; ++n)
    for (double delta : {0.0, 0.5, 1.0, -0.7}) {
      const auto g = random_graph(n, rng);
      EXPECT_LT(qmat::max_norm(build_h_system(g, delta) - pauli_h_system(g, delta)), 1e-13);
    }
}

TEST(HSystem, SingleSpinNoField) { EXPECT_EQ(qmat::max_norm(build_h_system(NetworkGraph(1), 1.0)), 0.0); }

TEST(HSystem, FlipFlopElement) {
  NetworkGraph g(2);
  g.set_edge(0, 1, 1.0);
  const auto h = build_h_system(g, 0.0);
  // |0_A 0 1> = index 1, |0_A 1 0> = index 2
  EXPECT_EQ(h(1, 2), qmat::Complex(2.0));
  EXPECT_EQ(h(2, 1), qmat::Complex(2.0));
}

TEST(HSystem, GroundStateIsEigenvector) {
  std::mt19937_64 rng(2);
  for (int n = 1; n <= 5; ++n) {
    const auto g = random_graph(n, rng);
    const double delta = 0.3;
    double e = 0.0;
    for (const auto& [key, w] : g.edges()) e += delta * w;
    for (int i = 0; i < n; ++i) e += g.self_loop(i);  // sigma_z |0> = +|0>
    const auto v = fgs_joint(n + 1);
    EXPECT_LT((build_h_system(g, delta).matrix() * v - e * v).norm(), 1e-12);
  }
}

TEST(HSystem, ConservesMagnetization) {
  std::mt19937_64 rng(9);
  const auto g = random_graph(4, rng);
  EXPECT_LT(qmat::max_norm(qmat::commutator(build_h_system(g, 0.8), total_z(5))), 1e-12);
}

TEST(HRes, MatchesPauliProducts) {
  std::mt19937_64 rng(4);
  for (int n = 1; n <= 5; ++n) {
    const auto g = random_graph(n, rng);
    EXPECT_LT(qmat::max_norm(build_h_res(g) - pauli_h_res(g)), 1e-14);
  }
}

TEST(HRes, AnnihilatesGroundState) {
  std::mt19937_64 rng(5);
  const auto g = random_graph(4, rng);
  EXPECT_EQ((build_h_res(g).matrix() * fgs_joint(5)).norm(), 0.0);
}

TEST(HRes, SingleTargetElement) {
  NetworkGraph g(1);
  g.set_ancilla_target(0, 2.0);
  const auto h = build_h_res(g);
  // |0_A 1> = 1, |1_A 0> = 2
  EXPECT_EQ(h(1, 2), qmat::Complex(1.0));
  EXPECT_EQ(h(2, 1), qmat::Complex(1.0));
  EXPECT_EQ(h(0, 0), qmat::Complex(0.0));
}

TEST(HRes, ConservesExcitations) {
  std::mt19937_64 rng(6);
  const auto g = random_graph(4, rng);
  EXPECT_LT(qmat::max_norm(qmat::commutator(build_h_res(g), total_z(5))), 1e-14);
}

TEST(HRes, RequiresTargets) { EXPECT_THROW(build_h_res(NetworkGraph(2)), InvalidArgument); }

TEST(HDisp, MatchesPauliProducts) {
  const std::vector<double> gt{0.3, -0.5, 1.1, 0.7};
  EXPECT_LT(qmat::max_norm(build_h_disp(gt) - pauli_h_disp(gt)), 1e-15);
}

TEST(HDisp, GroundStateEigenvalue) {
  const std::vector<double> gt{0.3, 0.5, 0.9};
  const auto v = fgs_joint(4);
  EXPECT_LT((build_h_disp(gt).matrix() * v - 1.7 * v).norm(), 1e-14);
}

TEST(HDisp, UniformCommutesWithExchanges) {
  const int n = 4, q = n + 1;
  const auto h = build_h_disp(std::vector<double>(n, 0.6));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      EXPECT_LT(qmat::max_norm(qmat::commutator(h, qmat::swap_operator(node_qubit(i), node_qubit(j), q))), 1e-14);
}

TEST(HDisp, NonuniformCommutatorClosedForm) {
  const std::vector<double> gt{0.2, 0.9, 0.4};
  const int q = 4;
  const auto h = build_h_disp(gt);
  const qmat::Complex I{0.0, 1.0};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const int a = node_qubit(i), b = node_qubit(j);
      const auto c = qmat::commutator(h, qmat::swap_operator(a, b, q));
      const auto form = (I * (gt[static_cast<std::size_t>(i)] - gt[static_cast<std::size_t>(j)])) *
                        ((P(PauliAxis::Y, a, q) * P(PauliAxis::X, b, q) - P(PauliAxis::X, a, q) * P(PauliAxis::Y, b, q)) *
                         P(PauliAxis::Z, 0, q));
      EXPECT_LT(qmat::max_norm(c - form), 1e-14);
      EXPECT_GT(qmat::max_norm(c), 0.0);
    }
}

TEST(Schedule, RtOneSegment) {
  NetworkGraph g = netgraph::path_graph(2);
  g.set_ancilla_target(0, 1.0);
  ProtocolConfig cfg;
  cfg.tau = 1.0;
  const auto s = build_schedule(cfg, g);
  ASSERT_EQ(s.segments.size(), 1u);
  EXPECT_EQ(s.segments[0].duration, 1.0);
  EXPECT_LT(qmat::max_norm(s.segments[0].generator - (build_h_system(g, 0.0) + build_h_res(g))), 1e-15);
}

TEST(Schedule, AdrtTwoHalves) {
  NetworkGraph g = netgraph::path_graph(2);
  g.set_ancilla_target(0, 1.0);
  ProtocolConfig cfg;
  cfg.protocol = Protocol::ADRT;
  cfg.tau = 2.0;
  cfg.g_tilde = {0.3, 0.5};
  const auto s = build_schedule(cfg, g);
  ASSERT_EQ(s.segments.size(), 2u);
  EXPECT_EQ(s.segments[0].duration, 1.0);
  EXPECT_EQ(s.segments[1].duration, 1.0);
  EXPECT_DOUBLE_EQ(s.total_duration(), 2.0);
  const auto hs = build_h_system(g, 0.0);
  EXPECT_LT(qmat::max_norm(s.segments[1].generator - (hs + build_h_disp(cfg.g_tilde))), 1e-15);
}

TEST(Schedule, StarModelReducesToCouplings) {
  const NetworkGraph g = netgraph::star_model(3, 1.0);
  ProtocolConfig cfg;
  cfg.protocol = Protocol::ADRT;
  cfg.tau = 1.0;
  cfg.g_tilde = {0.3, 0.5, 0.7};
  const auto s = build_schedule(cfg, g);
  EXPECT_LT(qmat::max_norm(s.segments[0].generator - build_h_res(g)), 1e-15);
  EXPECT_LT(qmat::max_norm(s.segments[1].generator - build_h_disp(cfg.g_tilde)), 1e-15);
}

TEST(Schedule, AdrtNeedsGTilde) {
  const NetworkGraph g = netgraph::star_model(3, 1.0);
  ProtocolConfig cfg;
  cfg.protocol = Protocol::ADRT;
  EXPECT_THROW(build_schedule(cfg, g), InvalidArgument);
  cfg.g_tilde = {0.1, 0.2};
  EXPECT_THROW(build_schedule(cfg, g), InvalidArgument);
}

TEST(Schedule, WarnsOnRepeatedGTilde) {
  const NetworkGraph g = netgraph::star_model(3, 1.0);
  ProtocolConfig cfg;
  cfg.protocol = Protocol::ADRT;
  cfg.g_tilde = {0.1, 0.2, 0.1};
  EXPECT_EQ(validate(cfg, g).size(), 1u);
  cfg.g_tilde = {0.1, 0.2, 0.3};
  EXPECT_TRUE(validate(cfg, g).empty());
}

TEST(Schedule, RejectsBadConfig) {
  const NetworkGraph g = netgraph::star_model(2, 1.0);
  ProtocolConfig cfg;
  cfg.tau = 0.0;
  EXPECT_THROW(validate(cfg, g), InvalidArgument);
  cfg.tau = 1.0;
  cfg.n_cycles = 0;
  EXPECT_THROW(validate(cfg, g), InvalidArgument);
}

TEST(Schedule, DefaultTau) {
  NetworkGraph g(2);
  g.set_ancilla_target(0, 1.0);
  g.set_ancilla_target(1, 3.0);
  EXPECT_DOUBLE_EQ(default_tau(g), std::numbers::pi / 4.0);
}

TEST(Reset, ParametricValidation) {
  EXPECT_NO_THROW(ResetSpec::parametric(0.5, {0.5, 0.0}));
  EXPECT_THROW(ResetSpec::parametric(0.5, {0.6, 0.0}), InvalidArgument);
  EXPECT_THROW(ResetSpec::parametric(1.2, {0.0, 0.0}), InvalidArgument);
  EXPECT_TRUE(ResetSpec::parametric(0.0, {}).is_ideal());
}

TEST(ExchangeAlgebra, GroundStateEigenvectorOfBothSegments) {
  std::mt19937_64 rng(12);
  for (int n = 1; n <= 5; ++n) {
    const auto g = random_graph(n, rng);
    std::vector<double> gt;
    for (int k = 0; k < n; ++k) gt.push_back(0.2 + 0.3 * k);
    const auto hs = build_h_system(g, 0.7);
    const auto v = fgs_joint(n + 1);
    for (const auto& h : {hs + build_h_res(g), hs + build_h_disp(gt)}) {
      const qmat::Complex e = v.dot(h.matrix() * v);
      EXPECT_LT((h.matrix() * v - e * v).norm(), 1e-12);
    }
  }
}

TEST(ExchangeAlgebra, UniformResonantCouplingCommutesWithExchanges) {
  const int n = 4, q = n + 1;
  const auto h = build_h_res(netgraph::star_model(n, 0.8));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      EXPECT_LT(qmat::max_norm(qmat::commutator(h, qmat::swap_operator(node_qubit(i), node_qubit(j), q))), 1e-12);
}

TEST(ExchangeAlgebra, ResonantAndDispersiveDoNotCommute) {
  for (int n = 2; n <= 4; ++n) {
    NetworkGraph g(n);
    std::vector<double> gt;
    for (int k = 0; k < n; ++k) {
      g.set_ancilla_target(k, 1.0 + 0.1 * k);
      gt.push_back(0.3 + 0.25 * k);
    }
    EXPECT_GT(qmat::max_norm(qmat::commutator(build_h_res(g), build_h_disp(gt))), 1e-3);
  }
}

TEST(ExchangeAlgebra, UniformResonantCouplingConservesTotalSpin) {
  const int n = 3, q = n + 1;
  DenseOperator j2 = DenseOperator::zero(q);
  for (auto a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
    DenseOperator ja = DenseOperator::zero(q);
    for (int k = 0; k < n; ++k) ja += 0.5 * P(a, node_qubit(k), q);
    j2 += ja * ja;
  }
  EXPECT_LT(qmat::max_norm(qmat::commutator(build_h_res(netgraph::star_model(n, 1.3)), j2)), 1e-12);
  NetworkGraph skew = netgraph::star_model(n, 1.3);
  skew.set_ancilla_target(2, 0.4);
  EXPECT_GT(qmat::max_norm(qmat::commutator(build_h_res(skew), j2)), 1e-3);
}
