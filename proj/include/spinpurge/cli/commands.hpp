#pragma once

// analyze / simulate / enumerate: one scenario in, CSV artifacts out.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spinpurge/cli/csv.hpp"
#include "spinpurge/cli/scenario.hpp"
#include "spinpurge/dicke.hpp"
#include "spinpurge/engine.hpp"
#include "spinpurge/netgraph.hpp"
#include "spinpurge/parallel.hpp"

namespace spinpurge::cli {

struct RunContext {
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  bool large = false;
  std::ostream* log = nullptr;
};

inline void say(const RunContext& ctx, const std::string& line) {
  if (ctx.log) *ctx.log << line << '\n';
}

inline CsvMeta meta_for(const Scenario& s, const RunContext& ctx) { return CsvMeta{ctx.seed, s.hash, {}}; }

// Ginibre draw normalised to unit trace; full rank with probability one.
inline qmat::DensityMatrix random_mixed_state(int qubits, std::uint64_t seed) {
  const qmat::Index d = qmat::dim_for_qubits(qubits);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  qmat::Matrix g(d, d);
  for (qmat::Index c = 0; c < d; ++c)
    for (qmat::Index r = 0; r < d; ++r) g(r, c) = qmat::Complex(normal(rng), normal(rng));
  qmat::Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return qmat::DensityMatrix::from_matrix(0.5 * (rho + rho.adjoint()));
}

inline qmat::DensityMatrix initial_state(const Scenario& s, std::uint64_t seed) {
  if (s.initial == InitialState::Random) return random_mixed_state(s.graph.size(), seed);
  return qmat::DensityMatrix::maximally_mixed(s.graph.size());
}

// ---- analyze ----

struct AnalyzeResult {
  netgraph::SymmetryAnalysis symmetry;
  std::optional<engine::RankNullityReport> numeric;
};

inline double nullity_upper_fraction(int n) {
  const double dim = std::pow(4.0, n) - 1.0;
  return (dim - (2.0 * std::pow(3.0, n) - 3.0)) / dim;
}

inline CsvTable orbits_table(const netgraph::SymmetryAnalysis& a, const NetworkGraph& g) {
  CsvTable t({"node", "orbit_id", "orbit_size", "ancilla_g"});
  for (int i = 0; i < g.size(); ++i) {
    const int o = a.orbits.orbit_of[static_cast<std::size_t>(i)];
    t.add(i, o, a.orbits.counts[static_cast<std::size_t>(o)], g.ancilla_coupling(i));
  }
  return t;
}

inline CsvTable symmetry_table(const netgraph::SymmetryAnalysis& a, int n) {
  CsvTable t({"N", "K", "counts", "I_G", "I_G_normalized", "dimension", "rank", "nullity", "p_bound"});
  t.add(n, a.orbits.k(), join(a.orbits.counts), a.info, a.info_normalized,
        a.analytic.dimension, a.analytic.rank, a.analytic.nullity, a.bound);
  return t;
}

// Long format: one row per quantity entry.
inline CsvTable spectrum_table(const netgraph::SymmetryAnalysis& a) {
  CsvTable t({"quantity", "index", "value"});
  for (std::size_t k = 0; k < a.spectrum.eigenvalues.size(); ++k) t.add("eigenvalue", k, a.spectrum.eigenvalues[k]);
  t.add("kernel_dim", 0, a.spectrum.kernel_dim);
  for (std::size_t k = 0; k < a.spectrum.null_support_nodes.size(); ++k)
    t.add("null_support", k, a.spectrum.null_support_nodes[k]);
  t.add("dark_kernel_dim", 0, a.dark_dim);
  t.add("augmented_kernel_dim", 0, a.augmented_kernel_dim);
  return t;
}

inline CsvTable numeric_nullity_table(const engine::RankNullityReport& r, const netgraph::RankNullity& analytic,
                                      model::Protocol protocol) {
  CsvTable t({"protocol", "dimension", "rank", "nullity_numeric", "nullity_analytic", "difference", "kernel_dim", "gap_ratio",
              "threshold", "steady_state"});
  const long diff = static_cast<long>(r.nullity) - static_cast<long>(analytic.nullity);
  t.add(model::to_string(protocol), r.dimension, r.rank, r.nullity, analytic.nullity, diff, r.kernel_dim, r.gap_ratio, r.threshold,
        engine::to_string(engine::classify_rc(r).kind));
  return t;
}

inline AnalyzeResult cmd_analyze(const Scenario& s, const RunContext& ctx) {
  for (const auto& w : s.warnings) say(ctx, "warning: " + w);
  AnalyzeResult res{netgraph::analyze_symmetry(s.graph), std::nullopt};
  const auto meta = meta_for(s, ctx);
  const auto& a = res.symmetry;
  const int n = s.graph.size();
  if (s.wants(Analysis::Orbits)) orbits_table(a, s.graph).write(ctx.out_dir / "orbits.csv", meta);
  if (s.wants(Analysis::NullityAnalytic)) symmetry_table(a, n).write(ctx.out_dir / "symmetry.csv", meta);
  if (s.wants(Analysis::Spectrum)) spectrum_table(a).write(ctx.out_dir / "spectrum.csv", meta);
  if (s.wants(Analysis::NullityNumeric)) {
    const auto schedule = model::build_schedule(s.protocol, s.graph);
    const auto m = engine::build_superoperator(schedule, s.protocol.reset);
    res.numeric = engine::numeric_rank_nullity(m);
    numeric_nullity_table(*res.numeric, a.analytic, s.protocol.protocol).write(ctx.out_dir / "numeric_nullity.csv", meta);
  }
  const std::string verdict = netgraph::to_string(a.verdict);
  CsvTable::write_text(ctx.out_dir / "verdict.txt", verdict + "\n");
  say(ctx, "verdict: " + verdict);
  return res;
}

// ---- simulate ----

inline CsvTable trace_table(const qmat::DensityMatrix& rho0, const engine::RunResult& r) {
  CsvTable t({"cycle", "purity", "entropy", "fgs_fidelity", "epsilon"});
  const double f0 = qmat::fidelity_fgs(rho0);
  t.add(0, qmat::purity(rho0), qmat::entropy(rho0), f0, 1.0 - f0);
  const auto& tr = r.trace;
  for (std::size_t k = 0; k < tr.size(); ++k)
    t.add(k + 1, tr.purity[k], tr.entropy[k], tr.fgs_fidelity[k], tr.infidelity[k]);
  if (tr.size() > 0)
    t.add("steady", tr.purity.back(), tr.entropy.back(), tr.fgs_fidelity.back(), tr.infidelity.back());
  return t;
}

inline engine::RunResult simulate_protocol(const NetworkGraph& g, const model::ProtocolConfig& cfg,
                                           const qmat::DensityMatrix& rho0, bool record_ancilla = false) {
  const auto schedule = model::build_schedule(cfg, g);
  engine::RunOptions opt;
  opt.n_cycles = cfg.n_cycles;
  opt.steady_tol = cfg.steady_tol;
  opt.record_ancilla = record_ancilla;
  return engine::run_cycles(rho0, engine::CycleChannel(schedule, cfg.reset), opt);
}

inline CsvTable dicke_compare_table(const std::vector<double>& dense, const std::vector<double>& recurrence) {
  CsvTable t({"cycle", "dense_purity", "recurrence_purity", "abs_difference"});
  for (std::size_t k = 0; k < dense.size(); ++k) t.add(k + 1, dense[k], recurrence[k], std::abs(dense[k] - recurrence[k]));
  return t;
}

inline engine::RunResult cmd_simulate(const Scenario& s, const RunContext& ctx) {
  for (const auto& w : s.warnings) say(ctx, "warning: " + w);
  const auto rho0 = initial_state(s, ctx.seed);
  auto meta = meta_for(s, ctx);
  meta.extra = {{"protocol", model::to_string(s.protocol.protocol)},
                {"tau", fmt(model::resolved_tau(s.protocol, s.graph))},
                {"delta", fmt(s.protocol.delta)}};
  if (s.wants(Analysis::DickeCompare)) {
    model::ProtocolConfig fixed = s.protocol;
    fixed.steady_tol = 0.0;
    const auto r = simulate_protocol(s.graph, fixed, rho0);
    const double theta = dicke::recurrence_angle(s.graph.ancilla_coupling(0), model::resolved_tau(fixed, s.graph));
    const auto rec = dicke::rt_recurrence_purities(s.graph.size(), theta, fixed.n_cycles);
    auto m = meta;
    const auto exact = dicke::rt_steady_polarization_exact(s.graph.size());
    m.extra.emplace_back("closed_form_purity", exact.str());
    m.extra.emplace_back("closed_form_value", fmt(exact.to_double()));
    dicke_compare_table(r.trace.purity, rec).write(ctx.out_dir / "dicke_compare.csv", m);
  }
  engine::RunResult r{rho0, {}};
  if (s.wants(Analysis::Simulate)) {
    r = simulate_protocol(s.graph, s.protocol, rho0);
    auto m = meta;
    m.extra.emplace_back("converged_at", r.trace.converged_at ? fmt(*r.trace.converged_at) : std::string("none"));
    trace_table(rho0, r).write(ctx.out_dir / "trace.csv", m);
    say(ctx, "final purity " + fmt(r.trace.purity.back()) + " after " + fmt(r.trace.size()) + " cycles");
  }
  return r;
}

// ---- enumerate ----

inline constexpr int kDefaultEnumerationCap = 6;

struct PopulationRow {
  int n = 0;
  std::size_t class_id = 0;
  std::uint64_t mask = 0;
  NetworkGraph graph{1};  // ancilla attached
  int ancilla_node = 0;
  netgraph::OrbitPartition orbits;
  double info = 0.0;
  std::optional<double> info_normalized;
  netgraph::RankNullity analytic;
};

// Attach the ancilla where the orbit count is largest; ties go to the lowest node.
inline PopulationRow classify_graph(int n, std::size_t id, std::uint64_t mask, const NetworkGraph& g0) {
  PopulationRow best;
  best.n = n;
  best.class_id = id;
  best.mask = mask;
  int best_k = -1;
  for (int a = 0; a < n; ++a) {
    NetworkGraph g = g0;
    g.set_ancilla_target(a, 1.0);
    auto orbits = netgraph::automorphism_orbits(g);
    if (orbits.k() > best_k) {
      best_k = orbits.k();
      best.graph = g;
      best.ancilla_node = a;
      best.orbits = std::move(orbits);
    }
  }
  best.info = netgraph::information_content(best.orbits.counts);
  if (n >= 2) best.info_normalized = netgraph::normalized_information_content(best.orbits.counts);
  best.analytic = netgraph::analytic_rank_nullity(best.orbits.counts, n);
  return best;
}

inline std::vector<PopulationRow> population(int n) {
  std::vector<std::uint64_t> masks;
  std::vector<NetworkGraph> graphs;
  netgraph::for_each_connected_graph(n, [&](std::uint64_t m, const NetworkGraph& g) {
    masks.push_back(m);
    graphs.push_back(g);
  });
  return parallel_map<PopulationRow>(graphs.size(), [&](std::size_t i) { return classify_graph(n, i, masks[i], graphs[i]); });
}

inline std::string edge_list(const NetworkGraph& g) {
  std::string out;
  for (const auto& [key, w] : g.edges()) {
    (void)w;
    if (!out.empty()) out += ';';
    out += std::to_string(key.first) + "-" + std::to_string(key.second);
  }
  return out;
}

inline CsvTable population_table(const std::vector<PopulationRow>& rows) {
  CsvTable t({"N", "class_id", "edges", "ancilla_node", "K", "counts", "I_G", "I_G_normalized", "nullity",
              "nullity_fraction", "nullity_upper_fraction", "verdict"});
  for (const auto& r : rows) {
    const double dim = static_cast<double>(r.analytic.dimension);
    const char* verdict = r.orbits.k() < r.n ? "AO-blocked" : "identity";
    t.add(r.n, r.class_id, edge_list(r.graph), r.ancilla_node, r.orbits.k(), join(r.orbits.counts), r.info,
          r.info_normalized, r.analytic.nullity, static_cast<double>(r.analytic.nullity) / dim, nullity_upper_fraction(r.n),
          verdict);
  }
  return t;
}

inline std::vector<int> enumeration_sizes(std::optional<int> only, bool large) {
  const int cap = large ? netgraph::kMaxEnumerationNodes : kDefaultEnumerationCap;
  if (only) {
    if (*only < 2) throw ScenarioError("enumeration needs N >= 2");
    if (*only > cap)
      throw LimitExceeded("enumeration of N = " + std::to_string(*only) + " needs N <= " + std::to_string(cap) +
                          (large ? "" : " (pass --large for N = 7)"));
    return {*only};
  }
  std::vector<int> out;
  for (int n = 2; n <= cap; ++n) out.push_back(n);
  return out;
}

inline std::vector<PopulationRow> cmd_enumerate(const std::vector<int>& sizes, const RunContext& ctx,
                                                const std::string& scenario_hash = "") {
  std::vector<PopulationRow> all;
  for (int n : sizes) {
    auto rows = population(n);
    say(ctx, "N=" + std::to_string(n) + ": " + std::to_string(rows.size()) + " connected classes");
    all.insert(all.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  population_table(all).write(ctx.out_dir / "population.csv", CsvMeta{ctx.seed, scenario_hash, {}});
  return all;
}

}  // namespace spinpurge::cli
