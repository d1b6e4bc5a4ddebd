#pragma once

// Figure bundles. Every numeric choice comes from presets/fig<id>.toml; the
// bundle's manifest.csv names the preset file and its hash.

#include <toml.hpp>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spinpurge/cli/commands.hpp"
#include "spinpurge/cli/csv.hpp"
#include "spinpurge/cli/scenario.hpp"
#include "spinpurge/dicke.hpp"
#include "spinpurge/engine.hpp"
#include "spinpurge/netgraph.hpp"
#include "spinpurge/parallel.hpp"

#ifndef SPINPURGE_PRESET_DIR
#define SPINPURGE_PRESET_DIR "presets"
#endif

namespace spinpurge::cli {

inline constexpr std::array<const char*, 10> kFigureIds = {"2c", "3b", "3d", "3e", "4c", "5b", "5c", "6", "7", "9"};

inline bool is_figure_id(std::string_view id) {
  for (const char* f : kFigureIds)
    if (id == f) return true;
  return false;
}

// SPINPURGE_PRESET_DIR in the environment wins over the build-time default.
inline std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("SPINPURGE_PRESET_DIR"); env && *env) return env;
  return SPINPURGE_PRESET_DIR;
}

inline std::filesystem::path preset_path(std::string_view id) { return preset_dir() / ("fig" + std::string(id) + ".toml"); }

struct Preset {
  std::string id;
  std::string file_name;
  std::string hash;
  TomlContext ctx;
  toml::table root;

  const toml::node* get(std::string_view key) const { return root.get(key); }

  const toml::table& table(std::string_view key) const {
    const auto* n = root.get(key);
    if (!n) throw ParseError(ctx.source, 1, "missing [" + std::string(key) + "]");
    return as_table(ctx, *n, key);
  }
};

inline Preset load_preset(std::string_view id, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open preset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  Preset p{std::string(id), path.filename().string(), hex64(fnv1a64(text)),
           TomlContext{path.string(), path.parent_path().empty() ? "." : path.parent_path()}, {}};
  try {
    p.root = toml::parse(text, path.string());
  } catch (const toml::parse_error& e) {
    throw ParseError(path.string(), static_cast<long>(e.source().begin.line), std::string(e.description()));
  }
  const auto* fig = p.root.get("figure");
  if (!fig) throw ParseError(path.string(), 1, "preset needs figure = \"<id>\"");
  if (as_string(p.ctx, *fig, "figure") != id)
    fail_at(p.ctx, *fig, "preset is for figure " + as_string(p.ctx, *fig, "figure") + ", not " + std::string(id));
  return p;
}

// ---- shared preset pieces ----

struct NetworkSpec {
  std::string label;
  NetworkGraph graph{1};
  model::ProtocolConfig protocol;
  ProtocolExtras extras;
  std::vector<double> deltas;
};

inline model::ProtocolConfig shared_protocol(const Preset& p, ProtocolExtras* extras) {
  model::ProtocolConfig cfg;
  if (const auto* t = p.get("protocol")) cfg = parse_protocol_table(p.ctx, as_table(p.ctx, *t, "protocol"), cfg, extras);
  return cfg;
}

inline std::vector<NetworkSpec> preset_networks(const Preset& p) {
  ProtocolExtras base_extras;
  const model::ProtocolConfig base = shared_protocol(p, &base_extras);
  const auto* arr = p.get("network");
  if (!arr) throw ParseError(p.ctx.source, 1, "preset needs at least one [[network]]");
  std::vector<NetworkSpec> out;
  for (const auto& node : as_array(p.ctx, *arr, "network")) {
    const auto& t = as_table(p.ctx, node, "network");
    check_keys(p.ctx, t, {"label", "graph", "protocol", "deltas"});
    NetworkSpec n;
    n.label = t.contains("label") ? as_string(p.ctx, *t.get("label"), "label") : std::to_string(out.size());
    const auto* g = t.get("graph");
    if (!g) fail_at(p.ctx, node, "network needs a graph table");
    n.graph = parse_graph_table(p.ctx, as_table(p.ctx, *g, "graph"));
    n.extras = base_extras;
    n.protocol = base;
    if (const auto* pr = t.get("protocol")) n.protocol = parse_protocol_table(p.ctx, as_table(p.ctx, *pr, "protocol"), base, &n.extras);
    resolve_g_tilde(n.protocol, n.extras, n.graph.size());
    n.deltas = t.contains("deltas") ? as_reals(p.ctx, *t.get("deltas"), "deltas") : std::vector<double>{n.protocol.delta};
    out.push_back(std::move(n));
  }
  return out;
}

inline std::vector<model::Protocol> sweep_kinds(const Preset& p, model::Protocol fallback) {
  const auto* sweep = p.get("sweep");
  if (!sweep) return {fallback};
  const auto& t = as_table(p.ctx, *sweep, "sweep");
  const auto* kinds = t.get("kinds");
  if (!kinds) return {fallback};
  std::vector<model::Protocol> out;
  for (const auto& k : as_array(p.ctx, *kinds, "kinds")) {
    const auto s = as_string(p.ctx, k, "kinds");
    if (s == "RT") {
      out.push_back(model::Protocol::RT);
    } else if (s == "ADRT") {
      out.push_back(model::Protocol::ADRT);
    } else {
      fail_at(p.ctx, k, "kinds entries must be RT or ADRT");
    }
  }
  return out;
}

inline const toml::table* sweep_table(const Preset& p) {
  const auto* s = p.get("sweep");
  return s ? &as_table(p.ctx, *s, "sweep") : nullptr;
}

inline double sweep_real(const Preset& p, std::string_view key, std::optional<double> fallback = std::nullopt) {
  const auto* t = sweep_table(p);
  if (t && t->contains(key)) return as_real(p.ctx, *t->get(key), key);
  if (fallback) return *fallback;
  throw ParseError(p.ctx.source, 1, "[sweep] needs " + std::string(key));
}

inline int sweep_int(const Preset& p, std::string_view key, std::optional<int> fallback = std::nullopt) {
  const auto* t = sweep_table(p);
  if (t && t->contains(key)) return static_cast<int>(as_int(p.ctx, *t->get(key), key));
  if (fallback) return *fallback;
  throw ParseError(p.ctx.source, 1, "[sweep] needs " + std::string(key));
}

inline std::vector<double> sweep_reals(const Preset& p, std::string_view key) {
  const auto* t = sweep_table(p);
  if (!t || !t->contains(key)) throw ParseError(p.ctx.source, 1, "[sweep] needs " + std::string(key));
  return as_reals(p.ctx, *t->get(key), key);
}

// ---- bundle bookkeeping ----

struct Bundle {
  const Preset& preset;
  const RunContext& ctx;
  std::filesystem::path dir;
  CsvTable manifest{{"file", "description"}};

  CsvMeta meta() const { return CsvMeta{ctx.seed, preset.hash, {{"figure", preset.id}}}; }

  void emit(const std::string& file, const std::string& description, const CsvTable& table) {
    table.write(dir / file, meta());
    manifest.add(file, description);
  }

  void finish() {
    CsvMeta m = meta();
    m.extra.emplace_back("preset", preset.file_name);
    manifest.write(dir / "manifest.csv", m);
  }
};

// ---- 2c: closed-form polarizability vs N ----

inline void figure_2c(Bundle& b) {
  const int lo = sweep_int(b.preset, "n_min", 1);
  const int hi = sweep_int(b.preset, "n_max", 12);
  if (lo < 1 || hi > dicke::kMaxExactSpins || lo > hi) throw ScenarioError("2c: n range must lie in [1, 24]");
  CsvTable t({"N", "purity", "purity_exact", "entropy", "sqrt_n_exp_overlay"});
  for (int n = lo; n <= hi; ++n) {
    const auto exact = dicke::rt_steady_polarization_exact(n);
    t.add(n, exact.to_double(), exact.str(), dicke::rt_steady_entropy(n), std::sqrt(n) * std::exp(-0.5 * n));
  }
  b.emit("polarizability.csv", "steady RT purity of the star model and its large-N overlay", t);
}

// ---- curve figures: 3b, 3e, 4c, 5b, 5c ----

struct CurveJob {
  std::size_t network = 0;
  model::Protocol kind = model::Protocol::RT;
  double delta = 0.0;
};

inline void figure_curves(Bundle& b) {
  const auto nets = preset_networks(b.preset);
  const double fidelity_mark = sweep_real(b.preset, "fidelity_mark", 0.99);
  std::vector<CurveJob> jobs;
  for (std::size_t i = 0; i < nets.size(); ++i)
    for (auto kind : sweep_kinds(b.preset, nets[i].protocol.protocol))
      for (double d : nets[i].deltas) jobs.push_back({i, kind, d});

  auto runs = parallel_map<engine::RunResult>(jobs.size(), [&](std::size_t j) {
    const auto& net = nets[jobs[j].network];
    model::ProtocolConfig cfg = net.protocol;
    cfg.protocol = jobs[j].kind;
    cfg.delta = jobs[j].delta;
    return simulate_protocol(net.graph, cfg, qmat::DensityMatrix::maximally_mixed(net.graph.size()));
  });

  CsvTable curves({"network", "protocol", "delta", "cycle", "purity", "fgs_fidelity"});
  CsvTable summary({"network", "protocol", "delta", "cycles", "final_purity", "final_fgs_fidelity",
                    "cycles_to_fidelity_mark"});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& net = nets[jobs[j].network];
    const char* kind = model::to_string(jobs[j].kind);
    const auto& tr = runs[j].trace;
    const double p0 = std::ldexp(1.0, -net.graph.size());
    curves.add(net.label, kind, jobs[j].delta, 0, p0, p0);
    std::optional<int> mark;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      curves.add(net.label, kind, jobs[j].delta, k + 1, tr.purity[k], tr.fgs_fidelity[k]);
      if (!mark && tr.fgs_fidelity[k] > fidelity_mark) mark = static_cast<int>(k + 1);
    }
    summary.add(net.label, kind, jobs[j].delta, tr.size(), tr.purity.back(), tr.fgs_fidelity.back(),
                mark ? fmt(*mark) : std::string());
  }

  CsvTable networks({"network", "N", "edges", "ancilla", "K", "counts", "p_bound", "kernel_dim", "null_support",
                     "dark_kernel_dim", "verdict", "tau", "g_tilde"});
  for (const auto& net : nets) {
    const auto a = netgraph::analyze_symmetry(net.graph);
    std::vector<std::string> anc;
    for (const auto& t : net.graph.ancilla_targets()) anc.push_back(std::to_string(t.node) + ":" + fmt(t.g));
    networks.add(net.label, net.graph.size(), edge_list(net.graph), join(anc), a.orbits.k(), join(a.orbits.counts),
                 a.bound, a.spectrum.kernel_dim, join(a.spectrum.null_support_nodes), a.dark_dim,
                 netgraph::to_string(a.verdict), model::resolved_tau(net.protocol, net.graph), join(net.protocol.g_tilde));
  }
  b.emit("purity.csv", "system purity and ground-state fidelity per cycle", curves);
  b.emit("summary.csv", "final values and first cycle above the fidelity mark", summary);
  b.emit("networks.csv", "network structure, orbit and kernel data", networks);
}

// ---- 3d: purity vs N for open chains and complete graphs ----

inline void figure_3d(Bundle& b) {
  const int lo = sweep_int(b.preset, "n_min", 2);
  const int hi = sweep_int(b.preset, "n_max", 10);
  const int sim_max = sweep_int(b.preset, "sim_max", 5);
  if (lo < 2 || hi > netgraph::kMaxOrbitNodes || sim_max > kMaxSimulationNodes) throw ScenarioError("3d: bad N range");
  const auto& chain_t = b.preset.table("chain");
  const auto& complete_t = b.preset.table("complete");
  check_keys(b.preset.ctx, chain_t, {"coupling", "protocol"});
  check_keys(b.preset.ctx, complete_t, {"coupling", "protocol"});
  auto coupling = [&](const toml::table& t) { return t.contains("coupling") ? as_real(b.preset.ctx, *t.get("coupling"), "coupling") : 1.0; };
  auto protocol = [&](const toml::table& t, ProtocolExtras& ex) {
    const auto* pr = t.get("protocol");
    if (!pr) fail_at(b.preset.ctx, t, "needs a protocol table");
    return parse_protocol_table(b.preset.ctx, as_table(b.preset.ctx, *pr, "protocol"), {}, &ex);
  };
  ProtocolExtras chain_ex, complete_ex;
  const auto chain_cfg = protocol(chain_t, chain_ex);
  const auto complete_cfg = protocol(complete_t, complete_ex);

  auto chain_graph = [&](int n) {
    auto g = netgraph::path_graph(n);
    g.set_ancilla_target(0, coupling(chain_t));
    return g;
  };
  auto complete_graph = [&](int n) {
    auto g = netgraph::complete_graph(n);
    g.set_ancilla_target(0, coupling(complete_t));
    return g;
  };

  struct Row {
    double chain_bound, complete_bound;
    std::optional<double> chain_sim, complete_sim;
  };
  const auto rows = parallel_map<Row>(static_cast<std::size_t>(hi - lo + 1), [&](std::size_t i) {
    const int n = lo + static_cast<int>(i);
    Row r{netgraph::analyze_symmetry(chain_graph(n)).bound, netgraph::analyze_symmetry(complete_graph(n)).bound, {}, {}};
    if (n <= sim_max) {
      auto cc = chain_cfg;
      resolve_g_tilde(cc, chain_ex, n);
      r.chain_sim = simulate_protocol(chain_graph(n), cc, qmat::DensityMatrix::maximally_mixed(n)).trace.purity.back();
      auto kc = complete_cfg;
      resolve_g_tilde(kc, complete_ex, n);
      r.complete_sim = simulate_protocol(complete_graph(n), kc, qmat::DensityMatrix::maximally_mixed(n)).trace.purity.back();
    }
    return r;
  });
  CsvTable t({"N", "chain_bound", "complete_bound", "chain_purity", "complete_purity"});
  for (std::size_t i = 0; i < rows.size(); ++i)
    t.add(lo + static_cast<int>(i), rows[i].chain_bound, rows[i].complete_bound, rows[i].chain_sim, rows[i].complete_sim);
  b.emit("purity_vs_n.csv", "orbit bound and simulated final purity for open chains and complete graphs", t);
}

// ---- 6: N = 6 star under ADRT, system and ancilla purity ----

struct ProxyCheck {
  std::optional<int> arrival;  // first cycle of the first run of `window` cycles above 1 - tol
  double fidelity_at_arrival = 0.0;
  double final_fidelity = 0.0;
  bool holds = false;
};

// Once ancilla purity stays above 1 - tol for `window` cycles, the system fidelity
// must be within slack of its final value.
inline ProxyCheck ancilla_proxy(const std::vector<double>& ancilla_purity, const std::vector<double>& fidelity,
                                double tol = 1e-3, int window = 10, double slack = 1e-2) {
  ProxyCheck c;
  c.final_fidelity = fidelity.empty() ? 0.0 : fidelity.back();
  int run = 0;
  for (std::size_t k = 0; k < ancilla_purity.size(); ++k) {
    run = ancilla_purity[k] > 1.0 - tol ? run + 1 : 0;
    if (run == window) {
      c.arrival = static_cast<int>(k + 1);
      break;
    }
  }
  if (!c.arrival) return c;
  c.fidelity_at_arrival = fidelity[static_cast<std::size_t>(*c.arrival - 1)];
  c.holds = true;
  for (std::size_t k = static_cast<std::size_t>(*c.arrival - 1); k < fidelity.size(); ++k)
    if (fidelity[k] <= c.final_fidelity - slack) c.holds = false;
  return c;
}

inline void figure_6(Bundle& b) {
  const auto nets = preset_networks(b.preset);
  if (nets.size() != 1) throw ScenarioError("6: preset needs exactly one network");
  const auto& net = nets.front();
  const int first = sweep_int(b.preset, "fit_first", 100);
  const int last = sweep_int(b.preset, "fit_last", net.protocol.n_cycles);
  const double floor = sweep_real(b.preset, "fit_floor", 1e-300);
  const auto r = simulate_protocol(net.graph, net.protocol, qmat::DensityMatrix::maximally_mixed(net.graph.size()), true);
  const auto& tr = r.trace;
  CsvTable t({"cycle", "system_purity", "ancilla_purity", "fgs_fidelity", "epsilon"});
  for (std::size_t k = 0; k < tr.size(); ++k)
    t.add(k + 1, tr.purity[k], tr.ancilla_purity[k], tr.fgs_fidelity[k], tr.infidelity[k]);
  b.emit("purity.csv", "system and ancilla purity per cycle", t);

  const auto fit = dicke::fit_tail(tr.infidelity, first, last, floor);
  CsvTable f({"model", "first_cycle", "last_cycle", "slope", "intercept", "rss", "points"});
  f.add("exponential", fit.first_cycle, fit.last_cycle, fit.exponential.slope, fit.exponential.intercept,
        fit.exponential.rss, fit.exponential.points);
  f.add("power_law", fit.first_cycle, fit.last_cycle, fit.power_law.slope, fit.power_law.intercept, fit.power_law.rss,
        fit.power_law.points);
  b.emit("tail_fit.csv", "least-squares fits of ln epsilon against n and ln n", f);

  const auto proxy = ancilla_proxy(tr.ancilla_purity, tr.fgs_fidelity);
  CsvTable p({"arrival_cycle", "fidelity_at_arrival", "final_fidelity", "holds"});
  p.add(proxy.arrival ? fmt(*proxy.arrival) : std::string(), proxy.fidelity_at_arrival, proxy.final_fidelity,
        proxy.holds ? "true" : "false");
  b.emit("ancilla_proxy.csv", "ancilla purity as a probe of system arrival", p);
}

// ---- 7: population scatter with the nullity bound ----

inline void figure_7(Bundle& b) {
  const int hi = b.ctx.large ? sweep_int(b.preset, "n_max_large", 7) : sweep_int(b.preset, "n_max", kDefaultEnumerationCap);
  const int lo = sweep_int(b.preset, "n_min", 2);
  if (hi > (b.ctx.large ? netgraph::kMaxEnumerationNodes : kDefaultEnumerationCap))
    throw LimitExceeded("7: enumeration cap exceeded; pass --large for N = 7");
  std::vector<PopulationRow> all;
  for (int n = lo; n <= hi; ++n) {
    auto rows = population(n);
    all.insert(all.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  b.emit("population.csv", "orbit content and analytic nullity per connected graph class", population_table(all));
  CsvTable bound({"N", "lower_fraction", "upper_fraction"});
  for (int n = lo; n <= hi; ++n) bound.add(n, 0.0, nullity_upper_fraction(n));
  b.emit("bound.csv", "nullity fraction bounds per N", bound);
}

// ---- 9: cycles to a purity threshold vs on-site field ----

inline void figure_9(Bundle& b) {
  const auto nets = preset_networks(b.preset);
  if (nets.size() != 1) throw ScenarioError("9: preset needs exactly one network");
  const auto& net = nets.front();
  const auto fields = sweep_reals(b.preset, "delta_h");
  const int node = sweep_int(b.preset, "field_node");
  const double threshold = sweep_real(b.preset, "threshold", 0.9);
  if (node < 0 || node >= net.graph.size()) throw ScenarioError("9: field_node out of range");
  const auto hits = parallel_map<std::optional<int>>(fields.size(), [&](std::size_t i) {
    NetworkGraph g = net.graph;
    g.set_self_loop(node, fields[i]);
    model::ProtocolConfig cfg = net.protocol;
    cfg.steady_tol = 0.0;
    const auto r = simulate_protocol(g, cfg, qmat::DensityMatrix::maximally_mixed(g.size()));
    return engine::cycles_to_purity(r.trace, threshold);
  });
  CsvTable t({"delta_h", "cycles", "reached", "cap"});
  for (std::size_t i = 0; i < fields.size(); ++i)
    t.add(fields[i], hits[i] ? fmt(*hits[i]) : std::string(), hits[i] ? "true" : "false", net.protocol.n_cycles);
  b.emit("cycles_to_P90.csv", "cycles until purity reaches the threshold; empty when the cap is hit", t);
}

// ---- dispatch ----

inline std::filesystem::path cmd_reproduce(std::string_view id, const RunContext& ctx,
                                           const std::optional<std::filesystem::path>& preset_file = std::nullopt) {
  if (!is_figure_id(id)) throw ScenarioError("unknown figure id '" + std::string(id) + "'");
  const Preset p = load_preset(id, preset_file ? *preset_file : preset_path(id));
  Bundle b{p, ctx, ctx.out_dir / std::string(id)};
  if (id == "2c") {
    figure_2c(b);
  } else if (id == "3d") {
    figure_3d(b);
  } else if (id == "6") {
    figure_6(b);
  } else if (id == "7") {
    figure_7(b);
  } else if (id == "9") {
    figure_9(b);
  } else {
    figure_curves(b);
  }
  b.finish();
  say(ctx, "figure " + std::string(id) + " -> " + b.dir.string());
  return b.dir;
}

}  // namespace spinpurge::cli
