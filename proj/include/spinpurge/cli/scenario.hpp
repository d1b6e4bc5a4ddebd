#pragma once

// TOML scenario files: [graph], [protocol], [analyses], [output].

#include <toml.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spinpurge/cli/csv.hpp"
#include "spinpurge/errors.hpp"
#include "spinpurge/model.hpp"
#include "spinpurge/netgraph.hpp"

namespace spinpurge::cli {

using netgraph::NetworkGraph;

inline constexpr int kMaxSimulationNodes = qmat::kMaxQubits - 1;
inline constexpr int kMaxNumericNullityNodes = 5;

enum class Analysis { Orbits, NullityAnalytic, NullityNumeric, Spectrum, Simulate, DickeCompare };

inline const char* to_string(Analysis a) {
  switch (a) {
    case Analysis::Orbits: return "orbits";
    case Analysis::NullityAnalytic: return "nullity-analytic";
    case Analysis::NullityNumeric: return "nullity-numeric";
    case Analysis::Spectrum: return "spectrum";
    case Analysis::Simulate: return "simulate";
    case Analysis::DickeCompare: return "dicke-compare";
  }
  return "?";
}

inline std::optional<Analysis> analysis_from_string(std::string_view s) {
  for (Analysis a : {Analysis::Orbits, Analysis::NullityAnalytic, Analysis::NullityNumeric, Analysis::Spectrum,
                     Analysis::Simulate, Analysis::DickeCompare})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

enum class InitialState { MaximallyMixed, Random };

struct Scenario {
  std::string source = "<scenario>";
  std::string hash;  // FNV-1a of the file text
  std::optional<std::uint64_t> seed;
  std::string title;
  NetworkGraph graph{1};
  model::ProtocolConfig protocol;
  InitialState initial = InitialState::MaximallyMixed;
  std::set<Analysis> analyses;
  std::optional<std::filesystem::path> output;
  std::vector<std::string> warnings;

  bool wants(Analysis a) const { return analyses.count(a) > 0; }
};

// ---- TOML helpers shared with preset loading ----

struct TomlContext {
  std::string source;
  std::filesystem::path base_dir;
};

[[noreturn]] inline void fail_at(const TomlContext& ctx, const toml::node& node, const std::string& msg) {
  throw ParseError(ctx.source, static_cast<long>(node.source().begin.line), msg);
}

inline void check_keys(const TomlContext& ctx, const toml::table& t, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : t) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key.str() == a;
    if (!ok) fail_at(ctx, node, "unknown key '" + std::string(key.str()) + "'");
  }
}

inline double as_real(const TomlContext& ctx, const toml::node& n, std::string_view what) {
  if (auto v = n.value_exact<double>()) return *v;
  if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
  fail_at(ctx, n, std::string(what) + " must be a number");
}

inline std::int64_t as_int(const TomlContext& ctx, const toml::node& n, std::string_view what) {
  if (auto v = n.value_exact<std::int64_t>()) return *v;
  fail_at(ctx, n, std::string(what) + " must be an integer");
}

inline std::string as_string(const TomlContext& ctx, const toml::node& n, std::string_view what) {
  if (auto v = n.value_exact<std::string>()) return *v;
  fail_at(ctx, n, std::string(what) + " must be a string");
}

inline bool as_bool(const TomlContext& ctx, const toml::node& n, std::string_view what) {
  if (auto v = n.value_exact<bool>()) return *v;
  fail_at(ctx, n, std::string(what) + " must be true or false");
}

inline const toml::array& as_array(const TomlContext& ctx, const toml::node& n, std::string_view what) {
  if (const auto* a = n.as_array()) return *a;
  fail_at(ctx, n, std::string(what) + " must be an array");
}

inline const toml::table& as_table(const TomlContext& ctx, const toml::node& n, std::string_view what) {
  if (const auto* t = n.as_table()) return *t;
  fail_at(ctx, n, std::string(what) + " must be a table");
}

inline std::vector<double> as_reals(const TomlContext& ctx, const toml::node& n, std::string_view what) {
  std::vector<double> out;
  for (const auto& e : as_array(ctx, n, what)) out.push_back(as_real(ctx, e, what));
  return out;
}

inline int as_node(const TomlContext& ctx, const toml::node& n, int n_nodes, std::string_view what) {
  const auto v = as_int(ctx, n, what);
  if (v < 0 || v >= n_nodes) fail_at(ctx, n, std::string(what) + " index " + std::to_string(v) + " out of range");
  return static_cast<int>(v);
}

template <class F>
inline auto wrap_library_error(const TomlContext& ctx, const toml::node& n, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    fail_at(ctx, n, e.what());
  }
}

// ---- [graph] ----

inline NetworkGraph family_graph(const TomlContext& ctx, const toml::table& t, int n) {
  const auto* fam = t.get("family");
  if (!fam) return NetworkGraph(n);
  const std::string name = as_string(ctx, *fam, "family");
  const double w = t.contains("weight") ? as_real(ctx, *t.get("weight"), "weight") : 1.0;
  return wrap_library_error(ctx, *fam, [&] {
    if (name == "path") return netgraph::path_graph(n, w);
    if (name == "cycle") return netgraph::cycle_graph(n, w);
    if (name == "complete") return netgraph::complete_graph(n, w);
    if (name == "empty") return NetworkGraph(n);
    if (name == "bipartite") {
      const auto* parts = t.get("parts");
      if (!parts) fail_at(ctx, *fam, "bipartite family needs parts = [m, n]");
      const auto& a = as_array(ctx, *parts, "parts");
      if (a.size() != 2) fail_at(ctx, *parts, "parts needs two sizes");
      const int m = static_cast<int>(as_int(ctx, *a.get(0), "parts"));
      const int k = static_cast<int>(as_int(ctx, *a.get(1), "parts"));
      if (m + k != n) fail_at(ctx, *parts, "parts must add up to n");
      return netgraph::complete_bipartite(m, k, w);
    }
    fail_at(ctx, *fam, "unknown family '" + name + "'");
  });
}

inline NetworkGraph parse_graph_table(const TomlContext& ctx, const toml::table& t) {
  if (const auto* file = t.get("file")) {
    check_keys(ctx, t, {"file"});
    const std::filesystem::path p = ctx.base_dir / as_string(ctx, *file, "file");
    std::ifstream in(p);
    if (!in) fail_at(ctx, *file, "cannot open graph file " + p.string());
    return netgraph::parse_graph(in, p.string());
  }
  check_keys(ctx, t, {"n", "family", "weight", "parts", "edges", "self_loops", "ancilla", "ancilla_all"});
  const auto* nn = t.get("n");
  if (!nn) throw ParseError(ctx.source, static_cast<long>(t.source().begin.line), "[graph] needs n or file");
  const auto n64 = as_int(ctx, *nn, "n");
  if (n64 < 1 || n64 > 64) fail_at(ctx, *nn, "n must be in [1, 64]");
  const int n = static_cast<int>(n64);
  NetworkGraph g = family_graph(ctx, t, n);

  if (const auto* edges = t.get("edges")) {
    for (const auto& e : as_array(ctx, *edges, "edges")) {
      const auto& row = as_array(ctx, e, "edge");
      if (row.size() != 2 && row.size() != 3) fail_at(ctx, e, "edge needs [i, j] or [i, j, w]");
      const int i = as_node(ctx, *row.get(0), n, "edge");
      const int j = as_node(ctx, *row.get(1), n, "edge");
      const double w = row.size() == 3 ? as_real(ctx, *row.get(2), "edge weight") : 1.0;
      wrap_library_error(ctx, e, [&] { g.set_edge(i, j, w); });
    }
  }
  if (const auto* loops = t.get("self_loops")) {
    for (const auto& e : as_array(ctx, *loops, "self_loops")) {
      const auto& row = as_array(ctx, e, "self loop");
      if (row.size() != 2) fail_at(ctx, e, "self loop needs [i, h]");
      const int i = as_node(ctx, *row.get(0), n, "self loop");
      const double h = as_real(ctx, *row.get(1), "self loop");
      wrap_library_error(ctx, e, [&] { g.set_self_loop(i, h); });
    }
  }
  if (const auto* all = t.get("ancilla_all")) {
    const double gk = as_real(ctx, *all, "ancilla_all");
    for (int k = 0; k < n; ++k) wrap_library_error(ctx, *all, [&] { g.set_ancilla_target(k, gk); });
  }
  if (const auto* anc = t.get("ancilla")) {
    for (const auto& e : as_array(ctx, *anc, "ancilla")) {
      const auto& row = as_array(ctx, e, "ancilla target");
      if (row.size() != 2) fail_at(ctx, e, "ancilla target needs [k, g]");
      const int k = as_node(ctx, *row.get(0), n, "ancilla target");
      const double gk = as_real(ctx, *row.get(1), "ancilla coupling");
      wrap_library_error(ctx, e, [&] { g.set_ancilla_target(k, gk); });
    }
  }
  return g;
}

// ---- [protocol] ----

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return v;
}

struct ProtocolExtras {
  InitialState initial = InitialState::MaximallyMixed;
  std::optional<std::pair<double, double>> g_tilde_span;  // resolved against N later
};

// Keys present in t override base.
inline model::ProtocolConfig parse_protocol_table(const TomlContext& ctx, const toml::table& t,
                                                  model::ProtocolConfig cfg, ProtocolExtras* extras = nullptr) {
  check_keys(ctx, t, {"kind", "tau", "delta", "g_tilde", "g_tilde_span", "resonant_fraction", "n_cycles",
                      "steady_tol", "reset", "initial"});
  if (const auto* k = t.get("kind")) {
    const auto s = as_string(ctx, *k, "kind");
    if (s == "RT") {
      cfg.protocol = model::Protocol::RT;
    } else if (s == "ADRT") {
      cfg.protocol = model::Protocol::ADRT;
    } else {
      fail_at(ctx, *k, "kind must be RT or ADRT");
    }
  }
  if (const auto* v = t.get("tau")) {
    cfg.tau = as_real(ctx, *v, "tau");
    if (!(*cfg.tau > 0.0)) fail_at(ctx, *v, "tau must be positive");
  }
  if (const auto* v = t.get("delta")) cfg.delta = as_real(ctx, *v, "delta");
  if (const auto* v = t.get("g_tilde")) cfg.g_tilde = as_reals(ctx, *v, "g_tilde");
  if (const auto* v = t.get("g_tilde_span")) {
    const auto span = as_reals(ctx, *v, "g_tilde_span");
    if (span.size() != 2) fail_at(ctx, *v, "g_tilde_span needs [low, high]");
    if (t.contains("g_tilde")) fail_at(ctx, *v, "give either g_tilde or g_tilde_span");
    if (!extras) fail_at(ctx, *v, "g_tilde_span not allowed here");
    extras->g_tilde_span = std::pair{span[0], span[1]};
  }
  if (const auto* v = t.get("resonant_fraction")) {
    cfg.resonant_fraction = as_real(ctx, *v, "resonant_fraction");
    if (!(cfg.resonant_fraction > 0.0 && cfg.resonant_fraction < 1.0))
      fail_at(ctx, *v, "resonant_fraction must lie in (0, 1)");
  }
  if (const auto* v = t.get("n_cycles")) {
    const auto n = as_int(ctx, *v, "n_cycles");
    if (n < 1 || n > 100000000) fail_at(ctx, *v, "n_cycles must be in [1, 1e8]");
    cfg.n_cycles = static_cast<int>(n);
  }
  if (const auto* v = t.get("steady_tol")) cfg.steady_tol = as_real(ctx, *v, "steady_tol");
  if (const auto* v = t.get("reset")) {
    const auto& r = as_table(ctx, *v, "reset");
    check_keys(ctx, r, {"z", "x_re", "x_im"});
    const double z = r.contains("z") ? as_real(ctx, *r.get("z"), "z") : 0.0;
    const double xr = r.contains("x_re") ? as_real(ctx, *r.get("x_re"), "x_re") : 0.0;
    const double xi = r.contains("x_im") ? as_real(ctx, *r.get("x_im"), "x_im") : 0.0;
    cfg.reset = wrap_library_error(ctx, *v, [&] { return model::ResetSpec::parametric(z, {xr, xi}); });
  }
  if (const auto* v = t.get("initial")) {
    const auto s = as_string(ctx, *v, "initial");
    if (!extras) fail_at(ctx, *v, "initial not allowed here");
    if (s == "maximally-mixed") {
      extras->initial = InitialState::MaximallyMixed;
    } else if (s == "random") {
      extras->initial = InitialState::Random;
    } else {
      fail_at(ctx, *v, "initial must be maximally-mixed or random");
    }
  }
  return cfg;
}

inline void resolve_g_tilde(model::ProtocolConfig& cfg, const ProtocolExtras& extras, int n) {
  if (extras.g_tilde_span) cfg.g_tilde = linspace(extras.g_tilde_span->first, extras.g_tilde_span->second, n);
}

// Runs model::validate and turns its complaints into a located parse error.
inline std::vector<std::string> validate_protocol(const TomlContext& ctx, const toml::node& where,
                                                  const model::ProtocolConfig& cfg, const NetworkGraph& g) {
  return wrap_library_error(ctx, where, [&] { return model::validate(cfg, g); });
}

// ---- scenario ----

inline void check_limits(const Scenario& s) {
  const int n = s.graph.size();
  if (s.wants(Analysis::NullityNumeric) && n > kMaxNumericNullityNodes)
    throw LimitExceeded("nullity-numeric needs N <= " + std::to_string(kMaxNumericNullityNodes) + ", got " +
                        std::to_string(n));
  if ((s.wants(Analysis::Simulate) || s.wants(Analysis::DickeCompare)) && n > kMaxSimulationNodes)
    throw LimitExceeded("simulation needs N <= " + std::to_string(kMaxSimulationNodes) + ", got " + std::to_string(n));
  if (s.wants(Analysis::Orbits) && n > netgraph::kMaxOrbitNodes)
    throw LimitExceeded("orbit search needs N <= " + std::to_string(netgraph::kMaxOrbitNodes) + ", got " +
                        std::to_string(n));
}

// A star model: no edges, no fields, one common coupling on every node.
inline bool is_uniform_star(const NetworkGraph& g) {
  if (!g.edges().empty()) return false;
  const double g0 = g.ancilla_coupling(0);
  if (g0 == 0.0) return false;
  for (int k = 0; k < g.size(); ++k)
    if (g.self_loop(k) != 0.0 || g.ancilla_coupling(k) != g0) return false;
  return true;
}

inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>",
                               const std::filesystem::path& base_dir = ".") {
  const TomlContext ctx{source, base_dir};
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ParseError(source, static_cast<long>(e.source().begin.line), std::string(e.description()));
  }
  check_keys(ctx, root, {"title", "seed", "graph", "protocol", "analyses", "output"});

  Scenario s;
  s.source = source;
  s.hash = hex64(fnv1a64(text));
  if (const auto* v = root.get("title")) s.title = as_string(ctx, *v, "title");
  if (const auto* v = root.get("seed")) {
    const auto seed = as_int(ctx, *v, "seed");
    if (seed < 0) fail_at(ctx, *v, "seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  }

  const auto* graph = root.get("graph");
  if (!graph) throw ParseError(source, 1, "missing [graph] section");
  s.graph = parse_graph_table(ctx, as_table(ctx, *graph, "graph"));

  ProtocolExtras extras;
  const toml::node* protocol_node = root.get("protocol");
  if (protocol_node) s.protocol = parse_protocol_table(ctx, as_table(ctx, *protocol_node, "protocol"), {}, &extras);
  resolve_g_tilde(s.protocol, extras, s.graph.size());
  s.initial = extras.initial;

  if (const auto* v = root.get("analyses")) {
    const auto& t = as_table(ctx, *v, "analyses");
    for (const auto& [key, node] : t) {
      const auto a = analysis_from_string(key.str());
      if (!a) fail_at(ctx, node, "unknown analysis '" + std::string(key.str()) + "'");
      if (as_bool(ctx, node, key.str())) s.analyses.insert(*a);
    }
  } else {
    s.analyses = {Analysis::Orbits, Analysis::NullityAnalytic, Analysis::Spectrum, Analysis::Simulate};
  }

  if (const auto* v = root.get("output")) {
    const auto& t = as_table(ctx, *v, "output");
    check_keys(ctx, t, {"dir"});
    if (const auto* d = t.get("dir")) s.output = as_string(ctx, *d, "dir");
  }

  const toml::node& where = protocol_node ? *protocol_node : *graph;
  if (s.wants(Analysis::Simulate) || s.wants(Analysis::DickeCompare) || s.wants(Analysis::NullityNumeric))
    s.warnings = validate_protocol(ctx, where, s.protocol, s.graph);
  if (s.wants(Analysis::DickeCompare)) {
    if (!is_uniform_star(s.graph)) fail_at(ctx, *graph, "dicke-compare needs a star model: no edges, no fields, uniform g");
    if (s.protocol.protocol != model::Protocol::RT) fail_at(ctx, where, "dicke-compare needs the RT protocol");
    if (!s.protocol.reset.is_ideal()) fail_at(ctx, where, "dicke-compare needs an ideal reset");
    if (s.initial != InitialState::MaximallyMixed) fail_at(ctx, where, "dicke-compare needs a maximally mixed start");
  }
  if ((s.wants(Analysis::Orbits) || s.wants(Analysis::NullityAnalytic)) && !s.graph.has_ancilla())
    fail_at(ctx, *graph, "graph has no ancilla targets");
  check_limits(s);
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace spinpurge::cli
