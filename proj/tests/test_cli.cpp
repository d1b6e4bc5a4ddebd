#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spinpurge/cli/commands.hpp"
#include "spinpurge/cli/reproduce.hpp"
#include "spinpurge/cli/scenario.hpp"

using namespace spinpurge;
using namespace spinpurge::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spinpurge_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + SPINPURGE_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

long parse_error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

double cell(const CsvDocument& d, std::size_t row, std::string_view col) { return std::stod(d.rows[row][d.column(col)]); }

RunContext quiet(const fs::path& out) {
  RunContext ctx;
  ctx.out_dir = out;
  return ctx;
}

const char* kPaw = R"(
[graph]
n = 4
edges = [[0, 1], [0, 2], [1, 2], [2, 3]]
ancilla = [[2, 2.0]]
)";

}  // namespace

// ---- csv ----

TEST(Csv, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(Csv, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 0.2109375, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(fmt(v)), v);
  EXPECT_EQ(fmt(0.0), "0");
  EXPECT_EQ(fmt(std::optional<double>{}), "");
}

TEST(Csv, MetadataPrecedesHeader) {
  CsvTable t({"a", "b"});
  t.add(1, "x,y");
  const std::string text = t.render(CsvMeta{7, "feed", {{"figure", "9"}}});
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# tool=" + tool_version());
  std::getline(in, line);
  EXPECT_EQ(line, "# seed=7");
  std::getline(in, line);
  EXPECT_EQ(line, "# scenario_hash=feed");
  std::getline(in, line);
  EXPECT_EQ(line, "# figure=9");
  std::getline(in, line);
  EXPECT_EQ(line, "a,b");
  std::getline(in, line);
  EXPECT_EQ(line, "1,\"x,y\"");
  EXPECT_THROW(t.add(1), InvalidArgument);
}

TEST(Csv, ReadBack) {
  const auto dir = scratch("readback");
  CsvTable t({"k", "v"});
  t.add("q\"uote", 2.5);
  t.write(dir / "t.csv", CsvMeta{1, "h", {}});
  const auto d = read_csv(dir / "t.csv");
  ASSERT_EQ(d.rows.size(), 1u);
  EXPECT_EQ(d.rows[0][0], "q\"uote");
  EXPECT_EQ(cell(d, 0, "v"), 2.5);
  EXPECT_EQ(d.meta[1].second, "1");
}

// ---- scenario parsing ----

TEST(Scenario, InlineGraphAndDefaults) {
  const auto s = parse_scenario(kPaw);
  EXPECT_EQ(s.graph.size(), 4);
  EXPECT_EQ(s.graph.edge(2, 3), 1.0);
  EXPECT_EQ(s.graph.ancilla_coupling(2), 2.0);
  EXPECT_EQ(s.protocol.protocol, model::Protocol::RT);
  EXPECT_TRUE(s.wants(Analysis::Orbits));
  EXPECT_TRUE(s.wants(Analysis::Simulate));
  EXPECT_FALSE(s.wants(Analysis::NullityNumeric));
  EXPECT_EQ(s.hash, hex64(fnv1a64(kPaw)));
}

TEST(Scenario, ProtocolFields) {
  const auto s = parse_scenario(R"(
seed = 11
[graph]
n = 3
family = "path"
ancilla = [[0, 1.5]]
self_loops = [[2, 0.25]]
[protocol]
kind = "ADRT"
tau = 0.5
delta = 1.0
g_tilde_span = [0.1, 0.3]
resonant_fraction = 0.25
n_cycles = 12
steady_tol = 0
reset = { z = 0.1, x_re = 0.2 }
initial = "random"
[analyses]
simulate = true
orbits = false
[output]
dir = "somewhere"
)");
  EXPECT_EQ(*s.seed, 11u);
  EXPECT_EQ(s.graph.self_loop(2), 0.25);
  EXPECT_EQ(s.protocol.protocol, model::Protocol::ADRT);
  EXPECT_EQ(*s.protocol.tau, 0.5);
  ASSERT_EQ(s.protocol.g_tilde.size(), 3u);
  EXPECT_NEAR(s.protocol.g_tilde[1], 0.2, 1e-15);
  EXPECT_EQ(s.protocol.resonant_fraction, 0.25);
  EXPECT_EQ(s.protocol.n_cycles, 12);
  EXPECT_EQ(s.protocol.reset.z, 0.1);
  EXPECT_EQ(s.protocol.reset.x, qmat::Complex(0.2, 0.0));
  EXPECT_EQ(s.initial, InitialState::Random);
  EXPECT_EQ(s.analyses, std::set<Analysis>{Analysis::Simulate});
  EXPECT_EQ(*s.output, fs::path("somewhere"));
}

TEST(Scenario, GraphFileRelativeToScenario) {
  const auto dir = scratch("graphfile");
  put(dir / "g.graph", "N 3\nE 0 1 1\nE 1 2 0.5\nA 0 2\n");
  put(dir / "s.toml", "[graph]\nfile = \"g.graph\"\n");
  const auto s = load_scenario(dir / "s.toml");
  EXPECT_EQ(s.graph.edge(1, 2), 0.5);
  EXPECT_EQ(s.graph.ancilla_coupling(0), 2.0);
}

TEST(Scenario, GraphFileErrorsKeepTheirLine) {
  const auto dir = scratch("graphfile_bad");
  put(dir / "g.graph", "N 3\nE 0 1 1\nE 0 5 1\n");
  put(dir / "s.toml", "[graph]\nfile = \"g.graph\"\n");
  try {
    load_scenario(dir / "s.toml");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Scenario, FamiliesMatchFactories) {
  const auto s = parse_scenario("[graph]\nn = 6\nfamily = \"bipartite\"\nparts = [3, 3]\nancilla_all = 1.0\n");
  auto expect = netgraph::complete_bipartite(3, 3);
  for (int k = 0; k < 6; ++k) expect.set_ancilla_target(k, 1.0);
  EXPECT_EQ(s.graph, expect);
}

TEST(Scenario, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("[graph]\nn = 3\nbogus = 1\n"), 3);
  EXPECT_EQ(parse_error_line("[graph]\nn = 3\nedges = [[0, 7]]\n"), 3);
  EXPECT_EQ(parse_error_line("[graph]\nn = 3\nancilla = [[0, 1.0]]\n[protocol]\nkind = \"XY\"\n"), 5);
  EXPECT_EQ(parse_error_line("[graph]\nn = 3\n\n\nfamily = = 1\n"), 5);
  EXPECT_EQ(parse_error_line("[graph]\nn = 2\nancilla = [[0, 1.0]]\n[protocol]\ntau = -1\n"), 5);
  EXPECT_EQ(parse_error_line("[graph]\nn = 2\nancilla = [[0, 1.0]]\n[analyses]\nsimulate = true\nwhatever = true\n"), 6);
  EXPECT_EQ(parse_error_line("title = \"x\"\n"), 1);
}

TEST(Scenario, AdrtNeedsGTildeOnEveryNode) {
  EXPECT_THROW(parse_scenario("[graph]\nn = 3\nancilla = [[0, 1.0]]\n[protocol]\nkind = \"ADRT\"\ng_tilde = [0.1]\n"),
               ParseError);
}

TEST(Scenario, NoAncillaIsRejected) { EXPECT_THROW(parse_scenario("[graph]\nn = 3\nfamily = \"path\"\n"), ScenarioError); }

TEST(Scenario, BadResetIsRejected) {
  EXPECT_THROW(parse_scenario("[graph]\nn = 2\nancilla = [[0, 1.0]]\n[protocol]\nreset = { z = 0.1, x_re = 0.5 }\n"),
               ParseError);
}

TEST(Scenario, NumericNullityLimit) {
  EXPECT_THROW(parse_scenario("[graph]\nn = 6\nfamily = \"path\"\nancilla = [[0, 1.0]]\n[analyses]\nnullity-numeric = true\n"),
               LimitExceeded);
  EXPECT_NO_THROW(parse_scenario("[graph]\nn = 5\nfamily = \"path\"\nancilla = [[0, 1.0]]\n[analyses]\nnullity-numeric = true\n"));
}

TEST(Scenario, DickeCompareNeedsStar) {
  EXPECT_THROW(parse_scenario("[graph]\nn = 3\nfamily = \"path\"\nancilla_all = 1.0\n[analyses]\ndicke-compare = true\n"),
               ParseError);
  EXPECT_NO_THROW(parse_scenario("[graph]\nn = 3\nancilla_all = 1.0\n[analyses]\ndicke-compare = true\n"));
}

TEST(Scenario, ShippedScenariosLoad) {
  const fs::path dir = fs::path(SPINPURGE_PRESET_DIR).parent_path() / "scenarios";
  int count = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".toml") continue;
    EXPECT_NO_THROW(load_scenario(e.path())) << e.path();
    ++count;
  }
  EXPECT_GE(count, 5);
}

// ---- analyze ----

TEST(Analyze, TriangleWithTailIsAoBlocked) {
  const auto dir = scratch("analyze_paw");
  const auto r = cmd_analyze(parse_scenario(kPaw), quiet(dir));
  EXPECT_EQ(r.symmetry.verdict, netgraph::Verdict::AoBlocked);
  EXPECT_LT(r.symmetry.bound, 1.0);
  EXPECT_EQ(slurp(dir / "verdict.txt"), "AO-blocked\n");
  const auto orbits = read_csv(dir / "orbits.csv");
  ASSERT_EQ(orbits.rows.size(), 4u);
  EXPECT_EQ(orbits.rows[0][orbits.column("orbit_id")], orbits.rows[1][orbits.column("orbit_id")]);
  const auto sym = read_csv(dir / "symmetry.csv");
  EXPECT_EQ(cell(sym, 0, "K"), 3);
  EXPECT_EQ(cell(sym, 0, "p_bound"), 0.5);
  EXPECT_TRUE(fs::exists(dir / "spectrum.csv"));
  EXPECT_FALSE(fs::exists(dir / "numeric_nullity.csv"));
}

TEST(Analyze, OpenChainIsPolarizable) {
  const auto dir = scratch("analyze_chain");
  const auto s = parse_scenario("[graph]\nn = 5\nfamily = \"path\"\nancilla = [[0, 2.0]]\n[analyses]\norbits = true\n"
                                "nullity-analytic = true\nnullity-numeric = true\nspectrum = true\n");
  const auto r = cmd_analyze(s, quiet(dir));
  EXPECT_EQ(r.symmetry.verdict, netgraph::Verdict::Polarizable);
  EXPECT_EQ(r.symmetry.bound, 1.0);
  ASSERT_TRUE(r.numeric);
  EXPECT_EQ(r.numeric->nullity, 0u);
  const auto nn = read_csv(dir / "numeric_nullity.csv");
  EXPECT_EQ(nn.rows[0][nn.column("difference")], "0");
  EXPECT_EQ(nn.rows[0][nn.column("steady_state")], "unique");
}

TEST(Analyze, NullSupportAncillaIsSpsBlocked) {
  const auto dir = scratch("analyze_p5");
  const auto r = cmd_analyze(parse_scenario("[graph]\nn = 5\nfamily = \"path\"\nancilla = [[1, 2.0]]\n"), quiet(dir));
  EXPECT_EQ(r.symmetry.verdict, netgraph::Verdict::SpsBlocked);
  const auto sp = read_csv(dir / "spectrum.csv");
  std::vector<std::string> null_nodes;
  for (const auto& row : sp.rows)
    if (row[0] == "null_support") null_nodes.push_back(row[2]);
  EXPECT_EQ(null_nodes, (std::vector<std::string>{"1", "3"}));
}

// ---- simulate ----

TEST(Simulate, StarAdrtReachesHighPurity) {
  const auto dir = scratch("sim_star");
  const auto s = load_scenario(fs::path(SPINPURGE_PRESET_DIR).parent_path() / "scenarios" / "star5_adrt.toml");
  cmd_simulate(s, quiet(dir));
  const auto t = read_csv(dir / "trace.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"cycle", "purity", "entropy", "fgs_fidelity", "epsilon"}));
  EXPECT_EQ(t.rows.front()[0], "0");
  EXPECT_EQ(t.rows.back()[0], "steady");
  EXPECT_GT(cell(t, t.rows.size() - 1, "purity"), 0.99);
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    EXPECT_NEAR(cell(t, r, "epsilon"), 1.0 - cell(t, r, "fgs_fidelity"), 1e-15);
}

TEST(Simulate, CompleteGraphRtPlateausAtOrbitValue) {
  const auto dir = scratch("sim_k4");
  const auto s = parse_scenario("[graph]\nn = 4\nfamily = \"complete\"\nancilla = [[0, 2.0]]\n[protocol]\ntau = 1.0\n"
                                "n_cycles = 20000\nsteady_tol = 1e-11\n[analyses]\nsimulate = true\n");
  const auto r = cmd_simulate(s, quiet(dir));
  EXPECT_NEAR(r.trace.purity.back(), 0.375, 1e-6);
  EXPECT_LT(r.trace.purity.back(), 1.0);
}

TEST(Simulate, DickeCompareAgrees) {
  const auto dir = scratch("sim_dicke");
  const auto s = load_scenario(fs::path(SPINPURGE_PRESET_DIR).parent_path() / "scenarios" / "star4_dicke.toml");
  cmd_simulate(s, quiet(dir));
  const auto d = read_csv(dir / "dicke_compare.csv");
  ASSERT_EQ(d.rows.size(), static_cast<std::size_t>(s.protocol.n_cycles));
  for (std::size_t r = 0; r < d.rows.size(); ++r) EXPECT_LT(cell(d, r, "abs_difference"), 1e-9);
  EXPECT_NEAR(cell(d, d.rows.size() - 1, "recurrence_purity"), 0.2109375, 1e-9);
}

TEST(Simulate, RandomStartDependsOnSeedOnly) {
  const auto a = random_mixed_state(3, 5);
  const auto b = random_mixed_state(3, 5);
  const auto c = random_mixed_state(3, 6);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_GT((a.matrix() - c.matrix()).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_NEAR(a.matrix().trace().real(), 1.0, 1e-14);
}

// ---- enumerate ----

TEST(Enumerate, ThreeNodesGiveTwoClasses) {
  const auto dir = scratch("enum3");
  const auto rows = cmd_enumerate({3}, quiet(dir));
  EXPECT_EQ(rows.size(), 2u);
  EXPECT_EQ(read_csv(dir / "population.csv").rows.size(), 2u);
}

TEST(Enumerate, RowsRespectBoundsAndIdentityRowsHaveZeroNullity) {
  const auto dir = scratch("enum_all");
  cmd_enumerate(enumeration_sizes(std::nullopt, false), quiet(dir));
  const auto d = read_csv(dir / "population.csv");
  EXPECT_EQ(d.rows.size(), 1u + 2u + 6u + 21u + 112u);
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const double frac = cell(d, r, "nullity_fraction");
    EXPECT_GE(frac, 0.0);
    EXPECT_LE(frac, cell(d, r, "nullity_upper_fraction") + 1e-15);
    if (d.rows[r][d.column("I_G_normalized")] == "1") EXPECT_EQ(cell(d, r, "nullity"), 0.0);
  }
}

TEST(Enumerate, SizeCaps) {
  EXPECT_THROW(enumeration_sizes(7, false), LimitExceeded);
  EXPECT_EQ(enumeration_sizes(7, true), std::vector<int>{7});
  EXPECT_THROW(enumeration_sizes(1, false), ScenarioError);
  EXPECT_EQ(enumeration_sizes(std::nullopt, true).back(), 7);
}

// ---- reproduce ----

TEST(Reproduce, UnknownFigure) {
  EXPECT_THROW(cmd_reproduce("8", quiet(scratch("fig8"))), ScenarioError);
}

TEST(Reproduce, PresetMustNameItsFigure) {
  const auto dir = scratch("wrong_preset");
  EXPECT_THROW(cmd_reproduce("9", quiet(dir), preset_path("6")), ParseError);
}

TEST(Reproduce, ClosedFormBundle) {
  const auto dir = cmd_reproduce("2c", quiet(scratch("fig2c")));
  const auto d = read_csv(dir / "polarizability.csv");
  ASSERT_EQ(d.rows.size(), 12u);
  EXPECT_EQ(d.rows[3][d.column("purity_exact")], "27/128");
  EXPECT_EQ(cell(d, 3, "purity"), 0.2109375);
  EXPECT_NEAR(cell(d, 3, "sqrt_n_exp_overlay"), 2.0 * std::exp(-2.0), 1e-15);
}

TEST(Reproduce, ManifestListsEveryFile) {
  const auto root = scratch("manifests");
  for (const char* id : {"2c", "3e", "7", "9"}) {
    const auto dir = cmd_reproduce(id, quiet(root));
    const auto m = read_csv(dir / "manifest.csv");
    bool has_figure = false, has_preset = false;
    for (const auto& [k, v] : m.meta) {
      has_figure = has_figure || (k == "figure" && v == id);
      has_preset = has_preset || (k == "preset" && v == std::string("fig") + id + ".toml");
    }
    EXPECT_TRUE(has_figure && has_preset) << id;
    EXPECT_FALSE(m.rows.empty());
    for (const auto& row : m.rows) EXPECT_FALSE(read_csv(dir / row[0]).header.empty()) << row[0];
  }
}

TEST(Reproduce, FieldSweepIsMonotone) {
  const auto dir = cmd_reproduce("9", quiet(scratch("fig9")));
  const auto d = read_csv(dir / "cycles_to_P90.csv");
  ASSERT_EQ(d.rows.size(), 6u);
  EXPECT_EQ(d.rows[0][d.column("cycles")], "");
  EXPECT_EQ(d.rows[0][d.column("reached")], "false");
  for (std::size_t r = 2; r < d.rows.size(); ++r) EXPECT_LE(cell(d, r, "cycles"), cell(d, r - 1, "cycles"));
}

TEST(Reproduce, AncillaPurityProbesArrival) {
  const auto dir = cmd_reproduce("6", quiet(scratch("fig6")));
  const auto d = read_csv(dir / "purity.csv");
  std::vector<double> anc, fid;
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    anc.push_back(cell(d, r, "ancilla_purity"));
    fid.push_back(cell(d, r, "fgs_fidelity"));
  }
  int run = 0;
  std::optional<std::size_t> arrival;
  for (std::size_t k = 0; k < anc.size() && !arrival; ++k) {
    run = anc[k] > 1.0 - 1e-3 ? run + 1 : 0;
    if (run == 10) arrival = k;
  }
  ASSERT_TRUE(arrival);
  for (std::size_t k = *arrival; k < fid.size(); ++k) EXPECT_GT(fid[k], fid.back() - 1e-2) << "cycle " << k + 1;
  const auto p = read_csv(dir / "ancilla_proxy.csv");
  EXPECT_EQ(p.rows[0][p.column("holds")], "true");
  EXPECT_EQ(cell(p, 0, "arrival_cycle"), static_cast<double>(*arrival + 1));
  const auto f = read_csv(dir / "tail_fit.csv");
  EXPECT_EQ(f.rows.size(), 2u);
}

TEST(Reproduce, AncillaProxyDetectsLateDrift) {
  std::vector<double> anc(30, 1.0), fid(30, 0.995);
  fid.back() = 1.0;
  fid[20] = 0.5;
  EXPECT_FALSE(ancilla_proxy(anc, fid).holds);
  fid[20] = 0.995;
  EXPECT_TRUE(ancilla_proxy(anc, fid).holds);
  EXPECT_FALSE(ancilla_proxy(std::vector<double>(30, 0.5), fid).arrival);
}

// Non-polarizable networks of the RT figure purify under ADRT with distinct g_tilde.
TEST(Reproduce, AdrtLiftsEveryBlockedNetwork) {
  const auto rt = load_preset("3b", preset_path("3b"));
  const auto adrt = load_preset("5c", preset_path("5c"));
  ProtocolExtras ex;
  const auto cfg = shared_protocol(adrt, &ex);
  int blocked = 0;
  for (const auto& net : preset_networks(rt)) {
    if (netgraph::analyze_symmetry(net.graph).verdict == netgraph::Verdict::Polarizable) continue;
    ++blocked;
    auto c = cfg;
    c.protocol = model::Protocol::ADRT;
    ASSERT_TRUE(model::validate(c, net.graph).empty());
    const auto r = simulate_protocol(net.graph, c, qmat::DensityMatrix::maximally_mixed(net.graph.size()));
    bool reached = false;
    for (double f : r.trace.fgs_fidelity) reached = reached || f > 0.99;
    EXPECT_TRUE(reached) << net.label;
  }
  EXPECT_EQ(blocked, 3);
}

// ---- binary: exit codes and determinism ----

TEST(Binary, ExitCodes) {
  const auto dir = scratch("exit");
  put(dir / "bad.toml", "[graph]\nn = 3\nnope = 1\n");
  put(dir / "big.toml", "[graph]\nn = 6\nfamily = \"path\"\nancilla = [[0, 1.0]]\n[analyses]\nnullity-numeric = true\n");
  put(dir / "ok.toml", kPaw);
  const std::string out = " --out \"" + (dir / "o").string() + "\"";
  EXPECT_EQ(run_cli("analyze --scenario \"" + (dir / "ok.toml").string() + "\"" + out), 0);
  EXPECT_EQ(run_cli("analyze --scenario \"" + (dir / "bad.toml").string() + "\"" + out), 2);
  EXPECT_EQ(run_cli("analyze --scenario \"" + (dir / "missing.toml").string() + "\"" + out), 2);
  EXPECT_EQ(run_cli("analyze" + out), 2);
  EXPECT_EQ(run_cli("analyze --scenario \"" + (dir / "big.toml").string() + "\"" + out), 3);
  EXPECT_EQ(run_cli("enumerate --nodes 7" + out), 3);
  EXPECT_EQ(run_cli("reproduce 8" + out), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("--version"), 0);
}

TEST(Binary, OutputsAreByteIdentical) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const fs::path sc = fs::path(SPINPURGE_PRESET_DIR).parent_path() / "scenarios" / "random_start.toml";
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(run_cli("simulate --scenario \"" + sc.string() + "\" --out \"" + dir.string() + "\""), 0);
    ASSERT_EQ(run_cli("reproduce 9 --out \"" + dir.string() + "\""), 0);
  }
  ASSERT_EQ(run_cli("enumerate --nodes 6 --out \"" + a.string() + "\"", "SPINPURGE_THREADS=1"), 0);
  ASSERT_EQ(run_cli("enumerate --nodes 6 --out \"" + b.string() + "\"", "SPINPURGE_THREADS=4"), 0);
  for (const char* f : {"trace.csv", "9/cycles_to_P90.csv", "9/manifest.csv", "population.csv"}) {
    const auto x = slurp(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(b / f)) << f;
  }
  EXPECT_NE(slurp(a / "trace.csv").find("# seed=20240611"), std::string::npos);
}

TEST(Binary, SeedFlagOverridesScenarioSeed) {
  const auto a = scratch("seed_a");
  const auto b = scratch("seed_b");
  const fs::path sc = fs::path(SPINPURGE_PRESET_DIR).parent_path() / "scenarios" / "random_start.toml";
  ASSERT_EQ(run_cli("simulate --scenario \"" + sc.string() + "\" --out \"" + a.string() + "\" --seed 1"), 0);
  ASSERT_EQ(run_cli("simulate --scenario \"" + sc.string() + "\" --out \"" + b.string() + "\" --seed 2"), 0);
  EXPECT_NE(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
  EXPECT_NE(slurp(a / "trace.csv").find("# seed=1\n"), std::string::npos);
}
