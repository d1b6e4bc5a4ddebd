#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "spinpurge/cli/commands.hpp"
#include "spinpurge/cli/reproduce.hpp"
#include "spinpurge/cli/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitScenario = 2;
constexpr int kExitLimit = 3;

struct Options {
  std::optional<std::string> scenario;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool large = false;
  std::optional<int> nodes;
  std::string figure = "all";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "Scenario TOML file");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Seed for random initial states");
  cmd->add_flag("--large", o.large, "Lift the default size caps");
}

spinpurge::cli::RunContext context(const Options& o, const std::optional<spinpurge::cli::Scenario>& s) {
  spinpurge::cli::RunContext ctx;
  if (o.out) {
    ctx.out_dir = *o.out;
  } else if (s && s->output) {
    ctx.out_dir = *s->output;
  }
  if (o.seed) {
    ctx.seed = *o.seed;
  } else if (s && s->seed) {
    ctx.seed = *s->seed;
  }
  ctx.large = o.large;
  ctx.log = &std::cout;
  return ctx;
}

spinpurge::cli::Scenario require_scenario(const Options& o) {
  if (!o.scenario) throw spinpurge::ScenarioError("--scenario FILE is required");
  return spinpurge::cli::load_scenario(*o.scenario);
}

int run(const std::string& command, const Options& o) {
  using namespace spinpurge::cli;
  if (command == "analyze") {
    const auto s = require_scenario(o);
    cmd_analyze(s, context(o, s));
  } else if (command == "simulate") {
    auto s = require_scenario(o);
    if (!s.wants(Analysis::Simulate) && !s.wants(Analysis::DickeCompare)) {
      s.analyses.insert(Analysis::Simulate);
      check_limits(s);
      s.warnings = spinpurge::model::validate(s.protocol, s.graph);
    }
    cmd_simulate(s, context(o, s));
  } else if (command == "enumerate") {
    std::optional<Scenario> s;
    if (o.scenario) s = load_scenario(*o.scenario);
    cmd_enumerate(enumeration_sizes(o.nodes, o.large), context(o, s), s ? s->hash : std::string());
  } else if (command == "reproduce") {
    const auto ctx = context(o, std::nullopt);
    std::optional<std::filesystem::path> preset;
    if (o.scenario) preset = *o.scenario;
    if (o.figure == "all") {
      if (preset) throw spinpurge::ScenarioError("--scenario needs a single figure id");
      for (const char* id : kFigureIds) cmd_reproduce(id, ctx);
    } else {
      cmd_reproduce(o.figure, ctx, preset);
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-network purification: symmetry analysis, cycle simulation, figure data"};
  app.set_version_flag("--version", spinpurge::cli::tool_version());
  app.require_subcommand(1);
  Options o;
  auto* analyze = app.add_subcommand("analyze", "Orbits, analytic and numeric nullity, spectrum, verdict");
  auto* simulate = app.add_subcommand("simulate", "Run purification cycles and write trace.csv");
  auto* enumerate = app.add_subcommand("enumerate", "Orbit and nullity data for every connected graph");
  auto* reproduce = app.add_subcommand("reproduce", "Write the CSV bundle for a figure");
  for (auto* c : {analyze, simulate, enumerate, reproduce}) add_common(c, o);
  enumerate->add_option("--nodes", o.nodes, "Only this N (default: every N up to the cap)");
  reproduce->add_option("figure", o.figure, "Figure id or 'all'")->check(CLI::IsMember(
      {"all", "2c", "3b", "3d", "3e", "4c", "5b", "5c", "6", "7", "9"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitScenario;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const spinpurge::LimitExceeded& e) {
    std::cerr << "limit: " << e.what() << '\n';
    return kExitLimit;
  } catch (const spinpurge::NumericalError& e) {
    std::cerr << "numerical: " << e.what() << '\n';
    return kExitLimit;
  } catch (const spinpurge::ScenarioError& e) {
    std::cerr << "scenario: " << e.what() << '\n';
    return kExitScenario;
  } catch (const spinpurge::InvalidArgument& e) {
    std::cerr << "scenario: " << e.what() << '\n';
    return kExitScenario;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
