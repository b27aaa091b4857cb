#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "flagcheck/errors.hpp"
#include "flagcheck/runner.hpp"

namespace {

using namespace flagcheck;

struct CliArgs {
  std::vector<std::string> measures;
  std::vector<std::string> properties;
  std::vector<long> dims;
  long trials = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> tols;
  long budget = -1;
  int nmax = -1;
  std::string out;
  std::string format;
  std::string config_path;
  std::string witness_path;
};

RunConfig build_config(const CliArgs& args, const std::string& command) {
  RunConfig config;
  config.command = command;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw ArgumentError("cannot open config file " + args.config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    config = parse_config_text(buf.str(), config);
    config.command = command;
  }
  if (!args.measures.empty()) config.measures = args.measures;
  if (!args.properties.empty()) config.properties = args.properties;
  if (!args.dims.empty()) {
    config.dims.clear();
    for (long d : args.dims) config.dims.push_back(d);
  }
  if (args.trials >= 0) config.trials = args.trials;
  if (args.seed_set) config.master_seed = args.seed;
  if (args.budget >= 0) config.budget = args.budget;
  if (args.nmax >= 0) config.nmax = args.nmax;
  if (!args.out.empty()) config.output_path = args.out;
  if (!args.format.empty()) config.format = args.format;
  if (!args.witness_path.empty()) config.witness_path = args.witness_path;
  for (const auto& spec : args.tols) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
      config.tolerances["*"] = std::stod(spec);
    } else {
      config.tolerances[spec.substr(0, colon)] = std::stod(spec.substr(colon + 1));
    }
  }
  return config;
}

void add_common_options(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--measure", args.measures, "measure ids (c_l1, c_rel_ent, c_tr, negativity, eof_2q)");
  cmd->add_option("--property", args.properties, "property names (flag_additivity, strong_mono, ...)");
  cmd->add_option("--dim", args.dims, "state dimension(s)");
  cmd->add_option("--trials", args.trials, "instances per (measure, property) cell");
  cmd->add_option("--seed", args.seed, "master seed")->each([&args](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--tol", args.tols, "verdict tolerance, either a number or measure:value");
  cmd->add_option("--budget", args.budget, "objective evaluation cap for searches");
  cmd->add_option("--nmax", args.nmax, "largest copy count for regularization");
  cmd->add_option("--out", args.out, "report output path (stdout when omitted)");
  cmd->add_option("--format", args.format, "report format: json or csv");
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--witness", args.witness_path, "replay a serialized witness (check only)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flagcheck: property checks, counterexample search and regularization probes "
               "for resource measures"};
  app.require_subcommand(1);

  CliArgs args;
  CLI::App* check = app.add_subcommand("check", "run a property sweep");
  CLI::App* search = app.add_subcommand("search", "maximize a property violation");
  CLI::App* regularize = app.add_subcommand("regularize", "per-copy rate table");
  for (CLI::App* cmd : {check, search, regularize}) add_common_options(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    Report report;
    if (app.got_subcommand(check)) {
      report = run_check(build_config(args, "check"));
    } else if (app.got_subcommand(search)) {
      report = run_search(build_config(args, "search"));
    } else {
      report = run_regularize(build_config(args, "regularize"));
    }
    report.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    emit_report(report, std::cout);
    if (report.search && !report.search->witness.empty() &&
        !report.config.output_path.empty()) {
      // Sidecar witness file for standalone replay via `check --witness`.
      std::ofstream witness_out(report.config.output_path + ".witness", std::ios::binary);
      witness_out << report.search->witness;
    }
    std::cerr << "wall_ms=" << report.wall_ms << "\n";
    for (const auto& [measure, by_property] : report.summaries()) {
      for (const auto& [prop, cell] : by_property) {
        std::cerr << measure << ' ' << prop << ": holds=" << cell.holds
                  << " violated=" << cell.violated << " inconclusive=" << cell.inconclusive
                  << "\n";
      }
    }
    if (report.search) {
      std::cerr << "search best_violation=" << report.search->best_violation
                << " evaluations=" << report.search->evaluations << "\n";
    }
    return exit_code_for(report);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
