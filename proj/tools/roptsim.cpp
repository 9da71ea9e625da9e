// roptsim: T-intersection merge experiment driver.
//
//   roptsim episode  — run one episode and print its outcome
//   roptsim sweep    — run the parameter-grid study and write CSV tables
//   roptsim check    — run the acceptance suite (sweep + oracle checks)
//   roptsim scenario — write the default scenario file
//
// Worker count for sweeps comes from --workers or the ROPTSIM_WORKERS
// environment variable (default: hardware concurrency, capped at 16).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "acceptance_suite.hpp"
#include "ropt/scenario_io.hpp"
#include "ropt/sim.hpp"
#include "ropt/sweep.hpp"

namespace {

using namespace ropt;

struct CommonArgs {
  std::string scenario_file;
  std::string planner = "ropt";
  std::optional<std::string> sweep_planner;
  std::optional<double> lambda;
  std::optional<double> politeness;
  std::optional<double> distance_weight;  // EUR/km
  std::uint64_t seed = 1;
  int runs = -1;  // -1: take the profile default
  std::string out_dir = "results";
  std::string profile = "desk";
  bool diagnostics = false;
  int workers = 0;  // 0: auto
};

Scenario load_or_default(const std::string& file) {
  if (file.empty()) return make_default_scenario();
  return load_scenario(file);
}

PlannerKind parse_planner(const std::string& name) {
  const auto kind = planner_from_name(name);
  if (!kind)
    throw CLI::ValidationError("--planner",
                               "unknown planner '" + name +
                                   "' (expected ropt, iidm, or predictive_iidm)");
  return *kind;
}

// The episode parameter is the politeness factor for the IDM variants and the
// distance weight for the risk planner; --p and --bt override the defaults.
double episode_param(PlannerKind kind, const CommonArgs& args) {
  if (kind == PlannerKind::Ropt) return args.distance_weight.value_or(1.0);
  return args.politeness.value_or(1.0);
}

void print_record(const EpisodeRecord& rec, bool diagnostics, std::ostream& os) {
  os << "planner=" << planner_name(rec.planner) << " lambda=" << format_double(rec.lambda)
     << " param=" << format_double(rec.param) << " seed=" << rec.seed << "\n";
  os << "status=" << status_name(rec.status) << " end_time=" << format_double(rec.end_time)
     << "s\n";
  if (rec.merged) {
    os << "merge_start=" << format_double(rec.merge_start_time)
       << "s merge_end=" << format_double(rec.merge_end_time) << "s\n";
  }
  os << "d_back_min=" << format_double(rec.d_back_min)
     << " d_front_min=" << format_double(rec.d_front_min) << " n_gap=" << rec.n_gap
     << " t_gap=" << format_double(rec.t_gap) << "\n";
  if (diagnostics) {
    os << "events:\n";
    for (const auto& e : rec.events) {
      os << "  t=" << format_double(e.time) << " " << event_name(e.kind)
         << " l=" << format_double(e.ego_longitudinal) << " v=" << format_double(e.ego_velocity)
         << " value=" << format_double(e.value) << "\n";
    }
  }
}

int cmd_episode(const CommonArgs& args) {
  const Scenario sc = load_or_default(args.scenario_file);
  const PlannerKind kind = parse_planner(args.planner);
  const EpisodeRecord rec =
      run_episode(sc, kind, args.lambda.value_or(3.0), episode_param(kind, args), args.seed);
  print_record(rec, args.diagnostics, std::cout);
  return rec.status == EpisodeStatus::PlannerError ? 1 : 0;
}

int cmd_sweep(const CommonArgs& args) {
  const Scenario sc = load_or_default(args.scenario_file);
  SweepSpec spec;
  spec.base_seed = args.seed;
  spec.runs_per_cell = args.runs > 0 ? args.runs : (args.profile == "paper" ? 200 : 50);
  if (args.sweep_planner) spec.planners = {parse_planner(*args.sweep_planner)};
  if (args.lambda) spec.lambdas = {*args.lambda};
  if (args.politeness) spec.politeness = {*args.politeness};
  if (args.distance_weight) spec.distance_weights = {*args.distance_weight};

  const auto start = std::chrono::steady_clock::now();
  const std::vector<EpisodeRecord> records = run_sweep(sc, spec, args.workers);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::vector<CellStats> cells = aggregate(records);

  const std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  const auto write = [&](const char* name, const auto& writer) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("sweep: cannot write " + (dir / name).string());
    writer(os);
  };
  write("episodes.csv", [&](std::ostream& os) { write_episode_csv(os, records); });
  write("cells.csv", [&](std::ostream& os) { write_cell_csv(os, cells); });
  write("risk_indicators.csv", [&](std::ostream& os) { write_risk_indicator_csv(os, cells); });
  write("utility_indicators.csv",
        [&](std::ostream& os) { write_utility_indicator_csv(os, cells); });

  std::cout << records.size() << " episodes in " << std::fixed << std::setprecision(1) << secs
            << "s -> " << args.out_dir << "\n";
  if (args.diagnostics) {
    for (const auto& c : cells) {
      std::cout << planner_name(c.planner) << " lambda=" << format_double(c.lambda)
                << " param=" << format_double(c.param) << " runs=" << c.runs
                << " merged=" << c.merged << " crash_rate=" << format_double(c.crash_rate)
                << " d_back_mean=" << format_double(c.d_back_min_mean)
                << " n_gap_mean=" << format_double(c.n_gap_mean)
                << " t_gap_mean=" << format_double(c.t_gap_mean) << "\n";
    }
  }
  return 0;
}

int cmd_check(const CommonArgs& args) {
  const int runs = args.runs > 0 ? args.runs : (args.profile == "paper" ? 200 : 50);
  const int workers = args.workers > 0 ? args.workers : default_worker_count();
  std::cout << "acceptance sweep: " << runs << " runs per cell, " << workers << " workers\n";
  return acceptance::run_all(runs, workers, std::cout) == 0 ? 0 : 1;
}

int cmd_scenario(const CommonArgs& args) {
  const Scenario sc = make_default_scenario();
  const std::string file =
      args.scenario_file.empty() ? "scenarios/t_intersection.json" : args.scenario_file;
  const std::filesystem::path path(file);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_scenario(sc, file);
  std::cout << "wrote " << file << "\n";
  return 0;
}

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool batch) {
  cmd->add_option("--scenario", args.scenario_file, "scenario JSON file (default: built-in)");
  cmd->add_option("--lambda", args.lambda, "mean spawn headway, s");
  cmd->add_option("--p", args.politeness, "politeness factor (IDM-family planners)");
  cmd->add_option("--bt", args.distance_weight, "distance benefit weight, EUR/km (risk planner)");
  cmd->add_option("--seed", args.seed, batch ? "base seed for the run grid" : "episode seed");
  cmd->add_flag("--diagnostics", args.diagnostics, "print per-event / per-cell detail");
  if (batch) {
    cmd->add_option("--runs", args.runs, "runs per cell (overrides --profile)");
    cmd->add_option("--profile", args.profile, "run-count profile")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--workers", args.workers, "worker threads (0 = auto, env ROPTSIM_WORKERS)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"T-intersection merge experiment driver"};
  app.require_subcommand(1);

  CommonArgs args;

  CLI::App* episode = app.add_subcommand("episode", "run a single episode");
  add_common_flags(episode, args, false);
  episode->add_option("--planner", args.planner, "ropt, iidm, or predictive_iidm");

  CLI::App* sweep = app.add_subcommand("sweep", "run the parameter grid and write CSV tables");
  add_common_flags(sweep, args, true);
  sweep->add_option("--planner", args.sweep_planner, "restrict the grid to one planner");
  sweep->add_option("--out", args.out_dir, "output directory for the CSV tables");

  CLI::App* check = app.add_subcommand("check", "run the acceptance suite");
  check->add_option("--runs", args.runs, "runs per cell (overrides --profile)");
  check->add_option("--profile", args.profile, "run-count profile")
      ->check(CLI::IsMember({"desk", "paper"}));
  check->add_option("--workers", args.workers, "worker threads (0 = auto)");

  CLI::App* scenario = app.add_subcommand("scenario", "write the default scenario file");
  scenario->add_option("--out", args.scenario_file,
                       "target path (default scenarios/t_intersection.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (episode->parsed()) return cmd_episode(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (check->parsed()) return cmd_check(args);
    if (scenario->parsed()) return cmd_scenario(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
