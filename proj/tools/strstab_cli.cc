// Command line front end: strstab <analyze|simulate|optimize|ring|sample>
//   --config FILE [--seed N] [--out DIR] [--threads N] [--dt S]
// optimize also takes --budget, --alpha, --window UP DOWN, --t-upper,
// --fictitious a,b,T,s0[,side] (repeatable) and --worst-case.

#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "strstab/commands.h"
#include "strstab/errors.h"

int main(int argc, char** argv) {
  CLI::App app{"String stability analysis, simulation and AV tuning for "
               "heterogeneous IDM traffic"};
  app.require_subcommand(1, 1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  double dt = 0.0;
  auto* config_opt =
      app.add_option("--config", config, "Scenario file (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");
  auto* out_opt = app.add_option("--out", out, "Override the output directory");
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker threads for experiments");
  auto* dt_opt = app.add_option("--dt", dt, "Override the integration step [s]");
  (void)config_opt;

  for (const char* name : {"analyze", "simulate", "optimize", "ring", "sample"}) {
    app.add_subcommand(name)->fallthrough();
  }
  CLI::App* optimize = app.get_subcommand("optimize");
  int budget = 0;
  double alpha = 0.0, t_upper = 0.0;
  std::pair<int, int> window;
  std::vector<std::string> fictitious;
  bool worst_case = false;
  auto* budget_opt =
      optimize->add_option("--budget", budget, "SA proposals per vehicle");
  auto* alpha_opt = optimize->add_option("--alpha", alpha, "Weight on gamma");
  auto* window_opt = optimize->add_option(
      "--window", window, "Vehicles upstream and downstream of the AV");
  auto* t_upper_opt =
      optimize->add_option("--t-upper", t_upper, "Upper bound on T [s]");
  optimize->add_option("--fictitious", fictitious,
                       "Fictitious vehicle a,b,T,s0[,upstream|downstream]");
  optimize->add_flag("--worst-case", worst_case,
                     "Add the worst-case vehicle (a=0.3, b=3, T=0.3) upstream");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : strstab::kExitConfig;
  }

  strstab::Overrides overrides;
  if (*seed_opt) overrides.seed = seed;
  if (*out_opt) overrides.out = out;
  if (*threads_opt) overrides.threads = threads;
  if (*dt_opt) overrides.dt = dt;
  if (*budget_opt) overrides.budget = budget;
  if (*alpha_opt) overrides.alpha = alpha;
  if (*window_opt) overrides.window = window;
  if (*t_upper_opt) overrides.t_upper = t_upper;
  try {
    for (const std::string& f : fictitious) {
      overrides.fictitious.push_back(strstab::ParseFictitious(f));
    }
  } catch (const strstab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return strstab::kExitConfig;
  }
  if (worst_case) {
    overrides.fictitious.push_back({strstab::kWorstCaseParams});
  }

  const std::string command = app.get_subcommands().front()->get_name();
  return strstab::RunCommand(command, config, overrides, std::cout, std::cerr);
}
