#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "strstab/config.h"

namespace strstab {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitComputation = 3,
  kExitCollision = 4,
};

// Command line values that take precedence over the scenario file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  std::optional<double> dt;

  // Optimization tuning; applied to the single problem or to every arm.
  std::optional<int> budget;
  std::optional<double> alpha;
  std::optional<std::pair<int, int>> window;  // (upstream, downstream)
  std::optional<double> t_upper;
  std::vector<FictitiousVehicle> fictitious;  // added to the configured ones
};

// Parses "a,b,T,s0[,upstream|downstream]"; throws ConfigError.
FictitiousVehicle ParseFictitious(const std::string& text);

struct CommandOutput {
  std::string summary;                        // also saved as <cmd>_summary.txt
  std::vector<std::filesystem::path> files;   // every file written
};

// Subcommands. Each is a pure function of (config, overrides): reruns write
// byte-identical files. Errors propagate as exceptions.
CommandOutput Analyze(const ScenarioConfig& cfg, const Overrides& o = {});
CommandOutput SimulateCommand(const ScenarioConfig& cfg,
                              const Overrides& o = {});
CommandOutput OptimizeCommand(const ScenarioConfig& cfg,
                              const Overrides& o = {});
CommandOutput RingCommand(const ScenarioConfig& cfg, const Overrides& o = {});
CommandOutput SampleCommand(const ScenarioConfig& cfg, const Overrides& o = {});

// Loads the config, runs the named subcommand, prints its summary to `out`
// and errors to `err`, and maps failures to exit codes: 2 for configuration
// and usage errors, 4 for a collision, 3 for any other computation failure.
int RunCommand(const std::string& command,
               const std::filesystem::path& config_path,
               const Overrides& overrides, std::ostream& out,
               std::ostream& err);

}  // namespace strstab
