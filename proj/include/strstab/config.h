#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "strstab/experiment.h"
#include "strstab/model.h"
#include "strstab/optimize.h"
#include "strstab/sim.h"

namespace strstab {

inline constexpr int kSchemaVersion = 1;

// One vehicle string of a scenario. Exactly one source is used: explicit
// parameters, a homogeneous string, a sample from the distribution, or raw
// linear coefficients (analysis and ring only).
struct ChainSpec {
  enum class Source { kExplicit, kHomogeneous, kSampled, kCoefficients };

  std::string label = "chain";
  Source source = Source::kExplicit;
  std::vector<IdmParams> params;
  IdmParams homogeneous;
  int count = 0;
  std::vector<LinearCoeffs> coefficients;
  double v_eq = 0.0;  // resolved from v_eq or v_eq_ratio * v_max
  std::vector<int> automated;  // 1-based indices, informational
};

// Grid of S over (a, T) with the other parameters fixed.
struct ContourSpec {
  Interval a{0.3, 3.0};
  Interval T{0.3, 3.0};
  double step = 0.05;
  IdmParams base;
  double v_eq = 11.0;
};

struct AnalyzeSpec {
  std::vector<std::pair<int, int>> pairs;  // (l, n); empty = consecutive
  std::optional<ContourSpec> contour;
};

struct SimulateSpec {
  double duration = kDefaultDuration;
  double dt = kDefaultDt;
  Disturbance disturbance;
  std::vector<double> amplitudes;  // step amplitudes swept on the disturbance
  int trajectory_stride = 10;      // 0 disables the trajectory file
  bool linear = false;
};

struct OptimizeSpec {
  enum class Mode { kSingle, kExperiment };

  Mode mode = Mode::kSingle;
  int av_index = 2;
  ProblemOptions problem;
  SaConfig sa;
  ExperimentConfig experiment;  // used by kExperiment
};

struct RingSpec {
  double tolerance = 1e-9;
};

struct SampleSpec {
  int count = 100;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  ParamDistribution distribution = ParamDistribution::Ngsim();
  std::vector<ChainSpec> chains;
  std::optional<AnalyzeSpec> analyze;
  std::optional<SimulateSpec> simulate;
  std::optional<OptimizeSpec> optimize;
  std::optional<RingSpec> ring;
  std::optional<SampleSpec> sample;
};

// Parses and validates a scenario. Unknown keys, wrong types, missing
// sections and inconsistent values raise ConfigError naming the JSON path.
// A seed override replaces the file's seed before anything derived from it.
ScenarioConfig ParseConfig(const std::string& text,
                           std::optional<std::uint64_t> seed = {});
ScenarioConfig LoadConfig(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed = {});

// Builds the vehicle string of a spec; sampled strings draw from
// `distribution` with a stream of `seed`. Throws ConfigError for a
// coefficient-only spec.
VehicleChain BuildChain(const ChainSpec& spec,
                        const ParamDistribution& distribution,
                        std::uint64_t seed);

// Linear coefficients of a spec (direct for coefficient-only specs).
std::vector<LinearCoeffs> ChainCoefficients(
    const ChainSpec& spec, const ParamDistribution& distribution,
    std::uint64_t seed);

}  // namespace strstab
