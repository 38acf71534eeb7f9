#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strstab/model.h"
#include "strstab/optimize.h"
#include "strstab/sim.h"

namespace strstab {

// One configuration of the optimization strategy, run on every seed.
struct ExperimentArm {
  std::string label;
  double fraction = 0.0;            // AV count = round(fraction * m)
  std::optional<int> av_count;      // overrides fraction when set
  std::vector<FictitiousVehicle> fictitious;
  double t_upper = 0.0;             // > 0 overrides the upper bound on T
};

struct ExperimentConfig {
  int vehicles = 30;
  ParamDistribution distribution = ParamDistribution::Ngsim();
  double v_eq_ratio = 1.0 / 3.0;  // v_eq = ratio * v_max
  std::vector<std::uint64_t> seeds;
  std::vector<ExperimentArm> arms;
  PrbsDisturbance prbs;           // seed is replaced per experiment seed
  double duration = kDefaultDuration;
  double dt = kDefaultDt;
  SaConfig sa;
  ProblemOptions problem;         // fictitious and t_upper come from the arm
  int threads = 1;
};

// Arms labelled by percentage for each fraction, e.g. "30%".
std::vector<ExperimentArm> FractionArms(const std::vector<double>& fractions);

struct AvOutcome {
  int index = 0;  // 1-based
  IdmParams reference;
  IdmParams optimized;
  double gamma_before = 1.0;
  double gamma_after = 1.0;
};

struct CellResult {
  std::uint64_t seed = 0;
  int arm = 0;
  bool ok = false;
  std::string error;
  bool collision = false;
  std::vector<AvOutcome> avs;  // in index order
  NormProfile profile;
  std::vector<double> relative_l2;  // (L2 - L2_baseline) / L2_baseline
  std::size_t clamp_events = 0;
};

// Per-seed run without any AV, shared by every arm.
struct BaselineResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  NormProfile profile;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<BaselineResult> baselines;  // one per seed
  std::vector<CellResult> cells;          // seed-major, then arm

  const CellResult& Cell(std::size_t seed_index, std::size_t arm) const {
    return cells[seed_index * config.arms.size() + arm];
  }
};

// Random streams derived from an experiment seed.
enum class Stream : std::uint64_t {
  kParams = 1,
  kPrbs = 2,
  kPositions = 3,
  kAnnealing = 4,
};

// AV candidates 2..m in a seeded random order; an arm with k AVs uses the
// first k, so arms of one seed are nested.
std::vector<int> AvOrder(int vehicles, std::uint64_t seed);

// Runs baselines and seed x arm cells, concurrently over `threads`. Errors
// of one cell are recorded in it and do not stop the others. Throws
// std::invalid_argument for an invalid configuration.
ExperimentReport RunExperiment(const ExperimentConfig& config);

// Median of each parameter over every AV of an arm: reference vs optimized.
struct ParamShift {
  int arm = 0;
  Param param = Param::kA;
  std::size_t count = 0;
  double reference_median = 0.0;
  double optimized_median = 0.0;
  double reference_mean = 0.0;
  double optimized_mean = 0.0;
};

std::vector<ParamShift> ParameterShifts(const ExperimentReport& report);

// Mean and standard deviation across successful seeds, per vehicle.
struct ProfileStats {
  int arm = 0;
  std::size_t runs = 0;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> rel_mean;
  std::vector<double> rel_min;
  std::vector<double> rel_max;
};

std::vector<ProfileStats> ProfileStatistics(const ExperimentReport& report);

double Median(std::vector<double> values);

}  // namespace strstab
