#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "strstab/linear.h"
#include "strstab/model.h"

namespace strstab {

// Vehicles i..j (1-based, inclusive) whose product of speed transfer
// functions Gamma_i ... Gamma_j is bounded by gamma.
struct Window {
  int i = 1;
  int j = 1;

  bool operator==(const Window&) const = default;
};

enum class Side { kUpstream, kDownstream };

// Artificial vehicle whose Gamma joins the product of every window.
struct FictitiousVehicle {
  IdmParams params;
  Side side = Side::kUpstream;
};

// Strongly unstable driver used to make the optimizer more conservative.
inline constexpr IdmParams kWorstCaseParams = {.a = 0.3, .b = 3.0, .T = 0.3};

// kInverseVariance: Sigma^-1 = diag(1 / sigma^2), a Mahalanobis distance.
// kInverseStddev: Sigma^-1 = diag(1 / sigma).
enum class PenaltyMetric { kInverseVariance, kInverseStddev };

struct OptimizationProblem {
  VehicleChain chain;
  int av_index = 1;                 // 1-based
  std::vector<Window> windows;      // each with i <= av_index <= j
  IdmParams theta_hat;              // reference (human) parameters
  std::vector<Param> free = {Param::kA, Param::kB, Param::kT};
  ParamBox box;
  double alpha = 1e3;
  std::array<double, 4> sigma = {}; // population std devs, indexed by Param
  PenaltyMetric metric = PenaltyMetric::kInverseVariance;
  std::vector<FictitiousVehicle> fictitious;
  // Optional weight on the disturbance-to-speed gain of each window, the
  // input being the acceleration disturbance of vehicle i. Off by default.
  double io_gain_weight = 0.0;
};

// The window (n - upstream, n + downstream) clipped to the chain.
Window NeighbourWindow(int n, int m, int upstream = 1, int downstream = 2);
// Every (i, j) with n - upstream <= i <= n <= j <= n + downstream, clipped.
std::vector<Window> NestedWindows(int n, int m, int upstream = 1,
                                  int downstream = 2);

struct ProblemOptions {
  std::vector<Param> free = {Param::kA, Param::kB, Param::kT};
  double alpha = 1e3;
  int upstream = 1;
  int downstream = 2;
  bool nested_windows = false;
  double t_upper = 0.0;  // > 0 overrides the upper bound on T
  PenaltyMetric metric = PenaltyMetric::kInverseVariance;
  std::vector<FictitiousVehicle> fictitious;
  double io_gain_weight = 0.0;
};

// Problem for vehicle av_index of the chain: the reference parameters are
// its current ones, Sigma and the box come from the population.
OptimizationProblem MakeProblem(const VehicleChain& chain, int av_index,
                                const ParamDistribution& population,
                                const ProblemOptions& options = {});

// Throws std::invalid_argument on an inconsistent problem: index or window
// outside the chain, window not containing the AV, empty or repeated free
// set, non-positive alpha or sigma on a free parameter, theta_hat outside
// the box.
void ValidateProblem(const OptimizationProblem& problem);

// Copy of the problem with one more fictitious vehicle.
OptimizationProblem WorstCaseAugment(const OptimizationProblem& problem,
                                     const IdmParams& wc_params,
                                     Side side = Side::kUpstream);

// Coefficient list of one window with theta in place of the AV, fictitious
// vehicles prepended (upstream) or appended (downstream).
std::vector<LinearCoeffs> WindowCoefficients(const OptimizationProblem& problem,
                                             const IdmParams& theta,
                                             const Window& window);

struct Evaluation {
  bool feasible = false;
  double value = 0.0;
  double gamma = 1.0;    // max window gain, never below the unit DC gain
  double penalty = 0.0;  // (1/k) (theta - theta_hat)^T Sigma^-1 (...)
  double io_gain = 0.0;  // max disturbance-to-speed gain, when weighted
  std::vector<double> window_gains;
};

double Penalty(const OptimizationProblem& problem, const IdmParams& theta);

// alpha * gamma + penalty (+ io_gain_weight * io_gain). Candidates without
// an equilibrium at v_eq are reported infeasible. Throws
// std::invalid_argument when theta is outside the box.
Evaluation Objective(const OptimizationProblem& problem, const IdmParams& theta,
                     const HinfOptions& options = {});

struct SaConfig {
  int budget = 5000;          // proposals per chain
  double t0 = 1.0;
  double cooling = 0.97;
  int period = 50;            // proposals between cooling steps
  double step_fraction = 0.1; // proposal std dev as a fraction of box width
  int chains = 1;             // independent chains, run concurrently
};

struct SaTrace {
  int accepted = 0;
  int rejected = 0;
  int infeasible = 0;
  // Best objective after the start point and after each proposal of the
  // winning chain.
  std::vector<double> best_so_far;
};

struct OptimizationResult {
  IdmParams theta_star;
  double gamma_star = 1.0;
  double objective = 0.0;
  Evaluation evaluation;
  SaTrace trace;
  std::vector<Window> windows;
};

// Simulated annealing from theta_hat over the free parameters. Deterministic
// for a seed; chains are merged by best objective, ties to the lowest chain.
// Throws std::invalid_argument when budget < 1 and OptimizationFailedError
// when no evaluated candidate is feasible.
OptimizationResult OptimizeAv(const OptimizationProblem& problem,
                              const SaConfig& config, std::uint64_t seed);

}  // namespace strstab
