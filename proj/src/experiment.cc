#include "strstab/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "strstab/errors.h"

namespace strstab {
namespace {

std::uint64_t StreamSeed(std::uint64_t seed, Stream s) {
  return DeriveSeed(seed, static_cast<std::uint64_t>(s));
}

template <typename Fn>
void ParallelFor(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) fn(k);
    });
  }
}

int AvCount(const ExperimentArm& arm, int vehicles) {
  const int k = arm.av_count
                    ? *arm.av_count
                    : static_cast<int>(std::lround(arm.fraction * vehicles));
  if (k < 0 || k > vehicles - 1) {
    throw std::invalid_argument(fmt::format(
        "arm '{}' asks for {} AVs; at most {} are allowed", arm.label, k,
        vehicles - 1));
  }
  return k;
}

VehicleChain SampleChain(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::vector<IdmParams> params = SampleParams(
      cfg.distribution, StreamSeed(seed, Stream::kParams), cfg.vehicles);
  return VehicleChain::FromParams(params,
                                  cfg.v_eq_ratio * cfg.distribution.v_max);
}

Disturbance MakeDisturbance(const ExperimentConfig& cfg, std::uint64_t seed) {
  PrbsDisturbance prbs = cfg.prbs;
  prbs.seed = StreamSeed(seed, Stream::kPrbs);
  return Disturbance{1, prbs};
}

void RunCell(const ExperimentConfig& cfg, const BaselineResult& baseline,
             CellResult& cell) {
  const ExperimentArm& arm = cfg.arms[cell.arm];
  const int k = AvCount(arm, cfg.vehicles);
  if (k == 0) {
    // Nothing to optimize: the run is the baseline itself.
    cell.profile = baseline.profile;
    cell.ok = true;
    return;
  }
  VehicleChain chain = SampleChain(cfg, cell.seed);
  std::vector<int> positions = AvOrder(cfg.vehicles,
                                       StreamSeed(cell.seed, Stream::kPositions));
  positions.resize(k);
  std::sort(positions.begin(), positions.end());

  ProblemOptions options = cfg.problem;
  options.fictitious = arm.fictitious;
  options.t_upper = arm.t_upper;
  const std::uint64_t sa_seed = StreamSeed(cell.seed, Stream::kAnnealing);
  for (int n : positions) {
    const OptimizationProblem problem =
        MakeProblem(chain, n, cfg.distribution, options);
    AvOutcome av;
    av.index = n;
    av.reference = problem.theta_hat;
    av.gamma_before = Objective(problem, problem.theta_hat).gamma;
    const OptimizationResult r =
        OptimizeAv(problem, cfg.sa, DeriveSeed(sa_seed, n));
    av.optimized = r.theta_star;
    av.gamma_after = r.gamma_star;
    chain.vehicles[n - 1].params = r.theta_star;
    chain.vehicles[n - 1].automated = true;
    cell.avs.push_back(av);
  }
  const Trajectory traj =
      Simulate(chain, MakeDisturbance(cfg, cell.seed), cfg.duration, cfg.dt);
  cell.profile = ComputeNormProfile(traj);
  cell.clamp_events = traj.clamp_events.size();
  cell.ok = true;
}

template <typename Result, typename Fn>
void Guarded(Result& result, Fn&& fn) {
  try {
    fn();
  } catch (const CollisionError& e) {
    result.ok = false;
    result.error = e.what();
    if constexpr (requires { result.collision; }) result.collision = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
}

}  // namespace

std::vector<ExperimentArm> FractionArms(const std::vector<double>& fractions) {
  std::vector<ExperimentArm> arms;
  for (double f : fractions) {
    ExperimentArm arm;
    arm.label = fmt::format("{:g}%", 100.0 * f);
    arm.fraction = f;
    arms.push_back(arm);
  }
  return arms;
}

std::vector<int> AvOrder(int vehicles, std::uint64_t seed) {
  std::vector<int> order(std::max(0, vehicles - 1));
  std::iota(order.begin(), order.end(), 2);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

ExperimentReport RunExperiment(const ExperimentConfig& cfg) {
  if (cfg.vehicles < 2) {
    throw std::invalid_argument("an experiment needs at least 2 vehicles");
  }
  if (cfg.seeds.empty()) throw std::invalid_argument("no seed given");
  if (cfg.arms.empty()) throw std::invalid_argument("no arm given");
  for (const ExperimentArm& arm : cfg.arms) AvCount(arm, cfg.vehicles);
  if (!(cfg.v_eq_ratio > 0.0) || cfg.v_eq_ratio >= 1.0) {
    throw std::invalid_argument("v_eq ratio must lie in (0, 1)");
  }

  ExperimentReport report;
  report.config = cfg;
  report.baselines.resize(cfg.seeds.size());
  ParallelFor(cfg.seeds.size(), cfg.threads, [&](std::size_t s) {
    BaselineResult& b = report.baselines[s];
    b.seed = cfg.seeds[s];
    Guarded(b, [&] {
      const Trajectory traj = Simulate(SampleChain(cfg, b.seed),
                                       MakeDisturbance(cfg, b.seed),
                                       cfg.duration, cfg.dt);
      b.profile = ComputeNormProfile(traj);
      b.ok = true;
    });
  });

  const std::size_t arms = cfg.arms.size();
  report.cells.resize(cfg.seeds.size() * arms);
  ParallelFor(report.cells.size(), cfg.threads, [&](std::size_t c) {
    CellResult& cell = report.cells[c];
    const std::size_t s = c / arms;
    cell.seed = cfg.seeds[s];
    cell.arm = static_cast<int>(c % arms);
    Guarded(cell, [&] { RunCell(cfg, report.baselines[s], cell); });
  });

  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    CellResult& cell = report.cells[c];
    const BaselineResult& base = report.baselines[c / arms];
    if (!cell.ok || !base.ok) continue;
    cell.relative_l2.resize(cell.profile.l2.size());
    for (std::size_t i = 0; i < cell.profile.l2.size(); ++i) {
      cell.relative_l2[i] =
          (cell.profile.l2[i] - base.profile.l2[i]) / base.profile.l2[i];
    }
  }
  return report;
}

double Median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

std::vector<ParamShift> ParameterShifts(const ExperimentReport& report) {
  std::vector<ParamShift> out;
  for (std::size_t a = 0; a < report.config.arms.size(); ++a) {
    for (Param q : kAllParams) {
      std::vector<double> ref, opt;
      for (const CellResult& cell : report.cells) {
        if (cell.arm != static_cast<int>(a) || !cell.ok) continue;
        for (const AvOutcome& av : cell.avs) {
          ref.push_back(Get(av.reference, q));
          opt.push_back(Get(av.optimized, q));
        }
      }
      if (ref.empty()) continue;
      ParamShift s;
      s.arm = static_cast<int>(a);
      s.param = q;
      s.count = ref.size();
      s.reference_median = Median(ref);
      s.optimized_median = Median(opt);
      s.reference_mean = std::accumulate(ref.begin(), ref.end(), 0.0) /
                         static_cast<double>(ref.size());
      s.optimized_mean = std::accumulate(opt.begin(), opt.end(), 0.0) /
                         static_cast<double>(opt.size());
      out.push_back(s);
    }
  }
  return out;
}

std::vector<ProfileStats> ProfileStatistics(const ExperimentReport& report) {
  std::vector<ProfileStats> out;
  const int m = report.config.vehicles;
  for (std::size_t a = 0; a < report.config.arms.size(); ++a) {
    ProfileStats st;
    st.arm = static_cast<int>(a);
    st.mean.assign(m, 0.0);
    st.stddev.assign(m, 0.0);
    st.rel_mean.assign(m, 0.0);
    st.rel_min.assign(m, std::numeric_limits<double>::infinity());
    st.rel_max.assign(m, -std::numeric_limits<double>::infinity());
    std::vector<const CellResult*> runs;
    for (const CellResult& cell : report.cells) {
      if (cell.arm == static_cast<int>(a) && cell.ok &&
          !cell.relative_l2.empty()) {
        runs.push_back(&cell);
      }
    }
    st.runs = runs.size();
    if (runs.empty()) {
      out.push_back(st);
      continue;
    }
    const double n = static_cast<double>(runs.size());
    for (int i = 0; i < m; ++i) {
      double sum = 0.0, sum_rel = 0.0;
      for (const CellResult* c : runs) {
        sum += c->profile.l2[i];
        sum_rel += c->relative_l2[i];
        st.rel_min[i] = std::min(st.rel_min[i], c->relative_l2[i]);
        st.rel_max[i] = std::max(st.rel_max[i], c->relative_l2[i]);
      }
      st.mean[i] = sum / n;
      st.rel_mean[i] = sum_rel / n;
      double var = 0.0;
      for (const CellResult* c : runs) {
        const double d = c->profile.l2[i] - st.mean[i];
        var += d * d;
      }
      st.stddev[i] = runs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    }
    out.push_back(st);
  }
  return out;
}

}  // namespace strstab
