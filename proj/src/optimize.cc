#include "strstab/optimize.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "strstab/errors.h"

namespace strstab {

Window NeighbourWindow(int n, int m, int upstream, int downstream) {
  return {std::max(1, n - upstream), std::min(m, n + downstream)};
}

std::vector<Window> NestedWindows(int n, int m, int upstream, int downstream) {
  const Window outer = NeighbourWindow(n, m, upstream, downstream);
  std::vector<Window> out;
  for (int i = outer.i; i <= n; ++i) {
    for (int j = n; j <= outer.j; ++j) out.push_back({i, j});
  }
  return out;
}

OptimizationProblem MakeProblem(const VehicleChain& chain, int av_index,
                                const ParamDistribution& population,
                                const ProblemOptions& options) {
  if (av_index < 1 || av_index > chain.size()) {
    throw std::invalid_argument(
        fmt::format("AV index {} not in 1..{}", av_index, chain.size()));
  }
  OptimizationProblem p;
  p.chain = chain;
  p.av_index = av_index;
  p.windows = options.nested_windows
                  ? NestedWindows(av_index, chain.size(), options.upstream,
                                  options.downstream)
                  : std::vector<Window>{NeighbourWindow(
                        av_index, chain.size(), options.upstream,
                        options.downstream)};
  p.theta_hat = chain.vehicles[av_index - 1].params;
  p.free = options.free;
  p.box = population.TruncationBox();
  if (options.t_upper > 0.0) p.box[Param::kT].hi = options.t_upper;
  p.alpha = options.alpha;
  for (Param q : kAllParams) {
    p.sigma[static_cast<int>(q)] = population[q].stddev;
  }
  p.metric = options.metric;
  p.fictitious = options.fictitious;
  p.io_gain_weight = options.io_gain_weight;
  return p;
}

void ValidateProblem(const OptimizationProblem& p) {
  const int m = p.chain.size();
  if (p.av_index < 1 || p.av_index > m) {
    throw std::invalid_argument(
        fmt::format("AV index {} not in 1..{}", p.av_index, m));
  }
  if (p.windows.empty()) throw std::invalid_argument("no window given");
  for (const Window& w : p.windows) {
    if (w.i < 1 || w.j > m || w.i > p.av_index || w.j < p.av_index) {
      throw std::invalid_argument(fmt::format(
          "window ({}, {}) must satisfy 1 <= i <= {} <= j <= {}", w.i, w.j,
          p.av_index, m));
    }
  }
  if (p.free.empty()) throw std::invalid_argument("no free parameter");
  for (std::size_t k = 0; k < p.free.size(); ++k) {
    for (std::size_t l = k + 1; l < p.free.size(); ++l) {
      if (p.free[k] == p.free[l]) {
        throw std::invalid_argument(
            fmt::format("free parameter {} repeated", Name(p.free[k])));
      }
    }
    const double s = p.sigma[static_cast<int>(p.free[k])];
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument(fmt::format(
          "sigma of free parameter {} must be positive", Name(p.free[k])));
    }
  }
  if (!(p.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (p.io_gain_weight < 0.0) {
    throw std::invalid_argument("io gain weight must be non-negative");
  }
  for (Param q : kAllParams) {
    const Interval& iv = p.box[q];
    if (!(iv.lo > 0.0) || iv.hi < iv.lo) {
      throw std::invalid_argument(
          fmt::format("invalid bounds for {}", Name(q)));
    }
  }
  if (!p.box.Contains(p.theta_hat)) {
    throw std::invalid_argument("reference parameters outside the box");
  }
}

OptimizationProblem WorstCaseAugment(const OptimizationProblem& problem,
                                     const IdmParams& wc_params, Side side) {
  OptimizationProblem out = problem;
  out.fictitious.push_back({wc_params, side});
  return out;
}

std::vector<LinearCoeffs> WindowCoefficients(const OptimizationProblem& p,
                                             const IdmParams& theta,
                                             const Window& w) {
  const double v_eq = p.chain.v_eq;
  std::vector<LinearCoeffs> out;
  for (const FictitiousVehicle& f : p.fictitious) {
    if (f.side == Side::kUpstream) out.push_back(Linearize(f.params, v_eq));
  }
  for (int k = w.i; k <= w.j; ++k) {
    const IdmParams& q =
        k == p.av_index ? theta : p.chain.vehicles[k - 1].params;
    out.push_back(Linearize(q, v_eq));
  }
  for (const FictitiousVehicle& f : p.fictitious) {
    if (f.side == Side::kDownstream) out.push_back(Linearize(f.params, v_eq));
  }
  return out;
}

double Penalty(const OptimizationProblem& p, const IdmParams& theta) {
  double sum = 0.0;
  for (Param q : p.free) {
    const double d = Get(theta, q) - Get(p.theta_hat, q);
    const double s = p.sigma[static_cast<int>(q)];
    sum += p.metric == PenaltyMetric::kInverseVariance ? d * d / (s * s)
                                                       : d * d / s;
  }
  return sum / static_cast<double>(p.free.size());
}

Evaluation Objective(const OptimizationProblem& p, const IdmParams& theta,
                     const HinfOptions& options) {
  if (!p.box.Contains(theta)) {
    throw std::invalid_argument("candidate parameters outside the box");
  }
  Evaluation e;
  e.penalty = Penalty(p, theta);
  try {
    for (const Window& w : p.windows) {
      const std::vector<LinearCoeffs> coeffs = WindowCoefficients(p, theta, w);
      const double g = HinfChain(coeffs, options).gamma;
      if (!std::isfinite(g)) return e;
      e.window_gains.push_back(g);
      if (p.io_gain_weight > 0.0) {
        const PeakGain io =
            HinfNorm(ChainRealization(coeffs, ChainInput::kDisturbance),
                     options);
        e.io_gain = std::max(e.io_gain, io.gamma);
      }
    }
  } catch (const NoEquilibriumError&) {
    return e;
  } catch (const NumericalError&) {
    return e;
  }
  // Every window has unit DC gain, so the supremum is at least 1.
  e.gamma = std::max(1.0, *std::max_element(e.window_gains.begin(),
                                            e.window_gains.end()));
  e.value = p.alpha * e.gamma + e.penalty + p.io_gain_weight * e.io_gain;
  e.feasible = true;
  return e;
}

namespace {

struct ChainOutcome {
  bool found = false;
  IdmParams best;
  Evaluation best_eval;
  SaTrace trace;
};

double Reflect(double x, const Interval& iv) {
  const double w = iv.Width();
  if (w <= 0.0) return iv.lo;
  // Fold onto [lo, lo + 2w) and mirror the upper half.
  double u = std::fmod(x - iv.lo, 2.0 * w);
  if (u < 0.0) u += 2.0 * w;
  if (u > w) u = 2.0 * w - u;
  return std::clamp(iv.lo + u, iv.lo, iv.hi);
}

ChainOutcome RunChain(const OptimizationProblem& p, const SaConfig& cfg,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ChainOutcome out;
  out.trace.best_so_far.reserve(cfg.budget + 1);
  const double inf = std::numeric_limits<double>::infinity();

  IdmParams current = p.theta_hat;
  Evaluation current_eval = Objective(p, current);
  bool have_current = current_eval.feasible;
  if (have_current) {
    out.found = true;
    out.best = current;
    out.best_eval = current_eval;
  } else {
    ++out.trace.infeasible;
  }
  out.trace.best_so_far.push_back(out.found ? out.best_eval.value : inf);

  double temperature = cfg.t0;
  for (int k = 0; k < cfg.budget; ++k) {
    if (k > 0 && k % cfg.period == 0) temperature *= cfg.cooling;
    IdmParams candidate = current;
    for (Param q : p.free) {
      const Interval& iv = p.box[q];
      const double step = cfg.step_fraction * iv.Width() * gauss(rng);
      Set(candidate, q, Reflect(Get(current, q) + step, iv));
    }
    // Always drawn so the stream does not depend on the outcome.
    const double u = unit(rng);
    const Evaluation eval = Objective(p, candidate);
    if (!eval.feasible) {
      ++out.trace.infeasible;
      ++out.trace.rejected;
    } else {
      bool accept = !have_current || eval.value <= current_eval.value;
      if (!accept && temperature > 0.0) {
        accept = u < std::exp(-(eval.value - current_eval.value) / temperature);
      }
      if (accept) {
        ++out.trace.accepted;
        current = candidate;
        current_eval = eval;
        have_current = true;
      } else {
        ++out.trace.rejected;
      }
      if (!out.found || eval.value < out.best_eval.value) {
        out.found = true;
        out.best = candidate;
        out.best_eval = eval;
      }
    }
    out.trace.best_so_far.push_back(out.found ? out.best_eval.value : inf);
  }
  return out;
}

}  // namespace

OptimizationResult OptimizeAv(const OptimizationProblem& problem,
                              const SaConfig& config, std::uint64_t seed) {
  if (config.budget < 1) throw std::invalid_argument("SA budget must be >= 1");
  if (config.chains < 1) throw std::invalid_argument("SA needs >= 1 chain");
  if (config.period < 1) throw std::invalid_argument("SA period must be >= 1");
  if (config.t0 < 0.0 || !(config.cooling > 0.0) || config.cooling > 1.0) {
    throw std::invalid_argument("invalid SA temperature schedule");
  }
  ValidateProblem(problem);

  std::vector<ChainOutcome> outcomes(config.chains);
  if (config.chains == 1) {
    outcomes[0] = RunChain(problem, config, seed);
  } else {
    std::vector<std::jthread> workers;
    for (int c = 0; c < config.chains; ++c) {
      workers.emplace_back([&, c] {
        outcomes[c] = RunChain(problem, config, DeriveSeed(seed, c));
      });
    }
  }

  int winner = -1;
  for (int c = 0; c < config.chains; ++c) {
    if (!outcomes[c].found) continue;
    if (winner < 0 ||
        outcomes[c].best_eval.value < outcomes[winner].best_eval.value) {
      winner = c;
    }
  }
  if (winner < 0) {
    throw OptimizationFailedError(fmt::format(
        "no feasible candidate for vehicle {} in {} proposals",
        problem.av_index, config.budget * config.chains));
  }
  ChainOutcome& best = outcomes[winner];
  OptimizationResult r;
  r.theta_star = best.best;
  r.evaluation = best.best_eval;
  r.gamma_star = best.best_eval.gamma;
  r.objective = best.best_eval.value;
  r.trace = std::move(best.trace);
  r.windows = problem.windows;
  return r;
}

}  // namespace strstab
