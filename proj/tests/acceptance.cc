// Acceptance suite. Usage: strstab_acceptance <criterion 1-10 | all>.
// Prints one PASS/FAIL line per criterion plus the measured values and
// exits non-zero if any requested criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.h"
#include "strstab/config.h"
#include "strstab/experiment.h"
#include "strstab/linear.h"
#include "strstab/model.h"
#include "strstab/ring.h"
#include "strstab/sim.h"

namespace strstab {
namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  // Records one check; every check is reported whatever the outcome.
  void Check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(fmt::format("  [{}] {}", ok ? "ok" : "FAILED", what));
  }
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

IdmParams Driver(double a, double b, double T) {
  IdmParams p;
  p.a = a;
  p.b = b;
  p.T = T;
  return p;
}

ScenarioConfig Load(const std::string& name) {
  return LoadConfig(std::string(STRSTAB_CONFIG_DIR) + "/" + name + ".json");
}

// -- 1 ------------------------------------------------------------------------

Verdict GainReproduction() {
  Verdict v;
  const auto start = Clock::now();
  const LinearCoeffs c2{-0.075, 0.091, 0.55}, c3{-0.26, 0.10, 0.64};
  const double g2 = HinfChain(std::vector{c2}).gamma;
  const double g3 = HinfChain(std::vector{c3}).gamma;
  const double g23 = HinfChain(std::vector{c2, c3}).gamma;
  const double t = Seconds(start);
  v.Check(std::abs(g2 - 1.06) <= 0.01, fmt::format("|G2| = {:.6f}, want 1.06 +- 0.01", g2));
  v.Check(std::abs(g3 - 1.00) <= 0.01, fmt::format("|G3| = {:.6f}, want 1.00 +- 0.01", g3));
  v.Check(std::abs(g23 - 1.00) <= 0.01,
          fmt::format("|G2 G3| = {:.6f}, want 1.00 +- 0.01", g23));
  v.Check(t < 1.0, fmt::format("runtime {:.4f} s < 1 s", t));
  return v;
}

// -- 2 ------------------------------------------------------------------------

Verdict SCoefficients() {
  Verdict v;
  const auto start = Clock::now();
  const double v_eq = 33.0 / 2.0;
  const double s_mean = StringStabilityCoefficient(Linearize(IdmParams{}, v_eq));
  const double s_047 =
      StringStabilityCoefficient(Linearize(Driver(0.47, 1.1, 1.5), v_eq));
  const double s_155 =
      StringStabilityCoefficient(Linearize(Driver(1.55, 1.7, 0.8), v_eq));
  const double t = Seconds(start);
  v.Check(std::abs(s_mean + 0.063) <= 0.003,
          fmt::format("mean driver S = {:.6f}, want -0.063 +- 0.003", s_mean));
  v.Check(std::abs(s_047 + 0.018) <= 0.002,
          fmt::format("a=0.47 S = {:.6f}, want -0.018 +- 0.002", s_047));
  v.Check(std::abs(s_155 - 0.0038) <= 0.0008,
          fmt::format("a=1.55 b=1.7 T=0.8 S = {:.6f}, want 0.0038 +- 0.0008",
                      s_155));
  v.Check(t < 1.0, fmt::format("runtime {:.4f} s < 1 s", t));
  return v;
}

// -- 3 ------------------------------------------------------------------------

Verdict WeakStabilityInfeasible() {
  Verdict v;
  const auto start = Clock::now();
  const double v_eq = 33.0 / 3.0;
  std::vector<LinearCoeffs> cs;
  for (const auto& [a, T] : {std::pair{0.58, 1.76}, std::pair{0.35, 1.26},
                             std::pair{0.39, 1.43}}) {
    cs.push_back(Linearize(Driver(a, 1.1, T), v_eq));
  }
  double product_of_norms = 1.0;
  for (const auto& c : cs) product_of_norms *= HinfSecondOrder(c).gamma;
  const double chain_gain = HinfChain(cs).gamma;
  v.Check(std::abs(product_of_norms - 1.12) <= 0.02,
          fmt::format("product of norms = {:.6f}, want 1.12 +- 0.02",
                      product_of_norms));
  v.Check(std::abs(chain_gain - 1.12) <= 0.02,
          fmt::format("gain of the product = {:.6f}, want 1.12 +- 0.02",
                      chain_gain));

  double min_gain = std::numeric_limits<double>::infinity();
  double min_norms = min_gain;
  double arg_a = 0.0, arg_T = 0.0;
  int points = 0;
  for (int i = 0; i <= 54; ++i) {
    for (int j = 0; j <= 54; ++j) {
      const double a4 = 0.3 + 0.05 * i, T4 = 0.3 + 0.05 * j;
      std::vector<LinearCoeffs> four = cs;
      four.push_back(Linearize(Driver(a4, 1.1, T4), v_eq));
      const double g = HinfChain(four).gamma;
      if (g < min_gain) {
        min_gain = g;
        arg_a = a4;
        arg_T = T4;
      }
      min_norms =
          std::min(min_norms, product_of_norms * HinfSecondOrder(four[3]).gamma);
      ++points;
    }
  }
  const double t = Seconds(start);
  v.Check(min_gain > 1.0,
          fmt::format("min gain of the 4-vehicle product over {} grid points = "
                      "{:.6f} at (a4, T4) = ({:.2f}, {:.2f}), want > 1",
                      points, min_gain, arg_a, arg_T));
  v.Check(min_norms > 1.0,
          fmt::format("min 4-vehicle product of norms = {:.6f}, want > 1",
                      min_norms));
  v.Check(t < 300.0, fmt::format("runtime {:.3f} s < 300 s", t));
  return v;
}

// -- 4 ------------------------------------------------------------------------

Verdict LimitationWitness() {
  Verdict v;
  const double v_eq = 33.0 / 3.0;
  const LinearCoeffs prev = Linearize(Driver(0.5, 1.7, 0.8), v_eq);
  const LinearCoeffs n = Linearize(Driver(0.9, 0.9, 2.5), v_eq);
  const double gn = HinfChain(std::vector{n}).gamma;
  const double pair = HinfChain(std::vector{prev, n}).gamma;
  v.Check(std::abs(gn - 1.0) <= 0.01,
          fmt::format("|G_n| = {:.6f}, want 1.00 +- 0.01", gn));
  v.Check(pair > 1.0, fmt::format("|G_n G_n-1| = {:.6f}, want > 1", pair));
  return v;
}

// -- 5 ------------------------------------------------------------------------

Verdict RingWitness() {
  Verdict v;
  const LinearCoeffs c{-0.075, 0.091, 0.55};
  const std::vector<LinearCoeffs> cs(3, c);
  const RingSpectrum s = RingEigenvalues(RingMatrix(cs));
  std::size_t non_structural = 0;
  bool all_negative = true;
  for (const auto& l : s.eigenvalues) {
    if (std::abs(l) <= kStructuralZeroTol) continue;
    ++non_structural;
    all_negative = all_negative && l.real() < 0.0;
  }
  const double open = HinfChain(cs).gamma;
  v.Check(all_negative && non_structural == 5,
          fmt::format("{} non-structural eigenvalues, max Re = {:.6f} < 0",
                      non_structural, s.max_real_part));
  v.Check(open > 1.0, fmt::format("open-chain gain = {:.6f} > 1", open));
  return v;
}

// -- 6 ------------------------------------------------------------------------

LinearCoeffs RandomCoeffs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  const IdmParams p = oracle::RandomParams(rng);
  return Linearize(p, frac(rng) * p.v_max);
}

Verdict OracleEquivalences() {
  Verdict v;
  std::mt19937_64 rng(20240601);

  // H-infinity: Hamiltonian bisection and the certified evaluator against a
  // 10^6-point sweep.
  double worst_bisect = 0.0, worst_chain = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<LinearCoeffs> cs;
    for (int i = 0; i <= k % 4; ++i) cs.push_back(RandomCoeffs(rng));
    const double sweep = oracle::SweepHinf(cs, 1000000);
    double lo = 0.5, hi = 20.0;
    while (hi - lo > 1e-10 * hi) {
      const double mid = 0.5 * (lo + hi);
      (BoundedRealCheck(cs, mid) ? hi : lo) = mid;
    }
    worst_bisect = std::max(worst_bisect, std::abs(hi - sweep) / sweep);
    worst_chain =
        std::max(worst_chain, std::abs(HinfChain(cs).gamma - sweep) / sweep);
  }
  v.Check(worst_bisect <= 1e-6,
          fmt::format("Hamiltonian bisection vs sweep: max rel diff {:.3e} "
                      "over 100 sets",
                      worst_bisect));
  v.Check(worst_chain <= 1e-6,
          fmt::format("certified H-inf vs sweep: max rel diff {:.3e}",
                      worst_chain));

  // Linearization vs central finite differences.
  double worst_fd = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const IdmParams p = oracle::RandomParams(rng);
    const double v_eq =
        std::uniform_real_distribution<double>(0.05, 0.95)(rng) * p.v_max;
    const LinearCoeffs a = Linearize(p, v_eq);
    const LinearCoeffs b = oracle::FiniteDifferenceCoeffs(p, v_eq);
    worst_fd = std::max({worst_fd, std::abs(a.f1 - b.f1) / std::abs(b.f1),
                         std::abs(a.f2 - b.f2) / std::abs(b.f2),
                         std::abs(a.f3 - b.f3) / std::abs(b.f3)});
  }
  v.Check(worst_fd <= 1e-5,
          fmt::format("linearization vs finite differences: max rel diff "
                      "{:.3e} over 1000 samples",
                      worst_fd));

  // Homogeneous ring spectrum vs the closed-form quadratic roots.
  double worst_ring = 0.0;
  for (int m = 2; m <= 8; ++m) {
    for (int k = 0; k < 10; ++k) {
      const LinearCoeffs c = RandomCoeffs(rng);
      const RingSpectrum s = RingEigenvalues(RingMatrix(std::vector(m, c)));
      worst_ring = std::max(
          worst_ring,
          oracle::MatchDistance(s.eigenvalues, oracle::RingRootsCompanion(c, m)));
    }
  }
  v.Check(worst_ring <= 1e-8,
          fmt::format("ring spectrum vs quadratic roots (m <= 8): max distance "
                      "{:.3e}",
                      worst_ring));

  // MIMO closed-form singular value vs numeric SVD.
  double worst_mimo = 0.0;
  std::uniform_real_distribution<double> omega(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    const double w = omega(rng);
    const double want = oracle::MimoSigmaNumeric(c, w);
    worst_mimo = std::max(worst_mimo, std::abs(MimoSigmaMax(c, w) - want) / want);
  }
  v.Check(worst_mimo <= 1e-10,
          fmt::format("MIMO sigma_max vs SVD: max rel diff {:.3e} over 100 "
                      "pairs",
                      worst_mimo));
  return v;
}

// -- 7 ------------------------------------------------------------------------

// Some index k after which the L2 profile never decreases and ends higher.
bool GrowsFromSomeIndex(const std::vector<double>& l2, int* from) {
  int k = static_cast<int>(l2.size()) - 1;
  while (k > 0 && l2[k - 1] <= l2[k]) --k;
  *from = k + 1;
  return k < static_cast<int>(l2.size()) - 1 && l2.back() > l2[k];
}

Verdict SimulationQualitative() {
  Verdict v;
  const auto start = Clock::now();
  const ScenarioConfig fig3 = Load("fig3_stability");
  const SimulateSpec& sim3 = *fig3.simulate;
  for (const ChainSpec& spec : fig3.chains) {
    const VehicleChain chain = BuildChain(spec, fig3.distribution, fig3.seed);
    const NormProfile p = ComputeNormProfile(
        Simulate(chain, sim3.disturbance, sim3.duration, sim3.dt));
    if (spec.label == "stable") {
      v.Check(IsNonIncreasing(p.l2) && IsNonIncreasing(p.linf),
              fmt::format("stable chain: L2 {:.4f} -> {:.4f}, Linf {:.4f} -> "
                          "{:.4f}, both non-increasing over {} vehicles",
                          p.l2.front(), p.l2.back(), p.linf.front(),
                          p.linf.back(), p.l2.size()));
    } else {
      int from = 0;
      const bool grows = GrowsFromSomeIndex(p.l2, &from);
      v.Check(grows, fmt::format("unstable chain: L2 rises from vehicle {} "
                                 "({:.4f}) to vehicle {} ({:.4f})",
                                 from, p.l2[from - 1], p.l2.size(),
                                 p.l2.back()));
    }
  }
  const ScenarioConfig fig5 = Load("fig5_nonlinear");
  const SimulateSpec& sim5 = *fig5.simulate;
  const VehicleChain chain =
      BuildChain(fig5.chains[0], fig5.distribution, fig5.seed);
  const double s = StringStabilityCoefficient(Linearize(
      chain.vehicles[0].params, chain.v_eq));
  const auto sweep = NonlinearStabilitySweep(chain, {-7.0}, sim5.duration,
                                             sim5.dt);
  const SweepEntry& e = sweep[0];
  v.Check(e.grows && e.clamp_events > 0,
          fmt::format("S = {:.5f} chain at -7 m/s^2: L2 {:.4f} -> {:.4f}, {} "
                      "zero-speed clamps",
                      s, e.profile.l2.front(), e.profile.l2.back(),
                      e.clamp_events));
  const double t = Seconds(start);
  v.Check(t < 120.0, fmt::format("runtime {:.2f} s < 120 s", t));
  return v;
}

// -- 8, 9 -----------------------------------------------------------------------

ExperimentConfig ScaledFractionExperiment() {
  const ScenarioConfig cfg = Load("fig7_experiment");
  ExperimentConfig e = cfg.optimize->experiment;
  e.seeds.clear();
  for (std::uint64_t s = 1; s <= 10; ++s) e.seeds.push_back(s);
  e.arms = FractionArms({0.0, 0.3});
  e.sa.budget = 2000;
  return e;
}

Verdict OptimizationEffect() {
  Verdict v;
  const auto start = Clock::now();
  const ExperimentReport r = RunExperiment(ScaledFractionExperiment());
  const int m = r.config.vehicles;
  int below = 0, ok = 0;
  for (std::size_t s = 0; s < r.config.seeds.size(); ++s) {
    const CellResult& base = r.Cell(s, 0);
    const CellResult& av = r.Cell(s, 1);
    if (!base.ok || !av.ok) continue;
    ++ok;
    below += av.profile.l2[m - 1] < base.profile.l2[m - 1];
  }
  v.Check(below >= 9,
          fmt::format("{} of {} seeds ({} completed) have a lower L2 at "
                      "vehicle {} with 30% AVs",
                      below, r.config.seeds.size(), ok, m));
  const auto stats = ProfileStatistics(r);
  bool ordered = true;
  for (int i = 0; i < m; ++i) {
    ordered = ordered && stats[1].mean[i] <= stats[0].mean[i] * (1 + 1e-12);
  }
  ordered = ordered && stats[1].mean[m - 1] < stats[0].mean[m - 1];
  v.Check(ordered,
          fmt::format("mean L2 profile with 30% AVs at or below the baseline "
                      "at every vehicle; vehicle {}: {:.4f} vs {:.4f}",
                      m, stats[1].mean[m - 1], stats[0].mean[m - 1]));
  const double t = Seconds(start);
  v.Check(t < 1800.0, fmt::format("runtime {:.1f} s < 1800 s", t));
  return v;
}

Verdict ParameterShiftDirection() {
  Verdict v;
  const ExperimentReport r = RunExperiment(ScaledFractionExperiment());
  for (const ParamShift& s : ParameterShifts(r)) {
    if (s.arm != 1 || s.param == Param::kS0) continue;
    const bool up = s.param != Param::kB;
    const bool ok = s.count > 0 && (up ? s.optimized_median > s.reference_median
                                       : s.optimized_median < s.reference_median);
    v.Check(ok, fmt::format("median {}: {:.4f} -> {:.4f} over {} AVs, want {}",
                            Name(s.param), s.reference_median,
                            s.optimized_median, s.count,
                            up ? "increase" : "decrease"));
  }
  return v;
}

// -- 10 -----------------------------------------------------------------------

Verdict FictitiousEscalation() {
  Verdict v;
  const ScenarioConfig cfg = Load("fig12_fictitious");
  ExperimentConfig e = cfg.optimize->experiment;
  std::vector<ExperimentArm> arms;
  for (const ExperimentArm& arm : e.arms) {
    if (arm.label == "3av" || arm.label == "3av_wc_T5") arms.push_back(arm);
  }
  e.arms = arms;
  e.seeds.clear();
  for (std::uint64_t s = 1; s <= 10; ++s) e.seeds.push_back(s);
  const ExperimentReport r = RunExperiment(e);
  const int m = e.vehicles;
  int lower = 0, ok = 0;
  double sum_plain = 0.0, sum_wc = 0.0;
  for (std::size_t s = 0; s < e.seeds.size(); ++s) {
    const CellResult& plain = r.Cell(s, 0);
    const CellResult& wc = r.Cell(s, 1);
    if (!plain.ok || !wc.ok) continue;
    ++ok;
    lower += wc.profile.l2[m - 1] < plain.profile.l2[m - 1];
    sum_plain += plain.profile.l2[m - 1];
    sum_wc += wc.profile.l2[m - 1];
  }
  v.Check(ok == static_cast<int>(e.seeds.size()) && lower == ok,
          fmt::format("worst-case vehicle with T_up = 5 s lowers the final L2 "
                      "on {} of {} seeds; mean {:.4f} vs {:.4f}",
                      lower, e.seeds.size(), sum_wc / std::max(ok, 1),
                      sum_plain / std::max(ok, 1)));
  return v;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Verdict()> run;
};

const std::vector<Criterion>& Criteria() {
  static const std::vector<Criterion> all = {
      {1, "gain reproduction", GainReproduction},
      {2, "S-coefficient reproduction", SCoefficients},
      {3, "weak-stability infeasibility", WeakStabilityInfeasible},
      {4, "limitation witness", LimitationWitness},
      {5, "ring witness", RingWitness},
      {6, "oracle equivalences", OracleEquivalences},
      {7, "simulation qualitative reproduction", SimulationQualitative},
      {8, "optimization effect", OptimizationEffect},
      {9, "parameter-shift direction", ParameterShiftDirection},
      {10, "fictitious-vehicle escalation", FictitiousEscalation},
  };
  return all;
}

}  // namespace
}  // namespace strstab

int main(int argc, char** argv) {
  using strstab::Criteria;
  const std::string which = argc > 1 ? argv[1] : "all";
  bool all_pass = true;
  int ran = 0;
  for (const auto& c : Criteria()) {
    if (which != "all" && which != std::to_string(c.id)) continue;
    ++ran;
    strstab::Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.Check(false, std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d: %s\n", v.pass ? "PASS" : "FAIL", c.id,
                c.title);
    for (const auto& n : v.notes) std::printf("%s\n", n.c_str());
    std::fflush(stdout);
    all_pass = all_pass && v.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
