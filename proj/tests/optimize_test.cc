#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "strstab/errors.h"
#include "strstab/linear.h"
#include "strstab/optimize.h"

namespace strstab {
namespace {

IdmParams Driver(double a, double T, double b = 1.1) {
  IdmParams p;
  p.a = a;
  p.b = b;
  p.T = T;
  return p;
}

// Three humans that cannot be made weakly stable by one extra vehicle.
VehicleChain HardChain() {
  return VehicleChain::FromParams(
      {Driver(0.58, 1.76), Driver(0.35, 1.26), Driver(0.39, 1.43),
       Driver(0.6, 1.2), Driver(0.9, 1.6)},
      33.0 / 3.0);
}

OptimizationProblem Problem(int n = 3) {
  return MakeProblem(HardChain(), n, ParamDistribution::Ngsim());
}

TEST(Windows, NeighbourWindowClipsToChain) {
  EXPECT_EQ(NeighbourWindow(5, 30), (Window{4, 7}));
  EXPECT_EQ(NeighbourWindow(1, 30), (Window{1, 3}));
  EXPECT_EQ(NeighbourWindow(30, 30), (Window{29, 30}));
  EXPECT_EQ(NeighbourWindow(5, 30, 2, 0), (Window{3, 5}));
}

TEST(Windows, NestedWindowsContainTheAv) {
  const auto ws = NestedWindows(5, 30);
  EXPECT_EQ(ws.size(), 2u * 3u);
  for (const Window& w : ws) {
    EXPECT_LE(w.i, 5);
    EXPECT_GE(w.j, 5);
  }
  EXPECT_EQ(NestedWindows(1, 2).size(), 2u);
}

TEST(MakeProblem, UsesPopulationSpread) {
  const OptimizationProblem p = Problem();
  EXPECT_EQ(p.av_index, 3);
  EXPECT_EQ(p.theta_hat, HardChain().vehicles[2].params);
  EXPECT_EQ(p.sigma[0], 0.42);
  EXPECT_EQ(p.sigma[1], 0.43);
  EXPECT_EQ(p.sigma[2], 0.57);
  EXPECT_EQ(p.windows, std::vector<Window>{(Window{2, 5})});
  ProblemOptions o;
  o.t_upper = 5.0;
  EXPECT_EQ(MakeProblem(HardChain(), 3, ParamDistribution::Ngsim(), o)
                .box[Param::kT]
                .hi,
            5.0);
}

TEST(ValidateProblem, RejectsInconsistentProblems) {
  EXPECT_NO_THROW(ValidateProblem(Problem()));
  auto p = Problem();
  p.av_index = 9;
  EXPECT_THROW(ValidateProblem(p), std::invalid_argument);
  p = Problem();
  p.windows = {{4, 5}};
  EXPECT_THROW(ValidateProblem(p), std::invalid_argument);
  p = Problem();
  p.free = {Param::kA, Param::kA};
  EXPECT_THROW(ValidateProblem(p), std::invalid_argument);
  p = Problem();
  p.alpha = 0.0;
  EXPECT_THROW(ValidateProblem(p), std::invalid_argument);
  p = Problem();
  p.theta_hat.T = 4.0;
  EXPECT_THROW(ValidateProblem(p), std::invalid_argument);
}

TEST(Penalty, OneStandardDeviationCostsOne) {
  const OptimizationProblem p = Problem();
  IdmParams theta = p.theta_hat;
  theta.a += p.sigma[0];
  theta.b += p.sigma[1];
  theta.T += p.sigma[2];
  EXPECT_NEAR(Penalty(p, theta), 1.0, 1e-12);
  theta = p.theta_hat;
  theta.a += p.sigma[0];
  EXPECT_NEAR(Penalty(p, theta), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(Penalty(p, p.theta_hat), 0.0);
}

TEST(Penalty, InverseStddevMetric) {
  OptimizationProblem p = Problem();
  p.metric = PenaltyMetric::kInverseStddev;
  IdmParams theta = p.theta_hat;
  theta.T += p.sigma[2];
  EXPECT_NEAR(Penalty(p, theta), p.sigma[2] / 3.0, 1e-12);
}

TEST(Objective, ReferencePointCostsAlphaGamma) {
  const OptimizationProblem p = Problem();
  const Evaluation e = Objective(p, p.theta_hat);
  ASSERT_TRUE(e.feasible);
  const auto cs = WindowCoefficients(p, p.theta_hat, p.windows[0]);
  EXPECT_EQ(cs.size(), 4u);
  EXPECT_NEAR(e.gamma, HinfChain(cs).gamma, 1e-12);
  EXPECT_NEAR(e.value, p.alpha * e.gamma, 1e-9);
  EXPECT_GE(e.gamma, 1.0);
}

TEST(Objective, OutsideBoxThrows) {
  const OptimizationProblem p = Problem();
  IdmParams theta = p.theta_hat;
  theta.a = 3.5;
  EXPECT_THROW(Objective(p, theta), std::invalid_argument);
}

TEST(WorstCaseAugment, JoinsEveryWindow) {
  const OptimizationProblem p = Problem();
  const OptimizationProblem up = WorstCaseAugment(p, kWorstCaseParams);
  const OptimizationProblem down =
      WorstCaseAugment(p, kWorstCaseParams, Side::kDownstream);
  const Window w = p.windows[0];
  const auto base = WindowCoefficients(p, p.theta_hat, w);
  const auto cu = WindowCoefficients(up, p.theta_hat, w);
  const auto cd = WindowCoefficients(down, p.theta_hat, w);
  const LinearCoeffs wc = Linearize(kWorstCaseParams, p.chain.v_eq);
  ASSERT_EQ(cu.size(), base.size() + 1);
  EXPECT_EQ(cu.front(), wc);
  EXPECT_EQ(cd.back(), wc);
  // Gains of a product commute.
  EXPECT_NEAR(HinfChain(cu).gamma, HinfChain(cd).gamma, 1e-9);
  EXPECT_GT(Objective(up, p.theta_hat).gamma,
            Objective(p, p.theta_hat).gamma);
}

SaConfig Budget(int n) {
  SaConfig c;
  c.budget = n;
  return c;
}

TEST(OptimizeAv, DeterministicPerSeed) {
  const OptimizationProblem p = Problem();
  const auto a = OptimizeAv(p, Budget(300), 11);
  const auto b = OptimizeAv(p, Budget(300), 11);
  EXPECT_EQ(a.theta_star, b.theta_star);
  EXPECT_EQ(a.trace.best_so_far, b.trace.best_so_far);
}

TEST(OptimizeAv, ImprovesAndStaysInBox) {
  const OptimizationProblem p = Problem();
  const auto r = OptimizeAv(p, Budget(500), 3);
  EXPECT_TRUE(p.box.Contains(r.theta_star));
  EXPECT_EQ(r.theta_star.s0, p.theta_hat.s0);
  EXPECT_LE(r.objective, Objective(p, p.theta_hat).value);
  EXPECT_LT(r.gamma_star, Objective(p, p.theta_hat).gamma);
  EXPECT_GE(r.gamma_star, 1.0);
  ASSERT_EQ(r.trace.best_so_far.size(), 501u);
  EXPECT_TRUE(std::is_sorted(r.trace.best_so_far.rbegin(),
                             r.trace.best_so_far.rend()));
  EXPECT_EQ(r.trace.accepted + r.trace.rejected + r.trace.infeasible, 500);
}

TEST(OptimizeAv, CertificateHoldsAboveTheOptimum) {
  const OptimizationProblem p = Problem();
  const auto r = OptimizeAv(p, Budget(400), 5);
  for (const Window& w : p.windows) {
    const auto cs = WindowCoefficients(p, r.theta_star, w);
    EXPECT_TRUE(BoundedRealCheck(cs, r.gamma_star + 1e-6));
  }
}

TEST(OptimizeAv, LongerBudgetExtendsTheTrace) {
  const OptimizationProblem p = Problem();
  const auto short_run = OptimizeAv(p, Budget(200), 9);
  const auto long_run = OptimizeAv(p, Budget(600), 9);
  EXPECT_TRUE(std::equal(short_run.trace.best_so_far.begin(),
                         short_run.trace.best_so_far.end(),
                         long_run.trace.best_so_far.begin()));
  EXPECT_LE(long_run.objective, short_run.objective);
}

TEST(OptimizeAv, ColdChainNeverAcceptsWorse) {
  const OptimizationProblem p = Problem();
  SaConfig cold = Budget(300);
  cold.t0 = 1e-300;
  const auto r = OptimizeAv(p, cold, 2);
  // Every accepted move improved, so the best equals the final state and
  // acceptances are at most the number of strict improvements.
  int improvements = 0;
  for (std::size_t k = 1; k < r.trace.best_so_far.size(); ++k) {
    improvements += r.trace.best_so_far[k] < r.trace.best_so_far[k - 1];
  }
  EXPECT_LE(r.trace.accepted, improvements + 0);
}

TEST(OptimizeAv, ParallelChainsAreDeterministic) {
  const OptimizationProblem p = Problem();
  SaConfig c = Budget(150);
  c.chains = 3;
  const auto a = OptimizeAv(p, c, 4);
  const auto b = OptimizeAv(p, c, 4);
  EXPECT_EQ(a.theta_star, b.theta_star);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(OptimizeAv, RejectsEmptyBudget) {
  EXPECT_THROW(OptimizeAv(Problem(), Budget(0), 1), std::invalid_argument);
}

}  // namespace
}  // namespace strstab
