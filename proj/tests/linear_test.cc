#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.h"
#include "strstab/linear.h"
#include "strstab/model.h"

namespace strstab {
namespace {

using cd = std::complex<double>;

const LinearCoeffs kVehicle2{-0.075, 0.091, 0.55};
const LinearCoeffs kVehicle3{-0.26, 0.10, 0.64};

LinearCoeffs RandomCoeffs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> frac(0.05, 0.9);
  const IdmParams p = oracle::RandomParams(rng);
  return Linearize(p, frac(rng) * p.v_max);
}

std::vector<LinearCoeffs> RandomChain(std::mt19937_64& rng, int n) {
  std::vector<LinearCoeffs> out;
  for (int i = 0; i < n; ++i) out.push_back(RandomCoeffs(rng));
  return out;
}

TEST(BlockMatrices, Layout) {
  const BlockMatrices m = BuildBlockMatrices(kVehicle2);
  Eigen::Matrix2d a0, a1;
  a0 << 0.0, 1.0, 0.0, 0.55;
  a1 << 0.0, -1.0, 0.091, -0.075 - 0.55;
  EXPECT_TRUE(m.a_n0.isApprox(a0));
  EXPECT_TRUE(m.a_n1.isApprox(a1));
  EXPECT_EQ(m.b_v, Eigen::Vector2d(0.0, 1.0));
}

TEST(SecondOrderTf, GammaMatchesOracle) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    for (double w : {0.0, 0.01, 0.3, 2.0, 40.0}) {
      const SecondOrderTf tf{c, TfKind::kGammaSpeed};
      EXPECT_LT(std::abs(tf.Evaluate({0.0, w}) - oracle::Gamma(c, w)), 1e-12);
      EXPECT_NEAR(GammaGain(c, w), std::abs(oracle::Gamma(c, w)), 1e-12);
    }
  }
}

TEST(SecondOrderTf, DisturbanceTransfersFromBlocks) {
  // C (s I - a_n1)^-1 b_v with C selecting headway or speed.
  const LinearCoeffs c = kVehicle3;
  const BlockMatrices m = BuildBlockMatrices(c);
  for (double w : {0.05, 0.7, 3.0}) {
    const cd s(0.0, w);
    const Eigen::Vector2cd x =
        (s * Eigen::Matrix2cd::Identity() - m.a_n1.cast<cd>()).inverse() *
        m.b_v.cast<cd>();
    EXPECT_LT(std::abs(SecondOrderTf{c, TfKind::kDisturbanceHeadway}.Evaluate(s) -
                       x(0)),
              1e-12);
    EXPECT_LT(std::abs(SecondOrderTf{c, TfKind::kDisturbanceSpeed}.Evaluate(s) -
                       x(1)),
              1e-12);
  }
}

TEST(SecondOrderTf, HeadwayAndSpeedShareGamma) {
  const cd s(0.0, 0.4);
  EXPECT_EQ(SecondOrderTf({kVehicle2, TfKind::kGammaHeadway}).Evaluate(s),
            SecondOrderTf({kVehicle2, TfKind::kGammaSpeed}).Evaluate(s));
}

TEST(ChainGain, IsProductOfGains) {
  const std::vector<LinearCoeffs> cs{kVehicle2, kVehicle3};
  for (double w : {0.0, 0.1, 1.0}) {
    EXPECT_NEAR(ChainGain(cs, w), oracle::ProductGain(cs, w), 1e-14);
    EXPECT_NEAR(ChainGain(cs, w), GammaGain(kVehicle2, w) * GammaGain(kVehicle3, w),
                1e-14);
  }
  EXPECT_NEAR(ChainGain(cs, 0.0), 1.0, 1e-14);
}

TEST(StringStabilityCoefficient, SignDecidesUnitBound) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    const double sweep = oracle::SweepHinf({c}, 4000);
    if (StringStabilityCoefficient(c) >= 0.0) {
      EXPECT_LE(sweep, 1.0 + 1e-12);
    } else {
      EXPECT_GT(HinfSecondOrder(c).gamma, 1.0);
    }
  }
}

TEST(HinfSecondOrder, MatchesSweep) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    const double sweep = oracle::SweepHinf({c}, 20000);
    const PeakGain got = HinfSecondOrder(c);
    EXPECT_GE(got.gamma, sweep * (1 - 1e-12));
    EXPECT_NEAR(got.gamma, sweep, 1e-6 * sweep);
    EXPECT_NEAR(GammaGain(c, got.peak_freq), got.gamma, 1e-12);
  }
}

TEST(HinfSecondOrder, PublishedGains) {
  EXPECT_NEAR(HinfSecondOrder(kVehicle2).gamma, 1.06, 0.01);
  EXPECT_NEAR(HinfSecondOrder(kVehicle3).gamma, 1.00, 0.01);
  EXPECT_NEAR(HinfChain(std::vector{kVehicle2, kVehicle3}).gamma, 1.00, 0.01);
}

TEST(HinfChain, MatchesSweepOnRandomChains) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 60; ++k) {
    const auto cs = RandomChain(rng, 1 + k % 4);
    const double sweep = oracle::SweepHinf(cs, 20000);
    const TfChainGain got = HinfChain(cs);
    EXPECT_GE(got.gamma, sweep * (1 - 1e-12));
    EXPECT_NEAR(got.gamma, sweep, 1e-6 * sweep);
    EXPECT_NEAR(ChainGain(cs, got.peak_freq), got.gamma, 1e-9 * got.gamma);
  }
}

TEST(HinfChain, SingleVehicleEqualsClosedForm) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    EXPECT_NEAR(HinfChain(std::vector{c}).gamma, HinfSecondOrder(c).gamma,
                1e-9);
  }
}

TEST(HinfChain, NeverBelowDcGain) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    EXPECT_GE(HinfChain(RandomChain(rng, 3)).gamma, 1.0 - 1e-12);
  }
}

TEST(ChainRealization, EvaluatesToTheProduct) {
  std::mt19937_64 rng(7);
  const auto cs = RandomChain(rng, 4);
  const StateSpace sys = ChainRealization(cs);
  EXPECT_EQ(sys.order(), 8);
  for (double w : {0.0, 0.02, 0.5, 5.0}) {
    cd prod = 1.0;
    for (const auto& c : cs) prod *= oracle::Gamma(c, w);
    EXPECT_LT(std::abs(sys.Evaluate({0.0, w}) - prod), 1e-10);
  }
}

TEST(ChainRealization, DisturbanceInput) {
  std::mt19937_64 rng(8);
  const auto cs = RandomChain(rng, 3);
  const StateSpace sys = ChainRealization(cs, ChainInput::kDisturbance);
  for (double w : {0.03, 0.6}) {
    const cd s(0.0, w);
    cd want = SecondOrderTf{cs[0], TfKind::kDisturbanceSpeed}.Evaluate(s);
    for (std::size_t i = 1; i < cs.size(); ++i) want *= oracle::Gamma(cs[i], w);
    EXPECT_LT(std::abs(sys.Evaluate(s) - want), 1e-10);
  }
}

TEST(BoundedRealCheck, BracketsTheNorm) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 40; ++k) {
    const auto cs = RandomChain(rng, 1 + k % 3);
    const double g = HinfChain(cs).gamma;
    EXPECT_TRUE(BoundedRealCheck(cs, g * (1 + 1e-6)));
    EXPECT_FALSE(BoundedRealCheck(cs, g * (1 - 1e-6)));
  }
}

TEST(BoundedRealCheck, BisectionConvergesToTheNorm) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 10; ++k) {
    const auto cs = RandomChain(rng, 3);
    double lo = 0.5, hi = 10.0;
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      (BoundedRealCheck(cs, mid) ? hi : lo) = mid;
    }
    EXPECT_NEAR(hi, HinfChain(cs).gamma, 1e-6);
  }
}

TEST(BoundedRealCheck, UnstableSystemFails) {
  StateSpace sys;
  sys.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
  sys.B = Eigen::VectorXd::Ones(1);
  sys.C = Eigen::RowVectorXd::Ones(1);
  EXPECT_FALSE(IsHurwitz(sys.A));
  EXPECT_FALSE(BoundedRealCheck(sys, 1e6));
}

TEST(ImaginaryAxisCrossings, GainEqualsLevelAtCrossings) {
  const std::vector<LinearCoeffs> cs{kVehicle2};
  const StateSpace sys = ChainRealization(cs);
  const double level = 1.03;  // between the DC gain and the 1.06 peak
  const auto crossings = ImaginaryAxisCrossings(sys, level);
  ASSERT_EQ(crossings.size(), 2u);
  for (double w : crossings) EXPECT_NEAR(GammaGain(kVehicle2, w), level, 1e-8);
}

TEST(HinfNorm, FirstOrderLag) {
  // 2 / (s + 4): peak 0.5 at DC.
  StateSpace sys;
  sys.A = Eigen::MatrixXd::Constant(1, 1, -4.0);
  sys.B = Eigen::VectorXd::Constant(1, 2.0);
  sys.C = Eigen::RowVectorXd::Ones(1);
  EXPECT_NEAR(HinfNorm(sys).gamma, 0.5, 1e-12);
}

TEST(HinfNorm, LightlyDampedResonance) {
  // 1 / (s^2 + 2 z s + 1) peaks at 1 / (2 z sqrt(1 - z^2)).
  const double z = 0.01;
  StateSpace sys;
  sys.A.resize(2, 2);
  sys.A << 0.0, 1.0, -1.0, -2.0 * z;
  sys.B = Eigen::Vector2d(0.0, 1.0);
  sys.C = Eigen::RowVector2d(1.0, 0.0);
  EXPECT_NEAR(HinfNorm(sys).gamma, 1.0 / (2 * z * std::sqrt(1 - z * z)),
              1e-8);
}

// -- MIMO ---------------------------------------------------------------------

TEST(MimoSigmaMax, MatchesNumericSvd) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    const double om = w(rng);
    const double want = oracle::MimoSigmaNumeric(c, om);
    EXPECT_NEAR(MimoSigmaMax(c, om), want, 1e-10 * want);
  }
}

TEST(MimoHinf, MatchesSweepAndExceedsOne) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    double sweep = oracle::MimoSigmaNumeric(c, 0.0);
    for (int i = 0; i < 20000; ++i) {
      sweep = std::max(sweep, oracle::MimoSigmaNumeric(
                                  c, 1e-4 * std::pow(1e7, i / 19999.0)));
    }
    const PeakGain got = MimoHinf(c);
    EXPECT_NEAR(got.gamma, sweep, 1e-6 * sweep);
    EXPECT_GT(got.gamma, 1.0);
    EXPECT_FALSE(MimoSufficientCondition(c));
  }
}

TEST(MimoSufficientCondition, DefinedByCoefficients) {
  EXPECT_TRUE(MimoSufficientCondition({0.0, -1.0, 0.3}));
  EXPECT_FALSE(MimoSufficientCondition({0.0, -0.4, 0.3}));
  EXPECT_FALSE(MimoSufficientCondition({-0.1, -1.0, 0.3}));
}

// -- L-infinity ---------------------------------------------------------------

double ImpulseOracle(const LinearCoeffs& c, double t) {
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -c.f2, c.f1 - c.f3;
  const Eigen::Matrix2d e = (a * t).exp();
  // Controllable canonical form of (f3 s + f2) / (s^2 + (f3 - f1) s + f2).
  return c.f2 * e(0, 1) + c.f3 * e(1, 1);
}

TEST(GammaImpulseResponse, MatchesMatrixExponential) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 50; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    for (double t : {0.0, 0.5, 3.0, 20.0}) {
      EXPECT_NEAR(GammaImpulseResponse(c, t), ImpulseOracle(c, t), 1e-10);
    }
  }
}

double L1Oracle(const LinearCoeffs& c) {
  const double beta = c.f3 - c.f1;
  const double disc = beta * beta - 4.0 * c.f2;
  const double decay =
      disc >= 0 ? 0.5 * (beta - std::sqrt(disc)) : 0.5 * beta;
  const double t_end = 40.0 / decay;
  const int n = 400000;
  const double h = t_end / n;
  double sum = 0.5 * std::abs(ImpulseOracle(c, 0.0));
  for (int i = 1; i < n; ++i) sum += std::abs(ImpulseOracle(c, i * h));
  return sum * h;
}

TEST(LinfInducedNorm, MatchesTrapezoidOracle) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 8; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    EXPECT_NEAR(LinfInducedNorm(c), L1Oracle(c), 1e-5);
  }
}

TEST(LinfInducedNorm, UnityExactlyWhenImpulseNonNegative) {
  std::mt19937_64 rng(15);
  int positive = 0;
  for (int k = 0; k < 300; ++k) {
    const LinearCoeffs c = RandomCoeffs(rng);
    const double l1 = LinfInducedNorm(c);
    EXPECT_GE(l1, 1.0 - 1e-9);
    if (ImpulseResponseNonNegative(c)) {
      ++positive;
      EXPECT_NEAR(l1, 1.0, 1e-6);
    }
  }
  EXPECT_GT(positive, 10);
}

TEST(LinfStepMonotone, RealPoles) {
  EXPECT_TRUE(LinfStepMonotone({-0.5, 0.05, 0.6}));
  EXPECT_TRUE(LinfStepMonotone(kVehicle2));
  EXPECT_FALSE(LinfStepMonotone({-0.1, 0.5, 0.5}));
  EXPECT_TRUE(NormEqualityRegime({-0.1, 0.1, 0.5}));
  EXPECT_FALSE(NormEqualityRegime({-0.1, 0.2, 0.5}));
}

// -- reports ------------------------------------------------------------------

TEST(AnalyzeCoefficients, ReportsVehiclesAndPairs) {
  const std::vector<LinearCoeffs> cs{kVehicle2, kVehicle3};
  const std::vector<std::pair<int, int>> pairs{{0, 1}, {1, 2}, {0, 2}};
  const StabilityReport r = AnalyzeCoefficients(cs, pairs);
  ASSERT_EQ(r.vehicles.size(), 2u);
  EXPECT_EQ(r.vehicles[1].index, 2);
  EXPECT_FALSE(r.vehicles[0].l2_strict);
  EXPECT_TRUE(r.vehicles[1].l2_strict);
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_FALSE(r.pairs[0].weakly_stable);
  EXPECT_TRUE(r.pairs[2].weakly_stable);
  EXPECT_NEAR(r.pairs[2].product_of_norms,
              r.vehicles[0].hinf * r.vehicles[1].hinf, 1e-14);
  EXPECT_LE(r.pairs[2].gamma, r.pairs[2].product_of_norms + 1e-12);
}

TEST(AnalyzeCoefficients, RejectsBadPairs) {
  const std::vector<LinearCoeffs> cs{kVehicle2, kVehicle3};
  for (auto pair : {std::pair{1, 1}, std::pair{-1, 1}, std::pair{0, 3}}) {
    const std::vector<std::pair<int, int>> pairs{pair};
    EXPECT_THROW(AnalyzeCoefficients(cs, pairs), std::invalid_argument);
  }
  EXPECT_THROW(AnalyzeCoefficients({}, {}), std::invalid_argument);
}

}  // namespace
}  // namespace strstab
