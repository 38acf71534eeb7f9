#include "strstab/linear.h"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace strstab {

BlockMatrices BuildBlockMatrices(const LinearCoeffs& c) {
  BlockMatrices m;
  m.a_n0 << 0.0, 1.0, 0.0, c.f3;
  m.a_n1 << 0.0, -1.0, c.f2, c.f1 - c.f3;
  m.b_v << 0.0, 1.0;
  return m;
}

std::pair<double, double> SecondOrderTf::Numerator() const {
  switch (kind) {
    case TfKind::kGammaSpeed:
    case TfKind::kGammaHeadway:
      return {coeffs.f2, coeffs.f3};
    case TfKind::kDisturbanceHeadway:
      return {-1.0, 0.0};
    case TfKind::kDisturbanceSpeed:
      return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

std::pair<double, double> SecondOrderTf::Denominator() const {
  return {coeffs.f2, coeffs.f3 - coeffs.f1};
}

std::complex<double> SecondOrderTf::Evaluate(std::complex<double> s) const {
  const auto [n0, n1] = Numerator();
  const auto [d0, d1] = Denominator();
  return (n1 * s + n0) / (s * s + d1 * s + d0);
}

double GammaGain(const LinearCoeffs& c, double omega) {
  const double w2 = omega * omega;
  const double beta = c.f3 - c.f1;
  const double num = w2 * c.f3 * c.f3 + c.f2 * c.f2;
  const double den = (c.f2 - w2) * (c.f2 - w2) + w2 * beta * beta;
  return std::sqrt(num / den);
}

double ChainGain(std::span<const LinearCoeffs> coeffs, double omega) {
  const double w2 = omega * omega;
  double g2 = 1.0;
  for (const LinearCoeffs& c : coeffs) {
    const double beta = c.f3 - c.f1;
    g2 *= (w2 * c.f3 * c.f3 + c.f2 * c.f2) /
          ((c.f2 - w2) * (c.f2 - w2) + w2 * beta * beta);
  }
  return std::sqrt(g2);
}

double StringStabilityCoefficient(const LinearCoeffs& c) {
  return c.f1 * c.f1 - 2.0 * c.f1 * c.f3 - 2.0 * c.f2;
}

PeakGain HinfSecondOrder(const LinearCoeffs& c) {
  const double s = StringStabilityCoefficient(c);
  // S == 0 is classified stable: |Gamma| <= 1 with equality only at DC.
  if (s >= 0.0) return {1.0, 0.0};
  const double p = c.f3 * c.f3;
  const double q = c.f2 * c.f2;
  double w;
  if (p == 0.0) {
    w = -0.5 * s;
  } else {
    // Positive root of p W^2 + 2 q W + q S = 0, written to avoid
    // cancellation when p S is small compared to q.
    w = -q * s / (q + std::sqrt(q * q - p * q * s));
  }
  const double omega = std::sqrt(w);
  return {GammaGain(c, omega), omega};
}

double MimoSigmaMax(const LinearCoeffs& c, double omega) {
  const double w2 = omega * omega;
  const double beta = c.f3 - c.f1;
  const double num =
      w2 * (1.0 + c.f3 * c.f3) + c.f2 * c.f2 + c.f1 * c.f1;
  const double den =
      w2 * w2 + w2 * (beta * beta - 2.0 * c.f2) + c.f2 * c.f2;
  return std::sqrt(num / den);
}

PeakGain MimoHinf(const LinearCoeffs& c) {
  const double beta = c.f3 - c.f1;
  const double p = 1.0 + c.f3 * c.f3;
  const double q = c.f1 * c.f1 + c.f2 * c.f2;
  const double r = beta * beta - 2.0 * c.f2;
  const double e = c.f2 * c.f2;
  // d/dW of (p W + q) / (W^2 + r W + e) vanishes where
  //   p W^2 + 2 q W - (p e - q r) = 0.
  PeakGain best{MimoSigmaMax(c, 0.0), 0.0};
  const double disc = q * q + p * (p * e - q * r);
  if (disc >= 0.0) {
    const double w = (-q + std::sqrt(disc)) / p;
    if (w > 0.0) {
      const double omega = std::sqrt(w);
      const double g = MimoSigmaMax(c, omega);
      if (g > best.gamma) best = {g, omega};
    }
  }
  return best;
}

bool MimoSufficientCondition(const LinearCoeffs& c) {
  return c.f1 == 0.0 && -2.0 * c.f2 - 1.0 >= 0.0;
}

bool LinfStepMonotone(const LinearCoeffs& c) {
  assert(!(c.f2 > 0.0 && c.f3 > 0.0) || -c.f2 / c.f3 < 0.0);
  const double beta = c.f3 - c.f1;
  return beta * beta - 4.0 * c.f2 >= 0.0;
}

bool NormEqualityRegime(const LinearCoeffs& c) {
  return c.f3 * c.f3 >= 2.0 * c.f2;
}

bool ImpulseResponseNonNegative(const LinearCoeffs& c) {
  const double beta = c.f3 - c.f1;
  const double disc = beta * beta - 4.0 * c.f2;
  if (disc < 0.0) return false;
  // With real poles p_fast <= p_slow < 0 the response starts at f3 > 0 and
  // its tail has the sign of -(f3 + p_fast).
  const double fast = 0.5 * (beta + std::sqrt(disc));
  return fast >= c.f3;
}

double GammaImpulseResponse(const LinearCoeffs& c, double t) {
  using cd = std::complex<double>;
  const double beta = c.f3 - c.f1;
  const cd root = std::sqrt(cd(beta * beta - 4.0 * c.f2, 0.0));
  const cd p1 = 0.5 * (-beta + root);
  const cd p2 = 0.5 * (-beta - root);
  if (std::abs(p1 - p2) <= 1e-7 * std::max(1.0, std::abs(p1))) {
    const double p = -0.5 * beta;
    return std::exp(p * t) * (c.f3 + (c.f3 * p + c.f2) * t);
  }
  const cd r1 = (c.f3 * p1 + c.f2) / (p1 - p2);
  const cd r2 = (c.f3 * p2 + c.f2) / (p2 - p1);
  return std::real(r1 * std::exp(p1 * t) + r2 * std::exp(p2 * t));
}

double LinfInducedNorm(const LinearCoeffs& c) {
  using boost::math::quadrature::gauss_kronrod;
  const double beta = c.f3 - c.f1;
  const double disc = beta * beta - 4.0 * c.f2;
  // Slowest decay rate and, for complex poles, the damped frequency.
  const double decay = disc >= 0.0 ? 0.5 * (beta - std::sqrt(disc))
                                   : 0.5 * beta;
  if (!(decay > 0.0)) return std::numeric_limits<double>::infinity();
  const double horizon = 40.0 / decay;
  auto abs_h = [&c](double t) { return std::abs(GammaImpulseResponse(c, t)); };

  // Sign changes split the integrand into smooth pieces. Complex poles
  // change sign every pi / omega_d; two real exponentials at most once.
  std::vector<double> cuts = {0.0};
  if (disc < 0.0) {
    const double wd = 0.5 * std::sqrt(-disc);
    // h(t) = e^{-beta t / 2} (f3 cos wd t + B sin wd t)
    const double bsin = (c.f2 - 0.5 * beta * c.f3) / wd;
    double first = std::atan2(-c.f3, bsin) / wd;
    while (first <= 0.0) first += M_PI / wd;
    for (double t = first; t < horizon; t += M_PI / wd) cuts.push_back(t);
  } else {
    const double step = horizon / 4096.0;
    double prev = GammaImpulseResponse(c, 0.0);
    for (double t = step; t < horizon; t += step) {
      const double cur = GammaImpulseResponse(c, t);
      if ((prev > 0.0) != (cur > 0.0)) {
        double lo = t - step, hi = t;
        for (int i = 0; i < 80; ++i) {
          const double mid = 0.5 * (lo + hi);
          if ((GammaImpulseResponse(c, mid) > 0.0) == (prev > 0.0)) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        cuts.push_back(0.5 * (lo + hi));
      }
      prev = cur;
    }
  }
  cuts.push_back(horizon);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += gauss_kronrod<double, 31>::integrate(abs_h, cuts[i], cuts[i + 1],
                                                  15, 1e-12);
  }
  return total;
}

StabilityReport AnalyzeCoefficients(std::span<const LinearCoeffs> coeffs,
                                    std::span<const std::pair<int, int>> pairs,
                                    const HinfOptions& options) {
  if (coeffs.empty()) throw std::invalid_argument("empty vehicle chain");
  const int m = static_cast<int>(coeffs.size());
  StabilityReport report;
  for (int i = 0; i < m; ++i) {
    const LinearCoeffs& c = coeffs[i];
    VehicleStability v;
    v.index = i + 1;
    v.coeffs = c;
    v.s = StringStabilityCoefficient(c);
    const PeakGain peak = HinfSecondOrder(c);
    v.hinf = peak.gamma;
    v.peak_freq = peak.peak_freq;
    v.mimo_hinf = MimoHinf(c).gamma;
    v.l2_strict = v.s >= 0.0;
    v.linf_monotone = LinfStepMonotone(c);
    v.norm_equality = NormEqualityRegime(c);
    v.mimo_sufficient = MimoSufficientCondition(c);
    report.vehicles.push_back(v);
  }
  for (const auto& [l, n] : pairs) {
    if (l < 0 || n <= l || n > m) {
      throw std::invalid_argument(
          fmt::format("pair ({}, {}) outside 0 <= l < n <= {}", l, n, m));
    }
    const auto window = coeffs.subspan(l, n - l);
    const TfChainGain gain = HinfChain(window, options);
    PairGain pg;
    pg.l = l;
    pg.n = n;
    pg.gamma = gain.gamma;
    pg.peak_freq = gain.peak_freq;
    for (int i = l; i < n; ++i) pg.product_of_norms *= report.vehicles[i].hinf;
    pg.weakly_stable = gain.gamma <= 1.0 + kWeakStabilityTol;
    report.pairs.push_back(pg);
  }
  return report;
}

StabilityReport AnalyzeChain(const VehicleChain& chain,
                             std::span<const std::pair<int, int>> pairs,
                             const HinfOptions& options) {
  if (chain.vehicles.empty()) throw std::invalid_argument("empty vehicle chain");
  const std::vector<LinearCoeffs> coeffs = chain.Coefficients();
  return AnalyzeCoefficients(coeffs, pairs, options);
}

}  // namespace strstab
