#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "strstab/errors.h"
#include "strstab/linear.h"

namespace strstab {
namespace {

// Relative size of the real part under which a Hamiltonian eigenvalue is
// taken to lie on the imaginary axis.
constexpr double kImagAxisTol = 1e-7;
constexpr double kGoldenRatio = 0.6180339887498949;

using GainFn = std::function<double(double)>;

// Golden-section maximization of gain on [lo, hi]. In log scale when both
// ends are positive.
PeakGain GoldenMax(const GainFn& gain, double lo, double hi) {
  const bool log_scale = lo > 0.0;
  double a = log_scale ? std::log(lo) : lo;
  double b = log_scale ? std::log(hi) : hi;
  auto at = [&](double x) { return gain(log_scale ? std::exp(x) : x); };
  double x1 = b - kGoldenRatio * (b - a);
  double x2 = a + kGoldenRatio * (b - a);
  double g1 = at(x1), g2 = at(x2);
  for (int i = 0; i < 64 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++i) {
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + kGoldenRatio * (b - a);
      g2 = at(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - kGoldenRatio * (b - a);
      g1 = at(x1);
    }
  }
  PeakGain best = g1 >= g2 ? PeakGain{g1, x1} : PeakGain{g2, x2};
  if (log_scale) best.peak_freq = std::exp(best.peak_freq);
  // The ends may beat the interior when the bracket is monotone.
  const double g_lo = gain(lo), g_hi = gain(hi);
  if (g_lo > best.gamma) best = {g_lo, lo};
  if (g_hi > best.gamma) best = {g_hi, hi};
  return best;
}

PeakGain SweepPeak(const GainFn& gain, const HinfOptions& options) {
  const int n = std::max(options.grid_points, 3);
  const double log_lo = std::log(options.omega_min);
  const double step = (std::log(options.omega_max) - log_lo) / (n - 1);
  std::vector<double> omega(n + 1);
  omega[0] = 0.0;
  for (int i = 0; i < n; ++i) omega[i + 1] = std::exp(log_lo + step * i);
  int best = 0;
  double best_gain = gain(0.0);
  for (int i = 1; i <= n; ++i) {
    const double g = gain(omega[i]);
    if (g > best_gain) {
      best_gain = g;
      best = i;
    }
  }
  const double lo = omega[std::max(best - 1, 0)];
  const double hi = omega[std::min(best + 1, n)];
  PeakGain peak = GoldenMax(gain, lo, hi);
  if (best_gain > peak.gamma) peak = {best_gain, omega[best]};
  return peak;
}

PeakGain CertifiedPeak(const GainFn& gain, const StateSpace& sys,
                       const HinfOptions& options) {
  PeakGain peak = SweepPeak(gain, options);
  for (int it = 0; it < options.max_iterations; ++it) {
    const double level = peak.gamma * (1.0 + 2.0 * options.rel_tol);
    const std::vector<double> cross = ImaginaryAxisCrossings(sys, level);
    if (cross.empty()) break;
    // The gain exceeds `level` on some interval between consecutive
    // crossings (or below the first one); probe every interval.
    PeakGain best{-1.0, 0.0};
    double prev = 0.0;
    for (double x : cross) {
      const PeakGain local = GoldenMax(gain, prev, x);
      if (local.gamma > best.gamma) best = local;
      prev = x;
    }
    if (best.gamma <= peak.gamma * (1.0 + options.rel_tol)) break;
    peak = best;
  }
  return peak;
}

}  // namespace

std::complex<double> StateSpace::Evaluate(std::complex<double> s) const {
  Eigen::MatrixXcd m = -A.cast<std::complex<double>>();
  m.diagonal().array() += s;
  const Eigen::VectorXcd x =
      m.partialPivLu().solve(B.cast<std::complex<double>>());
  return (C.cast<std::complex<double>>() * x)(0);
}

StateSpace ChainRealization(std::span<const LinearCoeffs> coeffs,
                            ChainInput input) {
  if (coeffs.empty()) throw std::invalid_argument("empty realization");
  const int k = static_cast<int>(coeffs.size());
  StateSpace sys;
  sys.A = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  sys.B = Eigen::VectorXd::Zero(2 * k);
  sys.C = Eigen::RowVectorXd::Zero(2 * k);
  for (int i = 0; i < k; ++i) {
    const BlockMatrices blk = BuildBlockMatrices(coeffs[i]);
    sys.A.block<2, 2>(2 * i, 2 * i) = blk.a_n1;
    if (i > 0) sys.A.block<2, 2>(2 * i, 2 * (i - 1)) = blk.a_n0;
  }
  const BlockMatrices first = BuildBlockMatrices(coeffs.front());
  sys.B.head<2>() =
      input == ChainInput::kLeaderSpeed ? Eigen::Vector2d(first.a_n0.col(1))
                                        : first.b_v;
  sys.C(2 * k - 1) = 1.0;
  return sys;
}

bool IsHurwitz(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation did not converge");
  }
  return (es.eigenvalues().real().array() < 0.0).all();
}

std::vector<double> ImaginaryAxisCrossings(const StateSpace& sys,
                                           double gamma) {
  const int n = sys.order();
  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = sys.A;
  h.topRightCorner(n, n) = sys.B * sys.B.transpose() / (gamma * gamma);
  h.bottomLeftCorner(n, n) = -sys.C.transpose() * sys.C;
  h.bottomRightCorner(n, n) = -sys.A.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(h, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("Hamiltonian eigenvalues did not converge");
  }
  std::vector<double> out;
  for (const std::complex<double>& lambda : es.eigenvalues()) {
    const double scale = 1.0 + std::abs(lambda);
    if (std::abs(lambda.real()) <= kImagAxisTol * scale &&
        lambda.imag() > 0.0) {
      out.push_back(lambda.imag());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) {
                          return std::abs(x - y) <= 1e-12 * (1.0 + y);
                        }),
            out.end());
  return out;
}

bool BoundedRealCheck(const StateSpace& sys, double gamma_bound) {
  if (!(gamma_bound > 0.0)) {
    throw std::invalid_argument("gamma bound must be positive");
  }
  if (!IsHurwitz(sys.A)) return false;
  return ImaginaryAxisCrossings(sys, gamma_bound).empty();
}

bool BoundedRealCheck(std::span<const LinearCoeffs> coeffs,
                      double gamma_bound) {
  return BoundedRealCheck(ChainRealization(coeffs), gamma_bound);
}

PeakGain HinfNorm(const StateSpace& sys, const HinfOptions& options) {
  if (!IsHurwitz(sys.A)) {
    return {std::numeric_limits<double>::infinity(), 0.0};
  }
  auto gain = [&sys](double w) { return std::abs(sys.Evaluate({0.0, w})); };
  return CertifiedPeak(gain, sys, options);
}

TfChainGain HinfChain(std::span<const LinearCoeffs> coeffs,
                      const HinfOptions& options) {
  if (coeffs.empty()) throw std::invalid_argument("empty coefficient list");
  TfChainGain out;
  out.coeffs.assign(coeffs.begin(), coeffs.end());
  if (coeffs.size() == 1) {
    const PeakGain p = HinfSecondOrder(coeffs.front());
    out.gamma = p.gamma;
    out.peak_freq = p.peak_freq;
    return out;
  }
  const StateSpace sys = ChainRealization(coeffs);
  if (!IsHurwitz(sys.A)) {
    out.gamma = std::numeric_limits<double>::infinity();
    return out;
  }
  auto gain = [coeffs](double w) { return ChainGain(coeffs, w); };
  const PeakGain p = CertifiedPeak(gain, sys, options);
  out.gamma = p.gamma;
  out.peak_freq = p.peak_freq;
  return out;
}

}  // namespace strstab
