#include "strstab/ring.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "strstab/errors.h"
#include "strstab/linear.h"

namespace strstab {
namespace {

RingSpectrum Classify(std::vector<std::complex<double>> eig, double tol) {
  RingSpectrum out;
  out.max_real_part = -std::numeric_limits<double>::infinity();
  for (const auto& lambda : eig) {
    if (std::abs(lambda) <= tol) {
      out.structural.push_back(lambda);
      continue;
    }
    out.max_real_part = std::max(out.max_real_part, lambda.real());
    if (!(lambda.real() < 0.0)) out.stable = false;
  }
  out.eigenvalues = std::move(eig);
  return out;
}

}  // namespace

RingSystem RingMatrix(std::span<const LinearCoeffs> coeffs) {
  const int m = static_cast<int>(coeffs.size());
  if (m < 2) throw std::invalid_argument("a ring needs at least 2 vehicles");
  RingSystem sys;
  sys.coeffs.assign(coeffs.begin(), coeffs.end());
  sys.a_c = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (int n = 0; n < m; ++n) {
    const BlockMatrices blk = BuildBlockMatrices(coeffs[n]);
    const int leader = (n + m - 1) % m;
    sys.a_c.block<2, 2>(2 * n, 2 * n) = blk.a_n1;
    sys.a_c.block<2, 2>(2 * n, 2 * leader) = blk.a_n0;
  }
  return sys;
}

RingSpectrum RingEigenvalues(const RingSystem& sys, double tol) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(sys.a_c, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("ring eigenvalue computation did not converge");
  }
  const Eigen::VectorXcd& ev = es.eigenvalues();
  return Classify({ev.data(), ev.data() + ev.size()}, tol);
}

bool RingAsymptoticallyStable(const RingSystem& sys, double tol) {
  return RingEigenvalues(sys, tol).stable;
}

std::vector<std::complex<double>> HomogeneousRingRoots(const LinearCoeffs& c,
                                                       int m) {
  if (m < 2) throw std::invalid_argument("a ring needs at least 2 vehicles");
  using cd = std::complex<double>;
  std::vector<cd> roots;
  roots.reserve(2 * m);
  for (int k = 0; k < m; ++k) {
    const cd z = std::polar(1.0, 2.0 * M_PI * k / m) - 1.0;
    // s^2 + p s + q with p = -(f1 + f3 z), q = -f2 z.
    const cd p = -(c.f1 + c.f3 * z);
    const cd q = -c.f2 * z;
    const cd disc = std::sqrt(p * p - 4.0 * q);
    // Stable pairing: the larger-magnitude root first, the other by Vieta.
    const cd big = std::abs(-p + disc) >= std::abs(-p - disc) ? 0.5 * (-p + disc)
                                                             : 0.5 * (-p - disc);
    const cd small = std::abs(big) > 0.0 ? q / big : cd(0.0);
    roots.push_back(big);
    roots.push_back(small);
  }
  return roots;
}

RingSpectrum AnalyzeRing(std::span<const LinearCoeffs> coeffs, double tol) {
  const int m = static_cast<int>(coeffs.size());
  if (m <= kMaxDenseRing) return RingEigenvalues(RingMatrix(coeffs), tol);
  const bool homogeneous =
      std::all_of(coeffs.begin(), coeffs.end(),
                  [&](const LinearCoeffs& c) { return c == coeffs.front(); });
  if (!homogeneous) {
    throw SizeError(fmt::format(
        "heterogeneous ring of {} vehicles exceeds the dense limit of {}", m,
        kMaxDenseRing));
  }
  return Classify(HomogeneousRingRoots(coeffs.front(), m), tol);
}

}  // namespace strstab
