#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "strstab/model.h"

namespace strstab {

// Closed string: vehicle 1 follows vehicle m.
struct RingSystem {
  std::vector<LinearCoeffs> coeffs;
  // 2m x 2m, a_{n,1} on the block diagonal, a_{n,0} on the block
  // subdiagonal and a_{1,0} in the top-right block.
  Eigen::MatrixXd a_c;

  int size() const { return static_cast<int>(coeffs.size()); }
};

// Largest ring handled by the dense eigensolver.
inline constexpr int kMaxDenseRing = 512;
// Eigenvalues closer than this to 0 are the translation mode of the ring.
inline constexpr double kStructuralZeroTol = 1e-9;

// Throws std::invalid_argument when fewer than 2 vehicles are given.
RingSystem RingMatrix(std::span<const LinearCoeffs> coeffs);

struct RingSpectrum {
  std::vector<std::complex<double>> eigenvalues;  // all of them
  std::vector<std::complex<double>> structural;   // |lambda| <= tol
  double max_real_part = 0.0;                     // over non-structural
  bool stable = true;
};

// Dense eigen decomposition of a_c. Throws NumericalError on
// non-convergence.
RingSpectrum RingEigenvalues(const RingSystem& sys,
                             double tol = kStructuralZeroTol);

// True iff every eigenvalue with |lambda| > tol has a negative real part.
bool RingAsymptoticallyStable(const RingSystem& sys,
                              double tol = kStructuralZeroTol);

// Roots of the m quadratics
//   s^2 - s (f1 + f3 (z_k - 1)) - f2 (z_k - 1),  z_k = exp(2 i k pi / m),
// k = 0..m-1; the k = 0 factor gives {0, f1}.
std::vector<std::complex<double>> HomogeneousRingRoots(const LinearCoeffs& c,
                                                       int m);

// Spectrum of a ring of any size: dense eigensolver up to kMaxDenseRing,
// the closed form beyond that for homogeneous rings. Throws SizeError for
// larger heterogeneous rings.
RingSpectrum AnalyzeRing(std::span<const LinearCoeffs> coeffs,
                         double tol = kStructuralZeroTol);

}  // namespace strstab
