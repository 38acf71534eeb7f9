#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "strstab/model.h"

namespace strstab {

// Per-vehicle blocks of the linearized string dynamics
//   dy_n/dt = a_n0 y_{n-1} + a_n1 y_n + b_v d_n,  y_n = (headway, speed).
struct BlockMatrices {
  Eigen::Matrix2d a_n0;
  Eigen::Matrix2d a_n1;
  Eigen::Vector2d b_v;
};

BlockMatrices BuildBlockMatrices(const LinearCoeffs& c);

// Second-order rational transfer functions of one vehicle. All share the
// denominator U(s) = s^2 + s (f3 - f1) + f2.
enum class TfKind {
  kGammaSpeed,          // leader speed -> own speed: (f3 s + f2) / U
  kGammaHeadway,        // leader headway -> own headway: (f3 s + f2) / U
  kDisturbanceHeadway,  // own disturbance -> own headway: -1 / U
  kDisturbanceSpeed,    // own disturbance -> own speed: s / U
};

struct SecondOrderTf {
  LinearCoeffs coeffs;
  TfKind kind = TfKind::kGammaSpeed;

  // Numerator (n0, n1) of n1 s + n0.
  std::pair<double, double> Numerator() const;
  // Denominator (d0, d1) of s^2 + d1 s + d0.
  std::pair<double, double> Denominator() const;
  std::complex<double> Evaluate(std::complex<double> s) const;
  double Gain(double omega) const { return std::abs(Evaluate({0.0, omega})); }
};

// |Gamma(j omega)| in closed form.
double GammaGain(const LinearCoeffs& c, double omega);

// |prod Gamma_i(j omega)|.
double ChainGain(std::span<const LinearCoeffs> coeffs, double omega);

// S = f1^2 - 2 f1 f3 - 2 f2. S >= 0 iff |Gamma(j omega)| <= 1 everywhere.
double StringStabilityCoefficient(const LinearCoeffs& c);

struct PeakGain {
  double gamma = 1.0;
  double peak_freq = 0.0;  // rad/s
};

// Exact H-infinity norm of the single-vehicle speed transfer function.
// Stationary points of |Gamma|^2 in W = omega^2 solve
//   f3^2 W^2 + 2 f2^2 W + f2^2 S = 0,
// which only has a positive root when S < 0.
PeakGain HinfSecondOrder(const LinearCoeffs& c);

// Frequency window and tolerances for H-infinity evaluation of products.
struct HinfOptions {
  double omega_min = 1e-4;
  double omega_max = 1e3;
  int grid_points = 192;
  double rel_tol = 1e-10;
  int max_iterations = 50;
};

struct TfChainGain {
  std::vector<LinearCoeffs> coeffs;
  double gamma = 1.0;
  double peak_freq = 0.0;
};

// Real SISO state-space realization (A, B, C) with D = 0.
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;

  int order() const { return static_cast<int>(A.rows()); }
  std::complex<double> Evaluate(std::complex<double> s) const;
};

enum class ChainInput {
  kLeaderSpeed,  // input is the speed perturbation of the vehicle ahead
  kDisturbance,  // input is the acceleration disturbance of the first vehicle
};

// Cascade of the listed vehicles: block lower-bidiagonal A with a_{k,1} on
// the diagonal and a_{k,0} below it, output = speed of the last vehicle.
// With kLeaderSpeed the input column is the second column of a_{first,0};
// with kDisturbance it is b_v.
StateSpace ChainRealization(std::span<const LinearCoeffs> coeffs,
                            ChainInput input = ChainInput::kLeaderSpeed);

// Positive frequencies omega with an eigenvalue j omega of the Hamiltonian
//   [[A, B B^T / gamma^2], [-C^T C, -A^T]],
// i.e. the frequencies at which |G(j omega)| = gamma. Sorted ascending.
std::vector<double> ImaginaryAxisCrossings(const StateSpace& sys, double gamma);

bool IsHurwitz(const Eigen::MatrixXd& a);

// Bounded-real test: true iff A is Hurwitz and ||G||_inf < gamma_bound,
// decided by the absence of imaginary-axis Hamiltonian eigenvalues. An
// unstable A has infinite gain and always fails.
bool BoundedRealCheck(const StateSpace& sys, double gamma_bound);
bool BoundedRealCheck(std::span<const LinearCoeffs> coeffs, double gamma_bound);

// H-infinity norm of a realization: a log-spaced sweep plus golden-section
// refinement gives an attained lower bound, which is then certified (or
// improved) from the Hamiltonian crossing frequencies until no crossing is
// left above it.
PeakGain HinfNorm(const StateSpace& sys, const HinfOptions& options = {});

// H-infinity norm of prod Gamma_i evaluated pointwise in frequency.
TfChainGain HinfChain(std::span<const LinearCoeffs> coeffs,
                      const HinfOptions& options = {});

// Largest singular value of the 2x2 MIMO map Gamma(j omega) in closed form.
double MimoSigmaMax(const LinearCoeffs& c, double omega);
// sup over omega of MimoSigmaMax, closed form in W = omega^2.
PeakGain MimoHinf(const LinearCoeffs& c);
// f1 == 0 and -2 f2 - 1 >= 0: never true for a sensible driver.
bool MimoSufficientCondition(const LinearCoeffs& c);

// Real poles: (f3 - f1)^2 - 4 f2 >= 0. The accompanying zero condition
// -f2/f3 < 0 holds for every sensible driver and is only asserted.
bool LinfStepMonotone(const LinearCoeffs& c);
// f3^2 >= 2 f2.
bool NormEqualityRegime(const LinearCoeffs& c);
// Exact sign test of the impulse response of Gamma (real poles, and the zero
// not slower than the slow pole).
bool ImpulseResponseNonNegative(const LinearCoeffs& c);

// Impulse response of Gamma at time t >= 0.
double GammaImpulseResponse(const LinearCoeffs& c, double t);
// L-infinity induced gain of Gamma = L1 norm of its impulse response, by
// adaptive Gauss-Kronrod quadrature between sign changes.
double LinfInducedNorm(const LinearCoeffs& c);

// Threshold under which a chain gain counts as 1 (weak string stability).
inline constexpr double kWeakStabilityTol = 1e-6;

struct VehicleStability {
  int index = 0;  // 1-based position in the chain
  LinearCoeffs coeffs;
  double s = 0.0;
  double hinf = 1.0;
  double peak_freq = 0.0;
  double mimo_hinf = 1.0;
  bool l2_strict = false;       // S >= 0
  bool linf_monotone = false;   // real poles
  bool norm_equality = false;   // f3^2 >= 2 f2
  bool mimo_sufficient = false; // f1 == 0 and -2 f2 - 1 >= 0
};

// (l, n) weak string stability: gain from the speed of vehicle l to the
// speed of vehicle n, i.e. prod_{i=l+1..n} Gamma_i.
struct PairGain {
  int l = 0;
  int n = 0;
  double gamma = 1.0;
  double peak_freq = 0.0;
  double product_of_norms = 1.0;
  bool weakly_stable = true;
};

struct StabilityReport {
  std::vector<VehicleStability> vehicles;
  std::vector<PairGain> pairs;
};

// Throws std::invalid_argument for an empty chain or a pair outside
// 0 <= l < n <= size.
StabilityReport AnalyzeCoefficients(std::span<const LinearCoeffs> coeffs,
                                    std::span<const std::pair<int, int>> pairs,
                                    const HinfOptions& options = {});
StabilityReport AnalyzeChain(const VehicleChain& chain,
                             std::span<const std::pair<int, int>> pairs,
                             const HinfOptions& options = {});

}  // namespace strstab
