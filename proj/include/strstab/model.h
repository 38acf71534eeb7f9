#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace strstab {

// Behavioural parameters of the Intelligent Driver Model for one vehicle.
struct IdmParams {
  double a = 0.77;      // maximum tolerated acceleration [m/s^2]
  double b = 1.1;       // comfortable deceleration [m/s^2]
  double T = 1.5;       // safe time headway [s]
  double s0 = 2.0;      // minimum stopping distance [m]
  double v_max = 33.0;  // desired free-flow speed [m/s]
  double length = 5.0;  // vehicle length [m]

  bool operator==(const IdmParams&) const = default;
};

// The four behavioural parameters that are sampled and tuned. v_max and
// length are scenario constants.
enum class Param { kA = 0, kB = 1, kT = 2, kS0 = 3 };
inline constexpr std::array<Param, 4> kAllParams = {Param::kA, Param::kB,
                                                    Param::kT, Param::kS0};

double Get(const IdmParams& p, Param which);
void Set(IdmParams& p, Param which, double value);
std::string_view Name(Param which);
// Parses "a", "b", "T" or "s0"; throws ConfigError otherwise.
Param ParseParam(std::string_view name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool Contains(double x) const { return x >= lo && x <= hi; }
  double Width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Admissible set for the behavioural parameters.
struct ParamBox {
  std::array<Interval, 4> bounds = {Interval{0.3, 3.0}, Interval{0.3, 3.0},
                                    Interval{0.3, 3.0}, Interval{0.5, 3.5}};

  Interval& operator[](Param p) { return bounds[static_cast<int>(p)]; }
  const Interval& operator[](Param p) const {
    return bounds[static_cast<int>(p)];
  }
  bool Contains(const IdmParams& p) const;
  bool Contains(const ParamBox& inner) const;
};

// Throws std::invalid_argument unless every field is finite and > 0.
void ValidateParams(const IdmParams& p);

struct VehicleKinematics {
  double position = 0.0;  // front bumper [m]
  double speed = 0.0;     // [m/s]
};

// Equilibrium partial derivatives of the acceleration law:
// f1 = df/dv, f2 = df/d(headway), f3 = df/d(relative speed).
struct LinearCoeffs {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;

  bool operator==(const LinearCoeffs&) const = default;
};

// IDM acceleration from the raw car-following variables. relative_speed is
// leader speed minus own speed. Throws GapCollisionError when net_gap <= 0.
double IdmAcceleration(double speed, double net_gap, double relative_speed,
                       const IdmParams& p);

// Net gap is leader.position - self.position - p.length.
double IdmAcceleration(const VehicleKinematics& self,
                       const VehicleKinematics& leader, const IdmParams& p);

// Net gap (bumper to bumper) at which a vehicle cruising at v_eq behind a
// leader at the same speed has zero acceleration:
//   (s0 + v T) / sqrt(1 - (v / v_max)^4).
// Defined for 0 <= v_eq < v_max; throws NoEquilibriumError otherwise.
double EquilibriumGap(double v_eq, const IdmParams& p);

// Analytic partial derivatives at (v_eq, EquilibriumGap(v_eq), 0). Requires
// 0 < v_eq < v_max: at v_eq = 0 the max(0, .) in the desired gap sits on its
// kink and the partials do not exist.
LinearCoeffs Linearize(const IdmParams& p, double v_eq);

// Sign conditions f1 < 0, f2 > 0, f3 > 0 of a physically sensible driver.
bool SatisfiesDriverSigns(const LinearCoeffs& c);

// One vehicle of an open string. Vehicle index 1 follows a virtual leader
// (index 0) that cruises at v_eq forever.
struct Vehicle {
  IdmParams params;
  bool automated = false;
};

struct VehicleChain {
  std::vector<Vehicle> vehicles;
  double v_eq = 16.5;

  int size() const { return static_cast<int>(vehicles.size()); }
  // Linearization of every vehicle at v_eq, in chain order.
  std::vector<LinearCoeffs> Coefficients() const;
  static VehicleChain Homogeneous(const IdmParams& p, int count, double v_eq);
  static VehicleChain FromParams(const std::vector<IdmParams>& params,
                                 double v_eq);
};

// ---------------------------------------------------------------------------
// Population sampling.

enum class Law { kNormal, kLogNormal };

// A per-parameter law. mean and stddev are the moments of the distribution
// itself (not of the underlying normal for the log-normal case).
struct ParamLaw {
  Law law = Law::kNormal;
  double mean = 0.0;
  double stddev = 0.0;
  Interval truncation;
};

struct ParamDistribution {
  std::array<ParamLaw, 4> laws;
  double v_max = 33.0;
  double length = 5.0;

  ParamLaw& operator[](Param p) { return laws[static_cast<int>(p)]; }
  const ParamLaw& operator[](Param p) const {
    return laws[static_cast<int>(p)];
  }
  ParamBox TruncationBox() const;
  // Log-normal a and b, normal T and s0, truncated at the default box.
  static ParamDistribution Ngsim();
};

// (mu, sigma) of the underlying normal for a log-normal with the given mean
// and standard deviation: sigma^2 = ln(1 + sd^2/mean^2), mu = ln(mean) -
// sigma^2 / 2.
std::pair<double, double> LogNormalUnderlying(double mean, double stddev);

// Probability mass of the law inside its truncation interval.
double TruncatedMass(const ParamLaw& law);

// Minimum acceptance probability accepted by the rejection sampler.
inline constexpr double kMinAcceptance = 1e-4;

// Rejection sampling inside the truncation box, parameter by parameter in
// the order a, b, T, s0. Throws SamplingInfeasibleError if any law keeps
// less than kMinAcceptance of its mass, and std::invalid_argument when
// count < 1.
std::vector<IdmParams> SampleParams(const ParamDistribution& dist,
                                    std::mt19937_64& rng, int count);
std::vector<IdmParams> SampleParams(const ParamDistribution& dist,
                                    std::uint64_t seed, int count);

// splitmix64 of (seed, stream); used to give independent sub-streams to the
// different random ingredients of an experiment.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace strstab
