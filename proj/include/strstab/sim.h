#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "strstab/model.h"

namespace strstab {

// Piecewise-constant signal: value[i] on [breaks[i], breaks[i+1]), zero
// before breaks.front() and from breaks.back() on.
class PiecewiseSignal {
 public:
  PiecewiseSignal() = default;
  PiecewiseSignal(std::vector<double> breaks, std::vector<double> values);

  double At(double t) const;
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }
  int segments() const { return static_cast<int>(values_.size()); }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

// Acceleration pulse of `amplitude` on [t_on, t_off).
struct StepDisturbance {
  double amplitude = -1.0;
  double t_on = 5.0;
  double t_off = 10.0;
};

// Alternating +/-amplitude with hold lengths uniform in [hold_min, hold_max],
// active on [start, start + duration).
struct PrbsDisturbance {
  double amplitude = 1.0;
  double hold_min = 2.0;
  double hold_max = 5.0;
  double duration = 60.0;
  double start = 0.0;
  std::uint64_t seed = 0;
};

// Binary sequence of holds in hold_range, the sign of the first segment
// drawn from the seed; the final hold is cut at `duration`. Throws
// std::invalid_argument unless 0 < hold_range.lo <= hold_range.hi <=
// duration.
PiecewiseSignal Prbs(double amplitude, Interval hold_range, double duration,
                     std::uint64_t seed, double start = 0.0);

struct Disturbance {
  int vehicle = 1;  // 1-based target vehicle
  std::variant<StepDisturbance, PrbsDisturbance> kind;

  PiecewiseSignal Signal() const;
  // Last instant at which the disturbance is non-zero.
  double EndTime() const;
};

struct ClampEvent {
  double time = 0.0;
  int vehicle = 0;  // 1-based
};

// Sampled run of an open string, immutable once produced. Index [i][k] is
// vehicle i+1 at time[k].
struct Trajectory {
  double dt = 0.0;
  double v_eq = 0.0;
  std::vector<double> time;
  std::vector<std::vector<double>> position;
  std::vector<std::vector<double>> speed;
  std::vector<std::vector<double>> acceleration;
  std::vector<ClampEvent> clamp_events;

  int vehicles() const { return static_cast<int>(speed.size()); }
  int samples() const { return static_cast<int>(time.size()); }
  double SpeedPerturbation(int vehicle_index, int k) const {
    return speed[vehicle_index][k] - v_eq;
  }
};

inline constexpr double kMaxDt = 0.05;
inline constexpr double kDefaultDt = 0.01;
inline constexpr double kDefaultDuration = 240.0;

// Fixed-step RK4 integration of the nonlinear string started at exact
// equilibrium. The virtual leader cruises at v_eq; the disturbance adds to
// the IDM acceleration of its target; speeds are clamped at 0 after every
// step and each clamp is recorded. Throws CollisionError when a net gap
// reaches 0, NumericalError on NaN, std::invalid_argument on dt > kMaxDt or
// a duration shorter than the disturbance.
Trajectory Simulate(const VehicleChain& chain, const Disturbance& disturbance,
                    double duration = kDefaultDuration,
                    double dt = kDefaultDt);

// Same integrator on the linearized string dy/dt = a y + b d. Positions and
// speeds are reported as equilibrium values plus perturbations.
Trajectory SimulateLinear(const VehicleChain& chain,
                          const Disturbance& disturbance,
                          double duration = kDefaultDuration,
                          double dt = kDefaultDt);

// Euler-sum norms of the speed perturbations, one entry per vehicle.
struct NormProfile {
  std::vector<double> l2;    // sqrt(sum_k (v - v_eq)^2 dt)   [m s^-1/2]
  std::vector<double> linf;  // max_k |v - v_eq|              [m/s]

  bool operator==(const NormProfile&) const = default;
};

NormProfile ComputeNormProfile(const Trajectory& traj);

// values[i+1] <= values[i] * (1 + rel_tol) for every i.
bool IsNonIncreasing(const std::vector<double>& values, double rel_tol = 0.0);

struct SweepEntry {
  double amplitude = 0.0;
  NormProfile profile;
  std::size_t clamp_events = 0;
  bool grows = false;  // last vehicle's L2 above the first vehicle's
};

// One step-disturbance run on vehicle 1 per amplitude over
// [step.t_on, step.t_off). Collision errors propagate.
std::vector<SweepEntry> NonlinearStabilitySweep(
    const VehicleChain& chain, const std::vector<double>& amplitudes,
    double duration = kDefaultDuration, double dt = kDefaultDt,
    StepDisturbance step = {});

}  // namespace strstab
