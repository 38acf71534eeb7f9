#include "strstab/sim.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "strstab/errors.h"

namespace strstab {

PiecewiseSignal::PiecewiseSignal(std::vector<double> breaks,
                                 std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (!values_.empty() && breaks_.size() != values_.size() + 1) {
    throw std::invalid_argument("piecewise signal needs segments + 1 breaks");
  }
}

double PiecewiseSignal::At(double t) const {
  if (values_.empty() || t < breaks_.front() || t >= breaks_.back()) {
    return 0.0;
  }
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

PiecewiseSignal Prbs(double amplitude, Interval hold_range, double duration,
                     std::uint64_t seed, double start) {
  if (!(hold_range.lo > 0.0) || hold_range.hi < hold_range.lo ||
      hold_range.hi > duration) {
    throw std::invalid_argument(fmt::format(
        "PRBS hold range [{}, {}] must lie in (0, {}]", hold_range.lo,
        hold_range.hi, duration));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> hold(hold_range.lo, hold_range.hi);
  double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  const double end = start + duration;
  std::vector<double> breaks = {start};
  std::vector<double> values;
  while (breaks.back() < end) {
    values.push_back(sign * amplitude);
    breaks.push_back(std::min(breaks.back() + hold(rng), end));
    sign = -sign;
  }
  return PiecewiseSignal(std::move(breaks), std::move(values));
}

PiecewiseSignal Disturbance::Signal() const {
  if (const auto* step = std::get_if<StepDisturbance>(&kind)) {
    return PiecewiseSignal({step->t_on, step->t_off}, {step->amplitude});
  }
  const auto& p = std::get<PrbsDisturbance>(kind);
  return Prbs(p.amplitude, {p.hold_min, p.hold_max}, p.duration, p.seed,
              p.start);
}

double Disturbance::EndTime() const {
  if (const auto* step = std::get_if<StepDisturbance>(&kind)) {
    return step->t_off;
  }
  const auto& p = std::get<PrbsDisturbance>(kind);
  return p.start + p.duration;
}

namespace {

// State layout: positions [0, m), speeds [m, 2m).
using State = std::vector<double>;

struct Rk4 {
  State k1, k2, k3, k4, tmp;

  explicit Rk4(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}

  template <typename Deriv>
  void Step(State& y, double t, double dt, Deriv&& f) {
    const std::size_t n = y.size();
    f(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    f(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    f(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    f(t + dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
};

void CheckArguments(const VehicleChain& chain, const Disturbance& disturbance,
                    double duration, double dt) {
  if (chain.vehicles.empty()) throw std::invalid_argument("empty chain");
  if (!(dt > 0.0) || dt > kMaxDt) {
    throw std::invalid_argument(
        fmt::format("time step {} outside (0, {}]", dt, kMaxDt));
  }
  if (duration < disturbance.EndTime()) {
    throw std::invalid_argument(fmt::format(
        "duration {} ends before the disturbance ({})", duration,
        disturbance.EndTime()));
  }
  if (disturbance.vehicle < 1 || disturbance.vehicle > chain.size()) {
    throw std::invalid_argument(fmt::format(
        "disturbed vehicle {} not in 1..{}", disturbance.vehicle,
        chain.size()));
  }
}

// Equilibrium positions with the virtual leader at 0.
std::vector<double> EquilibriumPositions(const VehicleChain& chain) {
  std::vector<double> x(chain.vehicles.size());
  double ahead = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const IdmParams& p = chain.vehicles[i].params;
    x[i] = ahead - (EquilibriumGap(chain.v_eq, p) + p.length);
    ahead = x[i];
  }
  return x;
}

Trajectory MakeTrajectory(int m, int steps, double dt, double v_eq) {
  Trajectory traj;
  traj.dt = dt;
  traj.v_eq = v_eq;
  traj.time.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) traj.time[k] = k * dt;
  traj.position.assign(m, std::vector<double>(steps + 1));
  traj.speed.assign(m, std::vector<double>(steps + 1));
  traj.acceleration.assign(m, std::vector<double>(steps + 1));
  return traj;
}

}  // namespace

Trajectory Simulate(const VehicleChain& chain, const Disturbance& disturbance,
                    double duration, double dt) {
  CheckArguments(chain, disturbance, duration, dt);
  for (const Vehicle& v : chain.vehicles) ValidateParams(v.params);
  const int m = chain.size();
  const double v_eq = chain.v_eq;
  const PiecewiseSignal signal = disturbance.Signal();
  const int target = disturbance.vehicle - 1;
  const int steps = static_cast<int>(std::llround(duration / dt));

  State y(2 * m);
  const std::vector<double> x0 = EquilibriumPositions(chain);
  std::copy(x0.begin(), x0.end(), y.begin());
  std::fill(y.begin() + m, y.end(), v_eq);

  // The disturbance is held at its mid-step value for the whole step, so
  // on-grid switching times do not cost the integrator its order.
  double held = 0.0;
  auto deriv = [&](double t, const State& s, State& out) {
    const double leader_pos = v_eq * t;
    for (int i = 0; i < m; ++i) {
      const double x_ahead = i == 0 ? leader_pos : s[i - 1];
      const double v_ahead = i == 0 ? v_eq : s[m + i - 1];
      const IdmParams& p = chain.vehicles[i].params;
      double acc;
      try {
        acc = IdmAcceleration(s[m + i], x_ahead - s[i] - p.length,
                              v_ahead - s[m + i], p);
      } catch (const GapCollisionError&) {
        throw CollisionError(
            fmt::format("vehicle {} hit its leader at t={:.4f} s", i + 1, t),
            t, i + 1);
      }
      if (i == target) acc += held;
      out[i] = s[m + i];
      out[m + i] = acc;
    }
  };

  Trajectory traj = MakeTrajectory(m, steps, dt, v_eq);
  State rate(2 * m);
  auto record = [&](int k) {
    held = signal.At(traj.time[k]);
    deriv(traj.time[k], y, rate);
    for (int i = 0; i < m; ++i) {
      traj.position[i][k] = y[i];
      traj.speed[i][k] = y[m + i];
      traj.acceleration[i][k] = rate[m + i];
    }
  };

  Rk4 rk4(2 * m);
  record(0);
  for (int k = 0; k < steps; ++k) {
    const double t = traj.time[k];
    held = signal.At(t + 0.5 * dt);
    rk4.Step(y, t, dt, deriv);
    const double t_next = traj.time[k + 1];
    for (int i = 0; i < m; ++i) {
      if (!std::isfinite(y[i]) || !std::isfinite(y[m + i])) {
        throw NumericalError(fmt::format(
            "non-finite state for vehicle {} at t={:.4f} s", i + 1, t_next));
      }
      if (y[m + i] < 0.0) {
        y[m + i] = 0.0;
        traj.clamp_events.push_back({t_next, i + 1});
      }
      const double x_ahead = i == 0 ? v_eq * t_next : y[i - 1];
      if (x_ahead - y[i] - chain.vehicles[i].params.length <= 0.0) {
        throw CollisionError(
            fmt::format("vehicle {} hit its leader at t={:.4f} s", i + 1,
                        t_next),
            t_next, i + 1);
      }
    }
    record(k + 1);
  }
  return traj;
}

Trajectory SimulateLinear(const VehicleChain& chain,
                          const Disturbance& disturbance, double duration,
                          double dt) {
  CheckArguments(chain, disturbance, duration, dt);
  const int m = chain.size();
  const double v_eq = chain.v_eq;
  const std::vector<LinearCoeffs> coeffs = chain.Coefficients();
  const PiecewiseSignal signal = disturbance.Signal();
  const int target = disturbance.vehicle - 1;
  const int steps = static_cast<int>(std::llround(duration / dt));

  // Position and speed perturbations; the leader is unperturbed.
  State y(2 * m, 0.0);
  double held = 0.0;
  auto deriv = [&](double, const State& s, State& out) {
    for (int i = 0; i < m; ++i) {
      const double y_ahead = i == 0 ? 0.0 : s[i - 1];
      const double v_ahead = i == 0 ? 0.0 : s[m + i - 1];
      const LinearCoeffs& c = coeffs[i];
      double acc = c.f1 * s[m + i] + c.f2 * (y_ahead - s[i]) +
                   c.f3 * (v_ahead - s[m + i]);
      if (i == target) acc += held;
      out[i] = s[m + i];
      out[m + i] = acc;
    }
  };

  const std::vector<double> x0 = EquilibriumPositions(chain);
  Trajectory traj = MakeTrajectory(m, steps, dt, v_eq);
  State rate(2 * m);
  auto record = [&](int k) {
    const double t = traj.time[k];
    held = signal.At(t);
    deriv(t, y, rate);
    for (int i = 0; i < m; ++i) {
      traj.position[i][k] = x0[i] + v_eq * t + y[i];
      traj.speed[i][k] = v_eq + y[m + i];
      traj.acceleration[i][k] = rate[m + i];
    }
  };
  Rk4 rk4(2 * m);
  record(0);
  for (int k = 0; k < steps; ++k) {
    held = signal.At(traj.time[k] + 0.5 * dt);
    rk4.Step(y, traj.time[k], dt, deriv);
    record(k + 1);
  }
  return traj;
}

NormProfile ComputeNormProfile(const Trajectory& traj) {
  NormProfile out;
  const int m = traj.vehicles();
  out.l2.assign(m, 0.0);
  out.linf.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double sum = 0.0;
    double peak = 0.0;
    for (int k = 0; k < traj.samples(); ++k) {
      const double dv = traj.SpeedPerturbation(i, k);
      sum += dv * dv * traj.dt;
      peak = std::max(peak, std::abs(dv));
    }
    out.l2[i] = std::sqrt(sum);
    out.linf[i] = peak;
  }
  return out;
}

bool IsNonIncreasing(const std::vector<double>& values, double rel_tol) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1] * (1.0 + rel_tol)) return false;
  }
  return true;
}

std::vector<SweepEntry> NonlinearStabilitySweep(
    const VehicleChain& chain, const std::vector<double>& amplitudes,
    double duration, double dt, StepDisturbance step) {
  std::vector<SweepEntry> out;
  for (double amp : amplitudes) {
    step.amplitude = amp;
    const Trajectory traj = Simulate(chain, Disturbance{1, step}, duration, dt);
    SweepEntry e;
    e.amplitude = amp;
    e.profile = ComputeNormProfile(traj);
    e.clamp_events = traj.clamp_events.size();
    e.grows = e.profile.l2.back() > e.profile.l2.front();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace strstab
