#include "strstab/model.h"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "strstab/errors.h"

namespace strstab {

double Get(const IdmParams& p, Param which) {
  switch (which) {
    case Param::kA:
      return p.a;
    case Param::kB:
      return p.b;
    case Param::kT:
      return p.T;
    case Param::kS0:
      return p.s0;
  }
  return 0.0;
}

void Set(IdmParams& p, Param which, double value) {
  switch (which) {
    case Param::kA:
      p.a = value;
      break;
    case Param::kB:
      p.b = value;
      break;
    case Param::kT:
      p.T = value;
      break;
    case Param::kS0:
      p.s0 = value;
      break;
  }
}

std::string_view Name(Param which) {
  switch (which) {
    case Param::kA:
      return "a";
    case Param::kB:
      return "b";
    case Param::kT:
      return "T";
    case Param::kS0:
      return "s0";
  }
  return "?";
}

Param ParseParam(std::string_view name) {
  for (Param p : kAllParams) {
    if (Name(p) == name) return p;
  }
  throw ConfigError(fmt::format("unknown parameter '{}'", name));
}

bool ParamBox::Contains(const IdmParams& p) const {
  for (Param q : kAllParams) {
    if (!(*this)[q].Contains(Get(p, q))) return false;
  }
  return true;
}

bool ParamBox::Contains(const ParamBox& inner) const {
  for (Param q : kAllParams) {
    if (inner[q].lo < (*this)[q].lo || inner[q].hi > (*this)[q].hi) {
      return false;
    }
  }
  return true;
}

void ValidateParams(const IdmParams& p) {
  const double fields[] = {p.a, p.b, p.T, p.s0, p.v_max, p.length};
  for (double f : fields) {
    if (!std::isfinite(f) || f <= 0.0) {
      throw std::invalid_argument(fmt::format(
          "IDM parameters must be finite and positive (a={} b={} T={} s0={} "
          "v_max={} length={})",
          p.a, p.b, p.T, p.s0, p.v_max, p.length));
    }
  }
}

double IdmAcceleration(double speed, double net_gap, double relative_speed,
                       const IdmParams& p) {
  if (!(net_gap > 0.0)) {
    throw GapCollisionError(
        fmt::format("non-positive net gap {} m to the leader", net_gap));
  }
  const double desired_gap =
      p.s0 + std::max(0.0, speed * p.T - speed * relative_speed /
                                             (2.0 * std::sqrt(p.a * p.b)));
  const double free = speed / p.v_max;
  const double interaction = desired_gap / net_gap;
  return p.a * (1.0 - free * free * free * free - interaction * interaction);
}

double IdmAcceleration(const VehicleKinematics& self,
                       const VehicleKinematics& leader, const IdmParams& p) {
  return IdmAcceleration(self.speed,
                         leader.position - self.position - p.length,
                         leader.speed - self.speed, p);
}

double EquilibriumGap(double v_eq, const IdmParams& p) {
  if (!(v_eq >= 0.0) || !(v_eq < p.v_max)) {
    throw NoEquilibriumError(fmt::format(
        "no equilibrium at v_eq={} for v_max={}", v_eq, p.v_max));
  }
  const double r = v_eq / p.v_max;
  return (p.s0 + v_eq * p.T) / std::sqrt(1.0 - r * r * r * r);
}

LinearCoeffs Linearize(const IdmParams& p, double v_eq) {
  if (!(v_eq > 0.0)) {
    throw NoEquilibriumError(
        fmt::format("linearization needs v_eq > 0 (got {})", v_eq));
  }
  const double gap = EquilibriumGap(v_eq, p);
  // At zero relative speed the argument of max(0, .) is v T > 0, so the
  // desired gap is smooth around the operating point.
  const double desired = p.s0 + v_eq * p.T;
  assert(v_eq * p.T > 0.0);
  const double gap2 = gap * gap;
  LinearCoeffs c;
  c.f1 = p.a * (-4.0 * v_eq * v_eq * v_eq / std::pow(p.v_max, 4) -
                2.0 * desired * p.T / gap2);
  c.f2 = p.a * 2.0 * desired * desired / (gap2 * gap);
  c.f3 = p.a * desired * v_eq / (gap2 * std::sqrt(p.a * p.b));
  return c;
}

bool SatisfiesDriverSigns(const LinearCoeffs& c) {
  return c.f1 < 0.0 && c.f2 > 0.0 && c.f3 > 0.0;
}

std::vector<LinearCoeffs> VehicleChain::Coefficients() const {
  std::vector<LinearCoeffs> out;
  out.reserve(vehicles.size());
  for (const Vehicle& v : vehicles) out.push_back(Linearize(v.params, v_eq));
  return out;
}

VehicleChain VehicleChain::Homogeneous(const IdmParams& p, int count,
                                       double v_eq) {
  VehicleChain chain;
  chain.v_eq = v_eq;
  chain.vehicles.assign(count, Vehicle{p, false});
  return chain;
}

VehicleChain VehicleChain::FromParams(const std::vector<IdmParams>& params,
                                      double v_eq) {
  VehicleChain chain;
  chain.v_eq = v_eq;
  for (const IdmParams& p : params) chain.vehicles.push_back({p, false});
  return chain;
}

}  // namespace strstab
