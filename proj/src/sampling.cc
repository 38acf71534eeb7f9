#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "strstab/errors.h"
#include "strstab/model.h"

namespace strstab {
namespace {

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double Draw(const ParamLaw& law, std::mt19937_64& rng) {
  if (law.stddev == 0.0) return law.mean;
  if (law.law == Law::kNormal) {
    std::normal_distribution<double> normal(law.mean, law.stddev);
    for (;;) {
      const double x = normal(rng);
      if (law.truncation.Contains(x)) return x;
    }
  }
  const auto [mu, sigma] = LogNormalUnderlying(law.mean, law.stddev);
  std::lognormal_distribution<double> lognormal(mu, sigma);
  for (;;) {
    const double x = lognormal(rng);
    if (law.truncation.Contains(x)) return x;
  }
}

}  // namespace

std::pair<double, double> LogNormalUnderlying(double mean, double stddev) {
  if (!(mean > 0.0)) {
    throw std::invalid_argument("log-normal mean must be positive");
  }
  const double var = std::log1p(stddev * stddev / (mean * mean));
  return {std::log(mean) - 0.5 * var, std::sqrt(var)};
}

double TruncatedMass(const ParamLaw& law) {
  const Interval& box = law.truncation;
  if (law.stddev == 0.0) return box.Contains(law.mean) ? 1.0 : 0.0;
  if (law.law == Law::kNormal) {
    return NormalCdf((box.hi - law.mean) / law.stddev) -
           NormalCdf((box.lo - law.mean) / law.stddev);
  }
  const auto [mu, sigma] = LogNormalUnderlying(law.mean, law.stddev);
  const double upper = box.hi > 0.0 ? NormalCdf((std::log(box.hi) - mu) / sigma)
                                    : 0.0;
  const double lower = box.lo > 0.0 ? NormalCdf((std::log(box.lo) - mu) / sigma)
                                    : 0.0;
  return upper - lower;
}

ParamBox ParamDistribution::TruncationBox() const {
  ParamBox box;
  for (Param p : kAllParams) box[p] = (*this)[p].truncation;
  return box;
}

ParamDistribution ParamDistribution::Ngsim() {
  ParamDistribution d;
  const ParamBox box;
  d[Param::kA] = {Law::kLogNormal, 0.77, 0.42, box[Param::kA]};
  d[Param::kB] = {Law::kLogNormal, 1.1, 0.43, box[Param::kB]};
  d[Param::kT] = {Law::kNormal, 1.5, 0.57, box[Param::kT]};
  d[Param::kS0] = {Law::kNormal, 2.0, 0.5, box[Param::kS0]};
  return d;
}

std::vector<IdmParams> SampleParams(const ParamDistribution& dist,
                                    std::mt19937_64& rng, int count) {
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  for (Param p : kAllParams) {
    const double mass = TruncatedMass(dist[p]);
    if (!(mass >= kMinAcceptance)) {
      throw SamplingInfeasibleError(fmt::format(
          "truncation [{}, {}] for '{}' keeps only {:.3g} of the mass",
          dist[p].truncation.lo, dist[p].truncation.hi, Name(p), mass));
    }
  }
  std::vector<IdmParams> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    IdmParams q;
    q.v_max = dist.v_max;
    q.length = dist.length;
    for (Param p : kAllParams) Set(q, p, Draw(dist[p], rng));
    out.push_back(q);
  }
  return out;
}

std::vector<IdmParams> SampleParams(const ParamDistribution& dist,
                                    std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  return SampleParams(dist, rng, count);
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace strstab
