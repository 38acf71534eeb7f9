#include "strstab/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "strstab/errors.h"

namespace strstab {
namespace {

using nlohmann::json;

// Strict view of a JSON object: every key must be read before Done().
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) Fail("expected an object");
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  const json& Raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) Fail(fmt::format("missing key '{}'", key));
    return j_.at(key);
  }

  template <typename T>
  T Required(const std::string& key) {
    return Convert<T>(Raw(key), Sub(key));
  }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return Convert<T>(j_.at(key), Sub(key));
  }

  Reader Object(const std::string& key) { return Reader(Raw(key), Sub(key)); }

  std::string Sub(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const std::string& path() const { return path_; }

  void Done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) Fail(fmt::format("unknown key '{}'", it.key()));
    }
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw ConfigError(fmt::format("{}: {}", path_.empty() ? "<root>" : path_,
                                  what));
  }

  template <typename T>
  static T Convert(const json& v, const std::string& path) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(path + ": expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(path + ": expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
          throw ConfigError(path + ": expected an integer");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(path + ": expected a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void Check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", path, what));
}

std::vector<double> Numbers(const json& v, const std::string& path) {
  Check(v.is_array(), path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(Reader::Convert<double>(v[k], fmt::format("{}[{}]", path, k)));
  }
  return out;
}

Interval ParseInterval(const json& v, const std::string& path) {
  const std::vector<double> x = Numbers(v, path);
  Check(x.size() == 2 && x[0] <= x[1], path, "expected [lo, hi] with lo <= hi");
  return {x[0], x[1]};
}

IdmParams ParseParams(Reader r, IdmParams base) {
  base.a = r.Get("a", base.a);
  base.b = r.Get("b", base.b);
  base.T = r.Get("T", base.T);
  base.s0 = r.Get("s0", base.s0);
  base.v_max = r.Get("v_max", base.v_max);
  base.length = r.Get("length", base.length);
  r.Done();
  try {
    ValidateParams(base);
  } catch (const std::invalid_argument& e) {
    r.Fail(e.what());
  }
  return base;
}

IdmParams DefaultParams(const ParamDistribution& d) {
  IdmParams p;
  p.v_max = d.v_max;
  p.length = d.length;
  return p;
}

ParamDistribution ParseDistribution(Reader r) {
  ParamDistribution d = ParamDistribution::Ngsim();
  d.v_max = r.Get("v_max", d.v_max);
  d.length = r.Get("length", d.length);
  Check(d.v_max > 0.0 && d.length > 0.0, r.path(),
        "v_max and length must be positive");
  for (Param q : kAllParams) {
    const std::string key(Name(q));
    if (!r.Has(key)) continue;
    Reader lr = r.Object(key);
    ParamLaw& law = d[q];
    const std::string kind = lr.Get<std::string>(
        "law", law.law == Law::kLogNormal ? "lognormal" : "normal");
    if (kind == "lognormal") {
      law.law = Law::kLogNormal;
    } else if (kind == "normal") {
      law.law = Law::kNormal;
    } else {
      lr.Fail(fmt::format("unknown law '{}'", kind));
    }
    law.mean = lr.Get("mean", law.mean);
    law.stddev = lr.Get("stddev", law.stddev);
    if (lr.Has("truncation")) {
      law.truncation = ParseInterval(lr.Raw("truncation"), lr.Sub("truncation"));
    }
    lr.Done();
    Check(law.stddev >= 0.0, lr.path(), "stddev must be non-negative");
    Check(law.law == Law::kNormal || law.mean > 0.0, lr.path(),
          "log-normal mean must be positive");
    Check(law.truncation.lo > 0.0, lr.path(),
          "truncation must stay positive");
  }
  r.Done();
  return d;
}

ChainSpec ParseChain(Reader r, const ParamDistribution& dist) {
  ChainSpec c;
  c.label = r.Get<std::string>("label", c.label);
  Check(!c.label.empty() &&
            c.label.find_first_of("/\\ ,") == std::string::npos,
        r.Sub("label"), "label must be a non-empty word");
  const bool has_ratio = r.Has("v_eq_ratio");
  const bool has_veq = r.Has("v_eq");
  Check(!(has_ratio && has_veq), r.path(), "give v_eq or v_eq_ratio, not both");
  if (has_veq) {
    c.v_eq = r.Required<double>("v_eq");
  } else {
    c.v_eq = r.Get("v_eq_ratio", 0.5) * dist.v_max;
  }
  Check(c.v_eq > 0.0 && c.v_eq < dist.v_max, r.path(),
        "equilibrium speed must lie in (0, v_max)");

  int sources = 0;
  const IdmParams base = DefaultParams(dist);
  if (r.Has("vehicles")) {
    ++sources;
    c.source = ChainSpec::Source::kExplicit;
    const json& arr = r.Raw("vehicles");
    Check(arr.is_array(), r.Sub("vehicles"), "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      c.params.push_back(
          ParseParams(Reader(arr[k], fmt::format("{}[{}]", r.Sub("vehicles"), k)),
                      base));
    }
    c.count = static_cast<int>(c.params.size());
  }
  if (r.Has("homogeneous")) {
    ++sources;
    c.source = ChainSpec::Source::kHomogeneous;
    Reader h = r.Object("homogeneous");
    c.count = h.Required<int>("count");
    c.homogeneous = h.Has("params") ? ParseParams(h.Object("params"), base) : base;
    h.Done();
  }
  if (r.Has("sampled")) {
    ++sources;
    c.source = ChainSpec::Source::kSampled;
    Reader s = r.Object("sampled");
    c.count = s.Required<int>("count");
    s.Done();
  }
  if (r.Has("coefficients")) {
    ++sources;
    c.source = ChainSpec::Source::kCoefficients;
    const json& arr = r.Raw("coefficients");
    Check(arr.is_array(), r.Sub("coefficients"), "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string p = fmt::format("{}[{}]", r.Sub("coefficients"), k);
      const std::vector<double> f = Numbers(arr[k], p);
      Check(f.size() == 3, p, "expected [f1, f2, f3]");
      c.coefficients.push_back({f[0], f[1], f[2]});
    }
    c.count = static_cast<int>(c.coefficients.size());
  }
  Check(sources == 1, r.path(),
        "give exactly one of vehicles, homogeneous, sampled, coefficients");
  Check(c.count >= 1, r.path(), "the chain is empty");
  if (r.Has("automated")) {
    const json& arr = r.Raw("automated");
    Check(arr.is_array(), r.Sub("automated"), "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const int idx = Reader::Convert<int>(
          arr[k], fmt::format("{}[{}]", r.Sub("automated"), k));
      Check(idx >= 1 && idx <= c.count, r.Sub("automated"),
            "index outside the chain");
      c.automated.push_back(idx);
    }
  }
  r.Done();
  return c;
}

ContourSpec ParseContour(Reader r, const ParamDistribution& dist) {
  ContourSpec c;
  c.base = DefaultParams(dist);
  if (r.Has("a")) c.a = ParseInterval(r.Raw("a"), r.Sub("a"));
  if (r.Has("T")) c.T = ParseInterval(r.Raw("T"), r.Sub("T"));
  c.step = r.Get("step", c.step);
  if (r.Has("params")) c.base = ParseParams(r.Object("params"), c.base);
  c.v_eq = r.Get("v_eq_ratio", 1.0 / 3.0) * c.base.v_max;
  r.Done();
  Check(c.step > 0.0, r.path(), "step must be positive");
  Check(c.a.lo > 0.0 && c.T.lo > 0.0, r.path(), "ranges must be positive");
  return c;
}

AnalyzeSpec ParseAnalyze(Reader r, const ParamDistribution& dist) {
  AnalyzeSpec a;
  if (r.Has("pairs")) {
    const json& arr = r.Raw("pairs");
    Check(arr.is_array(), r.Sub("pairs"), "expected an array of [l, n]");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string p = fmt::format("{}[{}]", r.Sub("pairs"), k);
      Check(arr[k].is_array() && arr[k].size() == 2, p, "expected [l, n]");
      a.pairs.emplace_back(Reader::Convert<int>(arr[k][0], p),
                           Reader::Convert<int>(arr[k][1], p));
    }
  }
  if (r.Has("contour")) a.contour = ParseContour(r.Object("contour"), dist);
  r.Done();
  return a;
}

Disturbance ParseDisturbance(Reader r) {
  Disturbance d;
  d.vehicle = r.Get("vehicle", 1);
  const std::string type = r.Get<std::string>("type", "step");
  if (type == "step") {
    StepDisturbance s;
    s.amplitude = r.Get("amplitude", s.amplitude);
    s.t_on = r.Get("t_on", s.t_on);
    s.t_off = r.Get("t_off", s.t_off);
    Check(s.t_on >= 0.0 && s.t_off > s.t_on, r.path(),
          "need 0 <= t_on < t_off");
    d.kind = s;
  } else if (type == "prbs") {
    PrbsDisturbance p;
    p.amplitude = r.Get("amplitude", p.amplitude);
    p.hold_min = r.Get("hold_min", p.hold_min);
    p.hold_max = r.Get("hold_max", p.hold_max);
    p.duration = r.Get("duration", p.duration);
    p.start = r.Get("start", p.start);
    p.seed = r.Get<std::uint64_t>("seed", p.seed);
    Check(p.hold_min > 0.0 && p.hold_min <= p.hold_max &&
              p.hold_max <= p.duration && p.start >= 0.0,
          r.path(), "need 0 < hold_min <= hold_max <= duration, start >= 0");
    d.kind = p;
  } else {
    r.Fail(fmt::format("unknown disturbance type '{}'", type));
  }
  r.Done();
  return d;
}

SimulateSpec ParseSimulate(Reader r) {
  SimulateSpec s;
  s.duration = r.Get("duration", s.duration);
  s.dt = r.Get("dt", s.dt);
  if (r.Has("disturbance")) s.disturbance = ParseDisturbance(r.Object("disturbance"));
  if (r.Has("amplitudes")) {
    s.amplitudes = Numbers(r.Raw("amplitudes"), r.Sub("amplitudes"));
    Check(std::holds_alternative<StepDisturbance>(s.disturbance.kind),
          r.Sub("amplitudes"), "amplitude sweeps need a step disturbance");
  }
  s.trajectory_stride = r.Get("trajectory_stride", s.trajectory_stride);
  s.linear = r.Get("linear", s.linear);
  r.Done();
  Check(s.dt > 0.0 && s.dt <= kMaxDt, r.Sub("dt"),
        fmt::format("must lie in (0, {}]", kMaxDt));
  Check(s.duration >= s.disturbance.EndTime(), r.Sub("duration"),
        "shorter than the disturbance");
  Check(s.trajectory_stride >= 0, r.Sub("trajectory_stride"),
        "must be non-negative");
  return s;
}

SaConfig ParseSa(Reader r) {
  SaConfig sa;
  sa.budget = r.Get("budget", sa.budget);
  sa.t0 = r.Get("t0", sa.t0);
  sa.cooling = r.Get("cooling", sa.cooling);
  sa.period = r.Get("period", sa.period);
  sa.step_fraction = r.Get("step_fraction", sa.step_fraction);
  sa.chains = r.Get("chains", sa.chains);
  r.Done();
  Check(sa.budget >= 1, r.Sub("budget"), "must be >= 1");
  Check(sa.t0 >= 0.0, r.Sub("t0"), "must be >= 0");
  Check(sa.cooling > 0.0 && sa.cooling <= 1.0, r.Sub("cooling"),
        "must lie in (0, 1]");
  Check(sa.period >= 1, r.Sub("period"), "must be >= 1");
  Check(sa.step_fraction > 0.0, r.Sub("step_fraction"), "must be positive");
  Check(sa.chains >= 1, r.Sub("chains"), "must be >= 1");
  return sa;
}

std::vector<FictitiousVehicle> ParseFictitious(const json& arr,
                                               const std::string& path,
                                               const ParamDistribution& dist) {
  Check(arr.is_array(), path, "expected an array");
  std::vector<FictitiousVehicle> out;
  IdmParams wc = kWorstCaseParams;
  wc.v_max = dist.v_max;
  wc.length = dist.length;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string p = fmt::format("{}[{}]", path, k);
    Check(arr[k].is_object(), p, "expected an object");
    json params = arr[k];
    FictitiousVehicle f;
    if (params.contains("side")) {
      const std::string side = Reader::Convert<std::string>(params["side"], p + ".side");
      if (side == "upstream") {
        f.side = Side::kUpstream;
      } else if (side == "downstream") {
        f.side = Side::kDownstream;
      } else {
        throw ConfigError(p + ".side: expected upstream or downstream");
      }
      params.erase("side");
    }
    // Unspecified fields default to the worst-case driver.
    f.params = ParseParams(Reader(params, p), wc);
    out.push_back(f);
  }
  return out;
}

ProblemOptions ParseProblem(Reader& r, const ParamDistribution& dist) {
  ProblemOptions o;
  o.alpha = r.Get("alpha", o.alpha);
  Check(o.alpha > 0.0, r.Sub("alpha"), "must be positive");
  if (r.Has("free")) {
    const json& arr = r.Raw("free");
    Check(arr.is_array() && !arr.empty(), r.Sub("free"),
          "expected a non-empty array of parameter names");
    o.free.clear();
    for (const json& v : arr) {
      const std::string name = Reader::Convert<std::string>(v, r.Sub("free"));
      const Param q = ParseParam(name);
      Check(std::find(o.free.begin(), o.free.end(), q) == o.free.end(),
            r.Sub("free"), "repeated parameter");
      o.free.push_back(q);
    }
  }
  if (r.Has("window")) {
    Reader w = r.Object("window");
    o.upstream = w.Get("upstream", o.upstream);
    o.downstream = w.Get("downstream", o.downstream);
    o.nested_windows = w.Get("nested", o.nested_windows);
    w.Done();
    Check(o.upstream >= 0 && o.downstream >= 0, r.Sub("window"),
          "offsets must be non-negative");
  }
  o.t_upper = r.Get("t_upper", o.t_upper);
  Check(o.t_upper >= 0.0, r.Sub("t_upper"), "must be non-negative");
  const std::string metric = r.Get<std::string>("metric", "inverse_variance");
  if (metric == "inverse_variance") {
    o.metric = PenaltyMetric::kInverseVariance;
  } else if (metric == "inverse_stddev") {
    o.metric = PenaltyMetric::kInverseStddev;
  } else {
    r.Fail("metric must be inverse_variance or inverse_stddev");
  }
  if (r.Has("fictitious")) {
    o.fictitious = ParseFictitious(r.Raw("fictitious"), r.Sub("fictitious"), dist);
  }
  o.io_gain_weight = r.Get("io_gain_weight", o.io_gain_weight);
  Check(o.io_gain_weight >= 0.0, r.Sub("io_gain_weight"), "must be >= 0");
  return o;
}

ExperimentConfig ParseExperiment(Reader r, const ScenarioConfig& cfg) {
  ExperimentConfig e;
  e.distribution = cfg.distribution;
  e.vehicles = r.Get("vehicles", e.vehicles);
  Check(e.vehicles >= 2, r.Sub("vehicles"), "need at least 2 vehicles");
  e.v_eq_ratio = r.Get("v_eq_ratio", e.v_eq_ratio);
  Check(e.v_eq_ratio > 0.0 && e.v_eq_ratio < 1.0, r.Sub("v_eq_ratio"),
        "must lie in (0, 1)");
  Check(!(r.Has("seeds") && r.Has("seed_count")), r.path(),
        "give seeds or seed_count, not both");
  if (r.Has("seeds")) {
    const json& arr = r.Raw("seeds");
    Check(arr.is_array() && !arr.empty(), r.Sub("seeds"),
          "expected a non-empty array");
    for (const json& v : arr) {
      e.seeds.push_back(Reader::Convert<std::uint64_t>(v, r.Sub("seeds")));
    }
  } else {
    const int n = r.Get("seed_count", 25);
    Check(n >= 1, r.Sub("seed_count"), "must be >= 1");
    // Consecutive seeds starting at the scenario seed.
    for (int k = 0; k < n; ++k) e.seeds.push_back(cfg.seed + k);
  }
  Check(!(r.Has("fractions") && r.Has("arms")), r.path(),
        "give fractions or arms, not both");
  if (r.Has("arms")) {
    const json& arr = r.Raw("arms");
    Check(arr.is_array() && !arr.empty(), r.Sub("arms"),
          "expected a non-empty array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      Reader a(arr[k], fmt::format("{}[{}]", r.Sub("arms"), k));
      ExperimentArm arm;
      arm.label = a.Get<std::string>("label", fmt::format("arm{}", k));
      Check(a.Has("fraction") != a.Has("av_count"), a.path(),
            "give fraction or av_count");
      if (a.Has("fraction")) arm.fraction = a.Required<double>("fraction");
      if (a.Has("av_count")) arm.av_count = a.Required<int>("av_count");
      if (a.Has("fictitious")) {
        arm.fictitious = ParseFictitious(a.Raw("fictitious"),
                                         a.Sub("fictitious"), cfg.distribution);
      }
      arm.t_upper = a.Get("t_upper", 0.0);
      a.Done();
      const int count = arm.av_count
                            ? *arm.av_count
                            : static_cast<int>(std::lround(arm.fraction * e.vehicles));
      Check(count >= 0 && count < e.vehicles, a.path(),
            "AV count must lie in [0, vehicles - 1]");
      e.arms.push_back(arm);
    }
  } else {
    const std::vector<double> fractions =
        r.Has("fractions") ? Numbers(r.Raw("fractions"), r.Sub("fractions"))
                           : std::vector<double>{0.0, 0.1, 0.2, 0.3};
    for (double f : fractions) {
      Check(f >= 0.0 && std::lround(f * e.vehicles) < e.vehicles,
            r.Sub("fractions"), "fraction out of range");
    }
    e.arms = FractionArms(fractions);
  }
  if (r.Has("prbs")) {
    Reader p = r.Object("prbs");
    e.prbs.amplitude = p.Get("amplitude", e.prbs.amplitude);
    e.prbs.hold_min = p.Get("hold_min", e.prbs.hold_min);
    e.prbs.hold_max = p.Get("hold_max", e.prbs.hold_max);
    e.prbs.duration = p.Get("duration", e.prbs.duration);
    e.prbs.start = p.Get("start", e.prbs.start);
    p.Done();
    Check(e.prbs.hold_min > 0.0 && e.prbs.hold_min <= e.prbs.hold_max &&
              e.prbs.hold_max <= e.prbs.duration,
          p.path(), "need 0 < hold_min <= hold_max <= duration");
  }
  e.duration = r.Get("duration", e.duration);
  e.dt = r.Get("dt", e.dt);
  Check(e.dt > 0.0 && e.dt <= kMaxDt, r.Sub("dt"), "out of range");
  Check(e.duration >= e.prbs.start + e.prbs.duration, r.Sub("duration"),
        "shorter than the disturbance");
  r.Done();
  return e;
}

OptimizeSpec ParseOptimize(Reader r, const ScenarioConfig& cfg) {
  OptimizeSpec o;
  const std::string mode = r.Get<std::string>("mode", "single");
  if (mode == "single") {
    o.mode = OptimizeSpec::Mode::kSingle;
  } else if (mode == "experiment") {
    o.mode = OptimizeSpec::Mode::kExperiment;
  } else {
    r.Fail("mode must be single or experiment");
  }
  o.av_index = r.Get("av_index", o.av_index);
  o.problem = ParseProblem(r, cfg.distribution);
  if (r.Has("sa")) o.sa = ParseSa(r.Object("sa"));
  if (o.mode == OptimizeSpec::Mode::kExperiment) {
    Check(r.Has("experiment"), r.path(), "experiment mode needs 'experiment'");
    o.experiment = ParseExperiment(r.Object("experiment"), cfg);
    o.experiment.sa = o.sa;
    o.experiment.problem = o.problem;
    Check(o.problem.fictitious.empty() && o.problem.t_upper == 0.0, r.path(),
          "in experiment mode fictitious vehicles and t_upper belong to arms");
  } else {
    Check(!r.Has("experiment"), r.Sub("experiment"),
          "only allowed with mode experiment");
    Check(!cfg.chains.empty(), r.path(), "single mode needs a chain");
    const ChainSpec& c = cfg.chains.front();
    Check(c.source != ChainSpec::Source::kCoefficients, r.path(),
          "optimization needs behavioural parameters, not coefficients");
    Check(o.av_index >= 1 && o.av_index <= c.count, r.Sub("av_index"),
          "outside the chain");
  }
  r.Done();
  return o;
}

}  // namespace

ScenarioConfig ParseConfig(const std::string& text,
                           std::optional<std::uint64_t> seed) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
  }
  Reader r(root, "");
  ScenarioConfig cfg;
  cfg.schema_version = r.Required<int>("schema_version");
  Check(cfg.schema_version == kSchemaVersion, "schema_version",
        fmt::format("unsupported version {} (expected {})", cfg.schema_version,
                    kSchemaVersion));
  cfg.seed = r.Get<std::uint64_t>("seed", cfg.seed);
  if (seed) cfg.seed = *seed;
  cfg.output_dir = r.Get<std::string>("output_dir", cfg.output_dir.string());
  if (r.Has("distribution")) cfg.distribution = ParseDistribution(r.Object("distribution"));

  Check(!(r.Has("chain") && r.Has("chains")), "<root>",
        "give chain or chains, not both");
  if (r.Has("chain")) cfg.chains.push_back(ParseChain(r.Object("chain"), cfg.distribution));
  if (r.Has("chains")) {
    const json& arr = r.Raw("chains");
    Check(arr.is_array() && !arr.empty(), "chains", "expected a non-empty array");
    std::set<std::string> labels;
    for (std::size_t k = 0; k < arr.size(); ++k) {
      cfg.chains.push_back(ParseChain(Reader(arr[k], fmt::format("chains[{}]", k)),
                                      cfg.distribution));
      Check(labels.insert(cfg.chains.back().label).second,
            fmt::format("chains[{}]", k), "duplicate label");
    }
  }
  if (r.Has("analyze")) cfg.analyze = ParseAnalyze(r.Object("analyze"), cfg.distribution);
  if (r.Has("simulate")) cfg.simulate = ParseSimulate(r.Object("simulate"));
  if (r.Has("optimize")) cfg.optimize = ParseOptimize(r.Object("optimize"), cfg);
  if (r.Has("ring")) {
    Reader rr = r.Object("ring");
    RingSpec ring;
    ring.tolerance = rr.Get("tolerance", ring.tolerance);
    rr.Done();
    Check(ring.tolerance > 0.0, "ring.tolerance", "must be positive");
    cfg.ring = ring;
  }
  if (r.Has("sample")) {
    Reader s = r.Object("sample");
    SampleSpec spec;
    spec.count = s.Get("count", spec.count);
    s.Done();
    Check(spec.count >= 1, "sample.count", "must be >= 1");
    cfg.sample = spec;
  }
  r.Done();
  return cfg;
}

ScenarioConfig LoadConfig(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str(), seed);
}

VehicleChain BuildChain(const ChainSpec& spec,
                        const ParamDistribution& distribution,
                        std::uint64_t seed) {
  switch (spec.source) {
    case ChainSpec::Source::kExplicit: {
      VehicleChain c = VehicleChain::FromParams(spec.params, spec.v_eq);
      for (int idx : spec.automated) c.vehicles[idx - 1].automated = true;
      return c;
    }
    case ChainSpec::Source::kHomogeneous: {
      VehicleChain c =
          VehicleChain::Homogeneous(spec.homogeneous, spec.count, spec.v_eq);
      for (int idx : spec.automated) c.vehicles[idx - 1].automated = true;
      return c;
    }
    case ChainSpec::Source::kSampled: {
      VehicleChain c = VehicleChain::FromParams(
          SampleParams(distribution,
                       DeriveSeed(seed, static_cast<std::uint64_t>(Stream::kParams)),
                       spec.count),
          spec.v_eq);
      for (int idx : spec.automated) c.vehicles[idx - 1].automated = true;
      return c;
    }
    case ChainSpec::Source::kCoefficients:
      break;
  }
  throw ConfigError(fmt::format(
      "chain '{}' is given by coefficients only and cannot be simulated",
      spec.label));
}

std::vector<LinearCoeffs> ChainCoefficients(
    const ChainSpec& spec, const ParamDistribution& distribution,
    std::uint64_t seed) {
  if (spec.source == ChainSpec::Source::kCoefficients) return spec.coefficients;
  return BuildChain(spec, distribution, seed).Coefficients();
}

}  // namespace strstab
