#include "strstab/commands.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "strstab/csv.h"
#include "strstab/errors.h"
#include "strstab/experiment.h"
#include "strstab/linear.h"
#include "strstab/optimize.h"
#include "strstab/ring.h"
#include "strstab/sim.h"

namespace strstab {
namespace {

namespace fs = std::filesystem;

using Num = std::string;
Num N(double x) { return FormatNumber(x); }
Num I(long long x) { return fmt::format("{}", x); }

class Output {
 public:
  Output(const ScenarioConfig& cfg, const Overrides& o)
      : dir_(o.out ? *o.out : cfg.output_dir) {}

  void Save(const CsvWriter& w, const std::string& file) {
    const fs::path p = dir_ / file;
    w.Save(p);
    result_.files.push_back(p);
  }

  template <typename... Args>
  void Line(fmt::format_string<Args...> f, Args&&... args) {
    result_.summary += fmt::format(f, std::forward<Args>(args)...);
    result_.summary += '\n';
  }

  CommandOutput Finish(const std::string& command) {
    fs::create_directories(dir_);
    const fs::path p = dir_ / (command + "_summary.txt");
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", p.string()));
    out << result_.summary;
    result_.files.push_back(p);
    return std::move(result_);
  }

 private:
  fs::path dir_;
  CommandOutput result_;
};

void Require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

const char* YesNo(bool b) { return b ? "yes" : "no"; }

std::vector<std::pair<int, int>> DefaultPairs(int m) {
  std::vector<std::pair<int, int>> pairs;
  for (int n = 1; n <= m; ++n) pairs.emplace_back(n - 1, n);
  if (m > 1) pairs.emplace_back(0, m);
  return pairs;
}

void WriteContour(const ContourSpec& c, Output& out) {
  CsvWriter w(schema::Contour());
  const int na = static_cast<int>(std::floor(c.a.Width() / c.step + 1e-9)) + 1;
  const int nt = static_cast<int>(std::floor(c.T.Width() / c.step + 1e-9)) + 1;
  int positive = 0;
  for (int i = 0; i < na; ++i) {
    for (int k = 0; k < nt; ++k) {
      IdmParams p = c.base;
      p.a = c.a.lo + i * c.step;
      p.T = c.T.lo + k * c.step;
      const double s = StringStabilityCoefficient(Linearize(p, c.v_eq));
      if (s >= 0.0) ++positive;
      w.AddRow({N(p.a), N(p.T), N(s)});
    }
  }
  out.Save(w, "contour.csv");
  out.Line("contour: {} x {} grid over a in [{}, {}], T in [{}, {}] at v_eq={:.4g}",
           na, nt, c.a.lo, c.a.hi, c.T.lo, c.T.hi, c.v_eq);
  out.Line("contour: S >= 0 at {} of {} points", positive, na * nt);
}

}  // namespace

CommandOutput Analyze(const ScenarioConfig& cfg, const Overrides& o) {
  Require(cfg.analyze.has_value(), "the config has no 'analyze' section");
  const AnalyzeSpec& spec = *cfg.analyze;
  Require(!cfg.chains.empty() || spec.contour, "nothing to analyze");
  Output out(cfg, o);
  for (const ChainSpec& chain : cfg.chains) {
    const std::vector<LinearCoeffs> coeffs =
        ChainCoefficients(chain, cfg.distribution, cfg.seed);
    const auto pairs =
        spec.pairs.empty() ? DefaultPairs(static_cast<int>(coeffs.size()))
                           : spec.pairs;
    const StabilityReport rep = AnalyzeCoefficients(coeffs, pairs);

    CsvWriter vw(schema::Vehicles());
    out.Line("chain {}: {} vehicles", chain.label, coeffs.size());
    for (const VehicleStability& v : rep.vehicles) {
      vw.AddRow({I(v.index), N(v.coeffs.f1), N(v.coeffs.f2), N(v.coeffs.f3),
                 N(v.s), N(v.hinf), N(v.peak_freq), N(v.mimo_hinf),
                 I(v.l2_strict), I(v.linf_monotone), I(v.norm_equality),
                 I(v.mimo_sufficient)});
      out.Line("  vehicle {}: f=({:.4g}, {:.4g}, {:.4g}) S={:.4g} "
               "||Gamma||={:.4f} strict L2 stable: {}",
               v.index, v.coeffs.f1, v.coeffs.f2, v.coeffs.f3, v.s, v.hinf,
               YesNo(v.l2_strict));
    }
    CsvWriter pw(schema::Pairs());
    for (const PairGain& p : rep.pairs) {
      pw.AddRow({I(p.l), I(p.n), N(p.gamma), N(p.peak_freq),
                 N(p.product_of_norms), I(p.weakly_stable)});
      out.Line("  pair ({}, {}): gain={:.4f} product of norms={:.4f} "
               "weakly stable: {}",
               p.l, p.n, p.gamma, p.product_of_norms, YesNo(p.weakly_stable));
    }
    out.Save(vw, fmt::format("vehicles_{}.csv", chain.label));
    out.Save(pw, fmt::format("pairs_{}.csv", chain.label));
  }
  if (spec.contour) WriteContour(*spec.contour, out);
  return out.Finish("analyze");
}

CommandOutput SimulateCommand(const ScenarioConfig& cfg, const Overrides& o) {
  Require(cfg.simulate.has_value(), "the config has no 'simulate' section");
  Require(!cfg.chains.empty(), "the config has no chain to simulate");
  const SimulateSpec& spec = *cfg.simulate;
  const double dt = o.dt ? *o.dt : spec.dt;
  Require(dt > 0.0 && dt <= kMaxDt,
          fmt::format("dt must lie in (0, {}]", kMaxDt));
  Output out(cfg, o);

  for (const ChainSpec& cs : cfg.chains) {
    const VehicleChain chain = BuildChain(cs, cfg.distribution, cfg.seed);
    Require(spec.disturbance.vehicle >= 1 &&
                spec.disturbance.vehicle <= chain.size(),
            "the disturbed vehicle is outside the chain");
    std::vector<std::pair<std::string, Disturbance>> runs;
    if (spec.amplitudes.empty()) {
      runs.emplace_back(cs.label, spec.disturbance);
    } else {
      for (double amp : spec.amplitudes) {
        Disturbance d = spec.disturbance;
        std::get<StepDisturbance>(d.kind).amplitude = amp;
        runs.emplace_back(fmt::format("{}_amp{:g}", cs.label, amp), d);
      }
    }
    CsvWriter sweep(schema::Sweep());
    for (const auto& [tag, dist] : runs) {
      const Trajectory traj =
          spec.linear ? SimulateLinear(chain, dist, spec.duration, dt)
                      : Simulate(chain, dist, spec.duration, dt);
      const NormProfile prof = ComputeNormProfile(traj);

      CsvWriter pw(schema::Profile());
      for (int i = 0; i < traj.vehicles(); ++i) {
        pw.AddRow({I(i + 1), N(prof.l2[i]), N(prof.linf[i])});
        if (!spec.amplitudes.empty()) {
          sweep.AddRow({N(std::get<StepDisturbance>(dist.kind).amplitude),
                        I(i + 1), N(prof.l2[i]), N(prof.linf[i]),
                        I(static_cast<long long>(traj.clamp_events.size()))});
        }
      }
      out.Save(pw, fmt::format("profile_{}.csv", tag));

      if (spec.trajectory_stride > 0) {
        CsvWriter tw(schema::Trajectory());
        for (int k = 0; k < traj.samples(); k += spec.trajectory_stride) {
          for (int i = 0; i < traj.vehicles(); ++i) {
            tw.AddRow({N(traj.time[k]), I(i + 1), N(traj.position[i][k]),
                       N(traj.speed[i][k]), N(traj.acceleration[i][k])});
          }
        }
        out.Save(tw, fmt::format("trajectory_{}.csv", tag));
      }
      CsvWriter cw(schema::Clamps());
      for (const ClampEvent& e : traj.clamp_events) {
        cw.AddRow({N(e.time), I(e.vehicle)});
      }
      out.Save(cw, fmt::format("clamps_{}.csv", tag));

      out.Line("run {}: {} vehicles, {} s at dt={} ({})", tag, traj.vehicles(),
               spec.duration, dt, spec.linear ? "linearized" : "nonlinear");
      out.Line("  L2 first={:.6g} last={:.6g} non-increasing: {}",
               prof.l2.front(), prof.l2.back(),
               YesNo(IsNonIncreasing(prof.l2)));
      out.Line("  Linf first={:.6g} last={:.6g} non-increasing: {}",
               prof.linf.front(), prof.linf.back(),
               YesNo(IsNonIncreasing(prof.linf)));
      out.Line("  zero-speed clamp events: {}", traj.clamp_events.size());
    }
    if (!spec.amplitudes.empty()) {
      out.Save(sweep, fmt::format("sweep_{}.csv", cs.label));
    }
  }
  return out.Finish("simulate");
}

namespace {

OptimizeSpec WithTuning(OptimizeSpec spec, const Overrides& o) {
  for (SaConfig* sa : {&spec.sa, &spec.experiment.sa}) {
    if (o.budget) sa->budget = *o.budget;
  }
  for (ProblemOptions* p : {&spec.problem, &spec.experiment.problem}) {
    if (o.alpha) p->alpha = *o.alpha;
    if (o.window) std::tie(p->upstream, p->downstream) = *o.window;
  }
  Require(spec.sa.budget >= 1, "the SA budget must be at least 1");
  Require(spec.problem.alpha > 0.0, "alpha must be positive");
  Require(spec.problem.upstream >= 0 && spec.problem.downstream >= 0,
          "window offsets must be non-negative");
  if (spec.mode == OptimizeSpec::Mode::kSingle) {
    if (o.t_upper) spec.problem.t_upper = *o.t_upper;
    spec.problem.fictitious.insert(spec.problem.fictitious.end(),
                                   o.fictitious.begin(), o.fictitious.end());
  } else {
    for (ExperimentArm& arm : spec.experiment.arms) {
      if (o.t_upper) arm.t_upper = *o.t_upper;
      arm.fictitious.insert(arm.fictitious.end(), o.fictitious.begin(),
                            o.fictitious.end());
    }
  }
  return spec;
}

CommandOutput OptimizeSingle(const ScenarioConfig& cfg, const OptimizeSpec& spec,
                             const Overrides& o) {
  Output out(cfg, o);
  const VehicleChain chain =
      BuildChain(cfg.chains.front(), cfg.distribution, cfg.seed);
  const OptimizationProblem problem =
      MakeProblem(chain, spec.av_index, cfg.distribution, spec.problem);
  const Evaluation before = Objective(problem, problem.theta_hat);
  const OptimizationResult r = OptimizeAv(problem, spec.sa, cfg.seed);

  CsvWriter ow(schema::Optimization());
  for (Param q : kAllParams) {
    ow.AddRow({I(spec.av_index), std::string(Name(q)),
               N(Get(problem.theta_hat, q)), N(Get(r.theta_star, q)),
               N(problem.box[q].lo), N(problem.box[q].hi)});
  }
  out.Save(ow, "optimization.csv");
  CsvWriter tw(schema::Trace());
  for (std::size_t k = 0; k < r.trace.best_so_far.size(); ++k) {
    tw.AddRow({I(static_cast<long long>(k)), N(r.trace.best_so_far[k])});
  }
  out.Save(tw, "trace.csv");

  out.Line("vehicle {}: windows {}", spec.av_index, [&] {
    std::string s;
    for (const Window& w : problem.windows) s += fmt::format("({}, {}) ", w.i, w.j);
    return s;
  }());
  out.Line("  fictitious vehicles: {}", problem.fictitious.size());
  out.Line("  reference: a={:.4f} b={:.4f} T={:.4f} gamma={:.6f} objective={:.6f}",
           problem.theta_hat.a, problem.theta_hat.b, problem.theta_hat.T,
           before.gamma, before.value);
  out.Line("  optimized: a={:.4f} b={:.4f} T={:.4f} gamma={:.6f} objective={:.6f}",
           r.theta_star.a, r.theta_star.b, r.theta_star.T, r.gamma_star,
           r.objective);
  out.Line("  proposals accepted={} rejected={} infeasible={}",
           r.trace.accepted, r.trace.rejected, r.trace.infeasible);
  bool certified = true;
  for (const Window& w : problem.windows) {
    certified = certified &&
                BoundedRealCheck(WindowCoefficients(problem, r.theta_star, w),
                                 r.gamma_star + 1e-6);
  }
  out.Line("  bounded-real certificate at gamma+1e-6: {}", YesNo(certified));
  return out.Finish("optimize");
}

CommandOutput OptimizeExperiment(const ScenarioConfig& cfg,
                                 const OptimizeSpec& spec, const Overrides& o) {
  Output out(cfg, o);
  ExperimentConfig ec = spec.experiment;
  if (o.threads) ec.threads = *o.threads;
  if (o.dt) ec.dt = *o.dt;
  Require(ec.dt > 0.0 && ec.dt <= kMaxDt,
          fmt::format("dt must lie in (0, {}]", kMaxDt));
  const ExperimentReport rep = RunExperiment(ec);

  CsvWriter ew(schema::Experiment());
  CsvWriter cw(schema::Cells());
  CsvWriter aw(schema::ExperimentAvs());
  std::size_t failed = 0;
  for (const CellResult& c : rep.cells) {
    const std::string& label = ec.arms[c.arm].label;
    cw.AddRow({I(static_cast<long long>(c.seed)), I(c.arm), label, I(c.ok),
               I(c.collision), I(static_cast<long long>(c.avs.size())),
               I(static_cast<long long>(c.clamp_events)), c.error});
    if (!c.ok) {
      ++failed;
      continue;
    }
    for (std::size_t i = 0; i < c.profile.l2.size(); ++i) {
      ew.AddRow({I(static_cast<long long>(c.seed)), I(c.arm), label,
                 I(static_cast<long long>(i + 1)), N(c.profile.l2[i]),
                 N(c.profile.linf[i]),
                 c.relative_l2.empty() ? "nan" : N(c.relative_l2[i])});
    }
    for (const AvOutcome& av : c.avs) {
      aw.AddRow({I(static_cast<long long>(c.seed)), I(c.arm), I(av.index),
                 N(av.reference.a), N(av.reference.b), N(av.reference.T),
                 N(av.reference.s0), N(av.optimized.a), N(av.optimized.b),
                 N(av.optimized.T), N(av.optimized.s0), N(av.gamma_before),
                 N(av.gamma_after)});
    }
  }
  out.Save(ew, "experiment.csv");
  out.Save(cw, "cells.csv");
  out.Save(aw, "experiment_avs.csv");

  CsvWriter sw(schema::ExperimentStats());
  const std::vector<ProfileStats> stats = ProfileStatistics(rep);
  out.Line("experiment: {} vehicles, {} seeds, {} arms, {} failed cells",
           ec.vehicles, ec.seeds.size(), ec.arms.size(), failed);
  for (const ProfileStats& st : stats) {
    const std::string& label = ec.arms[st.arm].label;
    for (int i = 0; i < ec.vehicles; ++i) {
      sw.AddRow({I(st.arm), label, I(i + 1), I(static_cast<long long>(st.runs)),
                 N(st.mean[i]), N(st.stddev[i]), N(st.rel_mean[i]),
                 N(st.rel_min[i]), N(st.rel_max[i])});
    }
    if (st.runs == 0) {
      out.Line("  arm {}: no successful run", label);
      continue;
    }
    out.Line("  arm {}: runs={} L2 at vehicle {} mean={:.5g} std={:.5g} "
             "relative mean={:+.4f} min={:+.4f} max={:+.4f}",
             label, st.runs, ec.vehicles, st.mean.back(), st.stddev.back(),
             st.rel_mean.back(), st.rel_min.back(), st.rel_max.back());
  }
  out.Save(sw, "experiment_stats.csv");

  CsvWriter psw(schema::ParamShifts());
  for (const ParamShift& s : ParameterShifts(rep)) {
    const std::string& label = ec.arms[s.arm].label;
    psw.AddRow({I(s.arm), label, std::string(Name(s.param)),
                I(static_cast<long long>(s.count)), N(s.reference_median),
                N(s.optimized_median), N(s.reference_mean),
                N(s.optimized_mean)});
    out.Line("  arm {} {}: median {:.4f} -> {:.4f} over {} AVs", label,
             Name(s.param), s.reference_median, s.optimized_median, s.count);
  }
  out.Save(psw, "param_shifts.csv");
  if (failed == rep.cells.size()) {
    throw Error("every experiment cell failed; see cells.csv");
  }
  return out.Finish("optimize");
}

}  // namespace

CommandOutput OptimizeCommand(const ScenarioConfig& cfg, const Overrides& o) {
  Require(cfg.optimize.has_value(), "the config has no 'optimize' section");
  const OptimizeSpec spec = WithTuning(*cfg.optimize, o);
  if (spec.mode == OptimizeSpec::Mode::kExperiment) {
    return OptimizeExperiment(cfg, spec, o);
  }
  return OptimizeSingle(cfg, spec, o);
}

FictitiousVehicle ParseFictitious(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  if (parts.size() != 4 && parts.size() != 5) {
    throw ConfigError(fmt::format(
        "fictitious vehicle '{}' is not a,b,T,s0[,side]", text));
  }
  FictitiousVehicle f;
  try {
    f.params.a = std::stod(parts[0]);
    f.params.b = std::stod(parts[1]);
    f.params.T = std::stod(parts[2]);
    f.params.s0 = std::stod(parts[3]);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("fictitious vehicle '{}': bad number", text));
  }
  if (parts.size() == 5) {
    if (parts[4] == "upstream") {
      f.side = Side::kUpstream;
    } else if (parts[4] == "downstream") {
      f.side = Side::kDownstream;
    } else {
      throw ConfigError(fmt::format("fictitious vehicle '{}': side must be "
                                    "upstream or downstream", text));
    }
  }
  try {
    ValidateParams(f.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("fictitious vehicle '{}': {}", text, e.what()));
  }
  return f;
}

CommandOutput RingCommand(const ScenarioConfig& cfg, const Overrides& o) {
  Require(cfg.ring.has_value(), "the config has no 'ring' section");
  Require(!cfg.chains.empty(), "the config has no chain to close");
  Output out(cfg, o);
  for (const ChainSpec& cs : cfg.chains) {
    const std::vector<LinearCoeffs> coeffs =
        ChainCoefficients(cs, cfg.distribution, cfg.seed);
    Require(coeffs.size() >= 2, "a ring needs at least 2 vehicles");
    const RingSpectrum spec = AnalyzeRing(coeffs, cfg.ring->tolerance);
    CsvWriter w(schema::Ring());
    for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k) {
      const auto& l = spec.eigenvalues[k];
      w.AddRow({I(static_cast<long long>(k)), N(l.real()), N(l.imag()),
                I(std::abs(l) <= cfg.ring->tolerance)});
    }
    out.Save(w, fmt::format("ring_{}.csv", cs.label));

    double worst = 1.0;
    for (const LinearCoeffs& c : coeffs) {
      worst = std::max(worst, HinfSecondOrder(c).gamma);
    }
    const double chain_gain = HinfChain(coeffs).gamma;
    const bool open_stable = worst <= 1.0 + kWeakStabilityTol;
    out.Line("ring {}: {} vehicles, {} eigenvalues, {} structural, "
             "max Re (non-structural) = {:.6g}",
             cs.label, coeffs.size(), spec.eigenvalues.size(),
             spec.structural.size(), spec.max_real_part);
    out.Line("  open chain: max ||Gamma|| = {:.4f}, product gain = {:.4f}",
             worst, chain_gain);
    out.Line("  verdict: {} ring, {} open chain",
             spec.stable ? "stable" : "unstable",
             open_stable ? "string-stable" : "string-unstable");
  }
  return out.Finish("ring");
}

CommandOutput SampleCommand(const ScenarioConfig& cfg, const Overrides& o) {
  Require(cfg.sample.has_value(), "the config has no 'sample' section");
  Output out(cfg, o);
  const std::vector<IdmParams> params = SampleParams(
      cfg.distribution,
      DeriveSeed(cfg.seed, static_cast<std::uint64_t>(Stream::kParams)),
      cfg.sample->count);
  CsvWriter w(schema::Samples());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const IdmParams& p = params[k];
    w.AddRow({I(static_cast<long long>(k + 1)), N(p.a), N(p.b), N(p.T),
              N(p.s0)});
  }
  out.Save(w, "samples.csv");
  out.Line("samples: {}", params.size());
  for (Param q : kAllParams) {
    double mean = 0.0;
    for (const IdmParams& p : params) mean += Get(p, q);
    mean /= static_cast<double>(params.size());
    double var = 0.0;
    for (const IdmParams& p : params) {
      var += (Get(p, q) - mean) * (Get(p, q) - mean);
    }
    const double sd =
        params.size() > 1 ? std::sqrt(var / (params.size() - 1.0)) : 0.0;
    out.Line("  {}: mean={:.4f} sd={:.4f}", Name(q), mean, sd);
  }
  return out.Finish("sample");
}

int RunCommand(const std::string& command, const fs::path& config_path,
               const Overrides& overrides, std::ostream& out,
               std::ostream& err) {
  try {
    if (overrides.threads && *overrides.threads < 1) {
      throw ConfigError("--threads must be >= 1");
    }
    const ScenarioConfig cfg = LoadConfig(config_path, overrides.seed);
    CommandOutput result;
    if (command == "analyze") {
      result = Analyze(cfg, overrides);
    } else if (command == "simulate") {
      result = SimulateCommand(cfg, overrides);
    } else if (command == "optimize") {
      result = OptimizeCommand(cfg, overrides);
    } else if (command == "ring") {
      result = RingCommand(cfg, overrides);
    } else if (command == "sample") {
      result = SampleCommand(cfg, overrides);
    } else {
      throw ConfigError(fmt::format("unknown command '{}'", command));
    }
    out << result.summary;
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CollisionError& e) {
    err << "collision: " << e.what() << '\n';
    return kExitCollision;
  } catch (const std::exception& e) {
    err << "computation error: " << e.what() << '\n';
    return kExitComputation;
  }
}

}  // namespace strstab
