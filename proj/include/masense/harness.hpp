#pragma once

// Monte Carlo harness: scene draws from the priors, one trial per
// (snr, sigma, trial) across the benchmark methods, and the sweep with its
// per-trial and aggregate CSV tables.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "masense/error.hpp"
#include "masense/estimation.hpp"
#include "masense/geometry.hpp"
#include "masense/moments.hpp"
#include "masense/orientation.hpp"
#include "masense/pairing.hpp"
#include "masense/random.hpp"
#include "masense/signal.hpp"

namespace masense {

enum class Method : std::uint64_t { MapRot = 0, MapNorot = 1, SompRot = 2, SompNorot = 3, SinglePath = 4 };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::MapRot: return "map_rot";
    case Method::MapNorot: return "map_norot";
    case Method::SompRot: return "somp_rot";
    case Method::SompNorot: return "somp_norot";
    case Method::SinglePath: return "single_path";
  }
  return "?";
}

inline Method method_from_string(std::string_view s) {
  for (Method m : {Method::MapRot, Method::MapNorot, Method::SompRot, Method::SompNorot, Method::SinglePath})
    if (to_string(m) == s) return m;
  throw Error(ErrorCode::ConfigError, "unknown method '" + std::string(s) + "'");
}

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::MapRot, Method::MapNorot, Method::SompRot, Method::SompNorot,
                                     Method::SinglePath};
  return m;
}

struct ExperimentConfig {
  SystemConfig system;
  std::vector<PathPrior> priors;
  EpsilonConfig eps;
  bool auto_epsilon = true;  // walk up the ladder when eps is infeasible
  std::vector<double> epsilon_ladder = default_epsilon_ladder();
  std::vector<double> snr_grid{10.0};
  std::vector<double> sigma_grid{4.0};  // replaces every sigma and varsigma
  std::size_t trials = 200;
  std::vector<Method> methods = all_methods();
  std::uint64_t seed = 1;
  MusicConfig music;
  SompConfig somp;
  SolverConfig solver;
  double max_delay_s = 200e-9;
  bool record_timing = false;

  void validate() const {
    if (trials < 1) throw Error(ErrorCode::ConfigError, "trials must be >= 1");
    if (snr_grid.empty() || sigma_grid.empty()) throw Error(ErrorCode::ConfigError, "grids must be nonempty");
    if (priors.empty()) throw Error(ErrorCode::ConfigError, "at least one prior is required");
    if (methods.empty()) throw Error(ErrorCode::ConfigError, "no methods selected");
    for (double s : sigma_grid)
      if (s < 0.0) throw Error(ErrorCode::ConfigError, "sigma values must be >= 0");
    eps.validate();
    music.validate();
    system.validate();
  }

  std::vector<PathPrior> priors_with_sigma(double sigma) const {
    auto out = priors;
    for (auto& p : out) p.sigma = p.varsigma = sigma;
    return out;
  }
};

/// AoAs from the priors, delays U[0, max_delay], unit-modulus attenuations
/// with uniform phase.
inline Scene draw_scene(std::span<const PathPrior> priors, const SystemConfig& config, std::uint64_t rng_seed,
                        double max_delay_s = 200e-9) {
  Rng rng(rng_seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Scene scene;
  scene.config = config;
  for (const auto& p : priors) {
    PathTruth t;
    const double zt = n(rng);
    const double zp = n(rng);
    t.angles0 = {p.mu + p.sigma * zt, p.xi + p.varsigma * zp};
    t.tau = max_delay_s * unit(rng);
    t.upsilon = std::polar(1.0, 2.0 * kPi * unit(rng));
    scene.paths.push_back(t);
  }
  return scene;
}

/// Joint AoA RMSE (degrees) under the label alignment with least total squared error.
inline double joint_rmse(std::span<const AnglePair> truth, std::span<const AnglePair> est) {
  if (truth.size() != est.size() || truth.empty())
    throw Error(ErrorCode::InvalidArgument, "truth and estimates must have the same nonzero length");
  std::vector<std::size_t> perm(truth.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0.0;
    for (std::size_t l = 0; l < truth.size(); ++l) {
      const double dt = truth[l].theta - est[perm[l]].theta;
      const double dp = wrap_deg(truth[l].phi - est[perm[l]].phi);
      acc += dt * dt + dp * dp;
    }
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / static_cast<double>(truth.size()));
}

namespace detail {

inline std::vector<std::size_t> nearest_assignment(std::span<const double> est, std::span<const double> truth) {
  std::vector<std::size_t> perm(truth.size()), best;
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) c += (est[i] - truth[perm[i]]) * (est[i] - truth[perm[i]]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace detail

/// A pairing is correct when each estimated (u, v) pair draws its u and its v
/// from the same true path (per-axis nearest assignment).
inline bool pairing_correct(std::span<const SfpPair> truth, std::span<const SfpPair> est) {
  if (truth.size() != est.size()) return false;
  std::vector<double> tu, tv, eu, ev;
  for (const auto& t : truth) tu.push_back(t.u), tv.push_back(t.v);
  for (const auto& e : est) eu.push_back(e.u), ev.push_back(e.v);
  return detail::nearest_assignment(eu, tu) == detail::nearest_assignment(ev, tv);
}

inline std::vector<SfpPair> true_sfps(const Scene& scene, const Orientation& orient) {
  std::vector<SfpPair> out;
  for (const auto& p : scene.paths) out.push_back(sfp_from_direction(to_plate_frame(orient, unit_direction(p.angles0))));
  return out;
}

struct MethodOutcome {
  Method method = Method::MapRot;
  std::vector<AnglePair> estimates;
  double rmse_deg = std::numeric_limits<double>::quiet_NaN();
  bool pairing_correct = false;
  bool failed = false;
  std::string error;
  double runtime_ms = 0.0;
};

struct TrialResult {
  std::size_t trial = 0;
  double snr_db = 0.0;
  double sigma_deg = 0.0;
  std::vector<AnglePair> truth;
  std::vector<MethodOutcome> outcomes;  // in cfg.methods order
};

/// Per-sigma orientation, solved once and reused by every trial of the cell.
struct CellOrientation {
  double sigma_deg = 0.0;
  OrientationSolution solution;
};

inline CellOrientation solve_cell_orientation(const ExperimentConfig& cfg, std::size_t sigma_idx) {
  const auto priors = cfg.priors_with_sigma(cfg.sigma_grid.at(sigma_idx));
  SolverConfig solver = cfg.solver;
  solver.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Solver), sigma_idx});
  CellOrientation cell{cfg.sigma_grid[sigma_idx], optimize_orientation(priors, cfg.eps, solver)};
  if (!cell.solution.feasible && cfg.auto_epsilon) {
    for (double e : cfg.epsilon_ladder) {
      const EpsilonConfig eps = EpsilonConfig::uniform(e);
      if (e <= std::max({cfg.eps.eps1, cfg.eps.eps2, cfg.eps.eps3})) continue;
      auto sol = optimize_orientation(priors, eps, solver);
      if (sol.feasible) {
        cell.solution = std::move(sol);
        break;
      }
    }
  }
  return cell;
}

namespace detail {

inline void run_method(const ExperimentConfig& cfg, std::span<const PathPrior> priors, const Scene& scene,
                       const Orientation& rot, std::uint64_t noise_seed, std::uint64_t single_seed, MethodOutcome& out) {
  const std::size_t L = scene.paths.size();
  const bool rotated = out.method == Method::MapRot || out.method == Method::SompRot ||
                       out.method == Method::SinglePath;
  const Orientation orient = rotated ? rot : Orientation::identity();
  const auto truth_sfp = true_sfps(scene, orient);

  switch (out.method) {
    case Method::MapRot:
    case Method::MapNorot: {
      const auto meas = synthesize_scan(scene, orient, noise_seed);
      const auto sfps = extract_sfps(meas, L, cfg.music, scene.config);
      const auto res = map_pair(meas, sfps, orient, priors, scene.config);
      out.estimates = res.aoas;
      out.pairing_correct = pairing_correct(truth_sfp, res.sfp_pairs);
      break;
    }
    case Method::SompRot:
    case Method::SompNorot: {
      const auto meas = synthesize_scan(scene, orient, noise_seed);
      const auto res = somp_estimate(meas, L, orient, scene.config, cfg.somp);
      out.estimates = res.aoas;
      out.pairing_correct = pairing_correct(truth_sfp, res.atoms);
      break;
    }
    case Method::SinglePath: {
      for (std::size_t l = 0; l < L; ++l) {
        Scene single{{scene.paths[l]}, scene.config};
        const auto meas = synthesize_scan(single, orient, derive_seed(single_seed, {l}));
        const auto sfps = extract_sfps(meas, 1, cfg.music, scene.config);
        out.estimates.push_back(aoa_from_sfp({sfps.u_set[0], sfps.v_set[0]}, orient));
      }
      out.pairing_correct = true;
      break;
    }
  }
}

}  // namespace detail

/// One Monte Carlo trial. `rot` is the cell's precomputed orientation. Scene
/// and noise seeds do not depend on the SNR, so SNR cells share scenes and
/// noise realizations.
inline TrialResult run_trial(const ExperimentConfig& cfg, double snr_db, std::size_t sigma_idx,
                             std::size_t trial_index, const Orientation& rot) {
  const double sigma = cfg.sigma_grid.at(sigma_idx);
  const auto priors = cfg.priors_with_sigma(sigma);
  SystemConfig system = cfg.system;
  system.set_snr_db(snr_db);
  const std::uint64_t scene_seed =
      derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Scene), sigma_idx, trial_index});
  const Scene scene = draw_scene(priors, system, scene_seed, cfg.max_delay_s);

  TrialResult tr;
  tr.trial = trial_index;
  tr.snr_db = snr_db;
  tr.sigma_deg = sigma;
  for (const auto& p : scene.paths) tr.truth.push_back(p.angles0);

  for (Method m : cfg.methods) {
    MethodOutcome out;
    out.method = m;
    const auto id = static_cast<std::uint64_t>(m);
    const std::uint64_t noise_seed =
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Noise), sigma_idx, trial_index, id});
    const std::uint64_t single_seed =
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::SinglePath), sigma_idx, trial_index});
    const auto t0 = std::chrono::steady_clock::now();
    try {
      detail::run_method(cfg, priors, scene, rot, noise_seed, single_seed, out);
      out.rmse_deg = joint_rmse(tr.truth, out.estimates);
    } catch (const Error& e) {
      out = MethodOutcome{};
      out.method = m;
      out.failed = true;
      out.error = e.what();
    }
    if (cfg.record_timing)
      out.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    tr.outcomes.push_back(std::move(out));
  }
  return tr;
}

struct CellSummary {
  double snr_db = 0.0;
  double sigma_deg = 0.0;
  Method method = Method::MapRot;
  std::size_t trials = 0;
  std::size_t failed = 0;
  double mean_rmse = std::numeric_limits<double>::quiet_NaN();
  double se_rmse = std::numeric_limits<double>::quiet_NaN();  // standard error of the mean
  double pairing_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  std::vector<CellOrientation> orientations;  // per sigma
  std::vector<TrialResult> trials;            // ordered by (snr, sigma, trial)
  std::vector<CellSummary> summary;           // ordered by (snr, sigma, method)

  const CellSummary* find(double snr, double sigma, Method m) const {
    for (const auto& c : summary)
      if (c.snr_db == snr && c.sigma_deg == sigma && c.method == m) return &c;
    return nullptr;
  }
};

inline std::vector<CellSummary> summarize_trials(std::span<const TrialResult> trials, std::span<const Method> methods) {
  std::vector<CellSummary> out;
  std::size_t i = 0;
  while (i < trials.size()) {
    std::size_t j = i;
    while (j < trials.size() && trials[j].snr_db == trials[i].snr_db && trials[j].sigma_deg == trials[i].sigma_deg) ++j;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      CellSummary c{trials[i].snr_db, trials[i].sigma_deg, methods[mi]};
      std::vector<double> vals;
      std::size_t correct = 0;
      for (std::size_t t = i; t < j; ++t) {
        const auto& o = trials[t].outcomes[mi];
        ++c.trials;
        if (o.failed) {
          ++c.failed;
          continue;
        }
        vals.push_back(o.rmse_deg);
        correct += o.pairing_correct ? 1 : 0;
      }
      if (!vals.empty()) {
        const double n = static_cast<double>(vals.size());
        c.mean_rmse = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : vals) ss += (v - c.mean_rmse) * (v - c.mean_rmse);
        c.se_rmse = vals.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        c.pairing_accuracy = static_cast<double>(correct) / n;
      }
      out.push_back(c);
    }
    i = j;
  }
  return out;
}

/// Full sweep over snr x sigma x trial x method. Orientations are solved once per sigma.
inline SweepResult sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult res;
  for (std::size_t s = 0; s < cfg.sigma_grid.size(); ++s) res.orientations.push_back(solve_cell_orientation(cfg, s));
  for (double snr : cfg.snr_grid)
    for (std::size_t s = 0; s < cfg.sigma_grid.size(); ++s)
      for (std::size_t t = 0; t < cfg.trials; ++t)
        res.trials.push_back(run_trial(cfg, snr, s, t, res.orientations[s].solution.orient));
  res.summary = summarize_trials(res.trials, cfg.methods);
  return res;
}

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline void write_trials_csv(std::ostream& os, const SweepResult& res) {
  os << "trial,snr_db,sigma_deg,method,rmse_deg,pairing_correct,failed,runtime_ms\n";
  for (const auto& tr : res.trials)
    for (const auto& o : tr.outcomes)
      os << tr.trial << ',' << detail::fmt(tr.snr_db) << ',' << detail::fmt(tr.sigma_deg) << ',' << to_string(o.method)
         << ',' << detail::fmt(o.rmse_deg) << ',' << (o.pairing_correct ? 1 : 0) << ',' << (o.failed ? 1 : 0) << ','
         << detail::fmt(o.runtime_ms) << '\n';
}

inline void write_summary_csv(std::ostream& os, const SweepResult& res) {
  os << "snr_db,sigma_deg,method,trials,failed,mean_rmse_deg,se_rmse_deg,pairing_accuracy\n";
  for (const auto& c : res.summary)
    os << detail::fmt(c.snr_db) << ',' << detail::fmt(c.sigma_deg) << ',' << to_string(c.method) << ',' << c.trials
       << ',' << c.failed << ',' << detail::fmt(c.mean_rmse) << ',' << detail::fmt(c.se_rmse) << ','
       << detail::fmt(c.pairing_accuracy) << '\n';
}

inline void write_orientations_csv(std::ostream& os, const SweepResult& res) {
  os << "sigma_deg,alpha_deg,beta_deg,gamma_deg,objective,feasible,eps\n";
  for (const auto& c : res.orientations) {
    const auto& s = c.solution;
    os << detail::fmt(c.sigma_deg) << ',' << detail::fmt(s.orient.alpha) << ',' << detail::fmt(s.orient.beta) << ','
       << detail::fmt(s.orient.gamma) << ',' << detail::fmt(s.objective_value) << ',' << (s.feasible ? 1 : 0) << ','
       << detail::fmt(s.eps.eps1) << '\n';
  }
}

}  // namespace masense
