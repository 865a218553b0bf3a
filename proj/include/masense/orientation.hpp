#pragma once

// Plate-orientation design: maximize the spread of the mean axis projections
// of all paths subject to moment-based (Cantelli) sufficient conditions for
// order preservation on both scan axes and front-side incidence.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "masense/error.hpp"
#include "masense/geometry.hpp"
#include "masense/moments.hpp"
#include "masense/random.hpp"
#include "masense/sqp.hpp"

namespace masense {

struct EpsilonConfig {
  double eps1 = 0.05;  // X-axis order reversal
  double eps2 = 0.05;  // Z-axis order reversal
  double eps3 = 0.05;  // front-side violation

  static EpsilonConfig uniform(double e) { return {e, e, e}; }

  void validate() const {
    for (double e : {eps1, eps2, eps3})
      if (!(e > 0.0 && e <= 0.5)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 0.5]");
  }
};

struct PairMargin {
  std::size_t l = 0;
  std::size_t u = 0;
  double x = 0.0;  // c_{l,u}^(1)
  double z = 0.0;  // c_{l,u}^(2)
};

struct SolverConfig {
  std::size_t grid_per_axis = 4;  // restarts = grid_per_axis^3 over (-90, 90]^3
  std::size_t random_restarts = 0;
  std::uint64_t seed = 0;
  SqpOptions sqp{};
  double feasibility_tol = 1e-9;
  // Constraints are tightened by this amount inside the solver so that the
  // exactly re-evaluated margins land on the feasible side.
  double interior_shift = 1e-7;
};

struct OrientationSolution {
  Orientation orient;
  double objective_value = 0.0;
  std::vector<PairMargin> separation;
  std::vector<double> front_side;
  bool feasible = false;
  EpsilonConfig eps;
  std::size_t restarts = 0;
  std::size_t feasible_restarts = 0;
  std::size_t best_restart = 0;
  int total_iterations = 0;
  std::string diagnostic;

  double min_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : separation) m = std::min({m, p.x, p.z});
    for (double f : front_side) m = std::min(m, f);
    return m;
  }
};

inline std::vector<ProjectionMoments> all_moments(std::span<const PathPrior> priors, const Orientation& o) {
  std::vector<ProjectionMoments> out;
  out.reserve(priors.size());
  for (const auto& p : priors) out.push_back(projection_moments(p, o));
  return out;
}

/// Sum over ordered path pairs of squared mean-projection gaps on X and Z.
inline double objective(std::span<const PathPrior> priors, const Orientation& o) {
  const auto mom = all_moments(priors, o);
  double f = 0.0;
  for (std::size_t l = 0; l < mom.size(); ++l)
    for (std::size_t u = 0; u < mom.size(); ++u) {
      const double dx = mom[l].mean_x - mom[u].mean_x;
      const double dz = mom[l].mean_z - mom[u].mean_z;
      f += dx * dx + dz * dz;
    }
  return f;
}

namespace detail {

inline double cantelli_pair(double mean_l, double second_l, double mean_u, double second_u, double eps) {
  const double gap = mean_l - mean_u;
  const double var = second_l + second_u - mean_l * mean_l - mean_u * mean_u;
  return gap * gap - (1.0 - eps) / eps * var;
}

inline double cantelli_front(const ProjectionMoments& m, double eps) {
  const double var = std::max(0.0, m.var_y());
  return m.mean_y - std::sqrt((1.0 - eps) / eps * var);
}

inline std::vector<PairMargin> separation_from(const std::vector<ProjectionMoments>& mom, const EpsilonConfig& eps) {
  std::vector<PairMargin> out;
  for (std::size_t l = 0; l < mom.size(); ++l)
    for (std::size_t u = l + 1; u < mom.size(); ++u)
      out.push_back({l, u,
                     cantelli_pair(mom[l].mean_x, mom[l].second_x, mom[u].mean_x, mom[u].second_x, eps.eps1),
                     cantelli_pair(mom[l].mean_z, mom[l].second_z, mom[u].mean_z, mom[u].second_z, eps.eps2)});
  return out;
}

inline Orientation orientation_from_rad(const Eigen::VectorXd& x) {
  return {rad2deg(x[0]), rad2deg(x[1]), rad2deg(x[2])};
}

}  // namespace detail

/// c_{l,u}^(n) for all l < u on both axes; nonnegative margins bound the
/// order-reversal probability by eps^(n).
inline std::vector<PairMargin> separation_margins(std::span<const PathPrior> priors, const Orientation& o,
                                                  const EpsilonConfig& eps) {
  return detail::separation_from(all_moments(priors, o), eps);
}

/// c_l^(3) per path; a nonnegative margin bounds Pr[local Y <= 0] by eps3.
inline std::vector<double> front_side_margins(std::span<const PathPrior> priors, const Orientation& o,
                                              double eps3) {
  std::vector<double> out;
  for (const auto& p : priors) out.push_back(detail::cantelli_front(projection_moments(p, o), eps3));
  return out;
}

/// Flattened constraint vector: [x, z] per pair (l < u), then front side per path.
inline Eigen::VectorXd constraint_vector(std::span<const PathPrior> priors, const Orientation& o,
                                         const EpsilonConfig& eps) {
  const auto mom = all_moments(priors, o);
  const auto sep = detail::separation_from(mom, eps);
  Eigen::VectorXd c(static_cast<Eigen::Index>(2 * sep.size() + mom.size()));
  Eigen::Index i = 0;
  for (const auto& s : sep) {
    c[i++] = s.x;
    c[i++] = s.z;
  }
  for (const auto& m : mom) c[i++] = detail::cantelli_front(m, eps.eps3);
  return c;
}

inline OrientationSolution evaluate_orientation(std::span<const PathPrior> priors, const Orientation& o,
                                                const EpsilonConfig& eps, double feasibility_tol = 1e-9) {
  OrientationSolution sol;
  sol.orient = o;
  sol.eps = eps;
  sol.objective_value = objective(priors, o);
  sol.separation = separation_margins(priors, o, eps);
  sol.front_side = front_side_margins(priors, o, eps.eps3);
  sol.feasible = sol.min_margin() >= -feasibility_tol;
  return sol;
}

/// Multistart SQP over the Euler angles. Returns the best feasible local
/// maximizer (ties go to the lowest restart index); when no restart ends
/// feasible, the least-violating point is returned with feasible = false.
inline OrientationSolution optimize_orientation(std::span<const PathPrior> priors, const EpsilonConfig& eps,
                                                const SolverConfig& cfg = {}) {
  if (priors.empty()) throw Error(ErrorCode::InvalidArgument, "at least one prior is required");
  eps.validate();

  std::vector<Eigen::Vector3d> starts;
  const std::size_t g = cfg.grid_per_axis;
  auto grid = [g](std::size_t i) { return -90.0 + 180.0 * static_cast<double>(i + 1) / static_cast<double>(g); };
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j)
      for (std::size_t k = 0; k < g; ++k) starts.emplace_back(grid(i), grid(j), grid(k));
  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Solver)}));
  std::uniform_real_distribution<double> uni(-90.0, 90.0);
  for (std::size_t i = 0; i < cfg.random_restarts; ++i) {
    const double a = uni(rng), b = uni(rng), c = uni(rng);
    starts.emplace_back(a, b, c);
  }

  const double shift = cfg.interior_shift;
  auto f = [&](const Eigen::VectorXd& x) { return -objective(priors, detail::orientation_from_rad(x)); };
  auto c = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd v = constraint_vector(priors, detail::orientation_from_rad(x), eps);
    v.array() -= shift;
    return v;
  };

  SqpOptions sqp = cfg.sqp;
  sqp.feasibility_tol = cfg.feasibility_tol;

  OrientationSolution best;
  bool have_feasible = false;
  double least_violation = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::size_t feasible_count = 0;

  for (std::size_t s = 0; s < starts.size(); ++s) {
    Eigen::VectorXd x0(3);
    x0 << deg2rad(starts[s][0]), deg2rad(starts[s][1]), deg2rad(starts[s][2]);
    const SqpResult r = sqp_minimize(f, c, x0, sqp);
    iterations += r.iterations;

    // Candidates: the final iterate and the best feasible iterate on the path.
    std::vector<Eigen::VectorXd> cands{r.x};
    if (r.best_feasible) cands.push_back(*r.best_feasible);
    bool restart_feasible = false;
    for (const auto& xc : cands) {
      OrientationSolution sol = evaluate_orientation(priors, detail::orientation_from_rad(xc).wrapped(), eps,
                                                     cfg.feasibility_tol);
      sol.best_restart = s;
      if (sol.feasible) {
        restart_feasible = true;
        if (!have_feasible || sol.objective_value > best.objective_value) {
          best = std::move(sol);
          have_feasible = true;
        }
      } else if (!have_feasible) {
        double viol = 0.0;
        for (const auto& p : sol.separation) viol += std::max(0.0, -p.x) + std::max(0.0, -p.z);
        for (double fs : sol.front_side) viol += std::max(0.0, -fs);
        if (viol < least_violation) {
          least_violation = viol;
          best = std::move(sol);
        }
      }
    }
    if (restart_feasible) ++feasible_count;
  }

  best.restarts = starts.size();
  best.feasible_restarts = feasible_count;
  best.total_iterations = iterations;
  if (!have_feasible) best.diagnostic = "NoFeasiblePoint: every restart ended infeasible";
  return best;
}

/// Tries each epsilon in turn (same value on all three constraints) and
/// returns the first feasible design; the last attempt is returned otherwise.
inline OrientationSolution optimize_with_epsilon_ladder(std::span<const PathPrior> priors,
                                                        std::span<const double> ladder,
                                                        const SolverConfig& cfg = {}) {
  if (ladder.empty()) throw Error(ErrorCode::InvalidArgument, "epsilon ladder is empty");
  OrientationSolution sol;
  for (double e : ladder) {
    sol = optimize_orientation(priors, EpsilonConfig::uniform(e), cfg);
    if (sol.feasible) break;
  }
  return sol;
}

inline const std::vector<double>& default_epsilon_ladder() {
  static const std::vector<double> ladder{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5};
  return ladder;
}

}  // namespace masense
