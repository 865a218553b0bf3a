#pragma once

// Pairing of the unordered X-axis (u) and Z-axis (v) SFP estimates into
// per-path AoAs by maximizing received-signal log-likelihood plus the log
// prior density, and a grid-dictionary SOMP baseline.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "masense/error.hpp"
#include "masense/estimation.hpp"
#include "masense/geometry.hpp"
#include "masense/moments.hpp"
#include "masense/signal.hpp"

namespace masense {

/// A bijection on {0, ..., n-1}: index i maps to map[i].
struct Permutation {
  std::vector<std::size_t> map;

  static Permutation identity(std::size_t n) {
    Permutation p;
    p.map.resize(n);
    std::iota(p.map.begin(), p.map.end(), std::size_t{0});
    return p;
  }

  std::size_t size() const { return map.size(); }
  std::size_t operator[](std::size_t i) const { return map[i]; }

  bool valid() const {
    std::vector<bool> seen(map.size(), false);
    for (std::size_t v : map) {
      if (v >= map.size() || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
};

struct CandidateScore {
  Permutation xi;  // v index paired with u index i
  double log_likelihood = 0.0;
  double log_prior = 0.0;
  double score = 0.0;  // -inf when some pair cannot be reconstructed
};

struct PairingResult {
  Permutation theta_perm;  // path l -> index into the u set
  Permutation xi_perm;     // path l -> index into the v set
  std::vector<SfpPair> sfp_pairs;  // per path l
  std::vector<AnglePair> aoas;     // per path l, initial frame
  double log_likelihood = 0.0;
  double log_prior = 0.0;
  double score = 0.0;
  bool ill_conditioned = false;
  std::vector<CandidateScore> certificate;  // every candidate, kept for L <= 4
};

/// Column l is the response of candidate l over all scan positions on subcarrier k (1-based).
inline Eigen::MatrixXcd steering_matrix(std::span<const SfpPair> pairs, std::span<const Vec3> positions,
                                        std::size_t k, const SystemConfig& config) {
  const double fk = config.frequency(k);
  Eigen::MatrixXcd S(static_cast<Eigen::Index>(positions.size()), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t m = 0; m < positions.size(); ++m)
    for (std::size_t l = 0; l < pairs.size(); ++l) {
      const double rho = positions[m].x() * pairs[l].u + positions[m].z() * pairs[l].v;
      S(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l)) =
          std::polar(1.0, -2.0 * kPi * fk * rho / kSpeedOfLight);
    }
  return S;
}

struct LsFit {
  Eigen::VectorXcd q;
  double residual = 0.0;  // squared residual norm
  double condition = 0.0;  // 2-norm condition number of the steering matrix
  bool ill_conditioned = false;
};

/// Ridge-regularized least squares min ||s - A q||.
inline LsFit ls_path_coefficients(const Eigen::MatrixXcd& steering, const Eigen::VectorXcd& samples) {
  const Eigen::Index L = steering.cols();
  if (L > steering.rows()) throw Error(ErrorCode::InvalidArgument, "more paths than observations");
  Eigen::MatrixXcd gram = steering.adjoint() * steering;
  const double ridge = 1e-8 * gram.trace().real() / static_cast<double>(L);

  LsFit fit;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  fit.condition = lo > 0.0 ? std::sqrt(hi / lo) : std::numeric_limits<double>::infinity();
  fit.ill_conditioned = fit.condition > 1e10;

  gram.diagonal().array() += ridge;
  fit.q = gram.ldlt().solve(steering.adjoint() * samples);
  fit.residual = (samples - steering * fit.q).squaredNorm();
  return fit;
}

inline double likelihood_constant(const SystemConfig& config) {
  const double K = static_cast<double>(config.num_subcarriers);
  const double M = static_cast<double>(config.num_positions);
  return -2.0 * K * M * std::log(kPi * config.noise_variance());
}

namespace detail {

struct LikelihoodEval {
  double value = 0.0;
  bool ill_conditioned = false;
};

inline LikelihoodEval log_likelihood_eval(const ScanMeasurement& meas, std::span<const SfpPair> pairs,
                                          const SystemConfig& config) {
  if (!(config.noise_variance() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "log-likelihood needs a positive noise level");
  LikelihoodEval out;
  double rss = 0.0;
  for (std::size_t k = 1; k <= config.num_subcarriers; ++k) {
    const Eigen::MatrixXcd S = steering_matrix(pairs, meas.positions, k, config);
    const LsFit fit = ls_path_coefficients(S, meas.samples.col(static_cast<Eigen::Index>(k - 1)));
    rss += fit.residual;
    out.ill_conditioned = out.ill_conditioned || fit.ill_conditioned;
  }
  out.value = -rss / config.noise_variance() + likelihood_constant(config);
  return out;
}

inline double log_gauss_pair(const AnglePair& est, const PathPrior& prior) {
  if (!(prior.sigma > 0.0 && prior.varsigma > 0.0))
    throw Error(ErrorCode::InvalidArgument, "prior standard deviations must be positive");
  const double dt = est.theta - prior.mu;
  const double dp = wrap_deg(est.phi - prior.xi);
  return -dt * dt / (2.0 * prior.sigma * prior.sigma) - dp * dp / (2.0 * prior.varsigma * prior.varsigma) -
         std::log(2.0 * kPi * prior.sigma * prior.varsigma);
}

/// Maximum-weight assignment of items to slots by DP over subsets.
/// weight[i][a] = value of item i in slot a. Returns slot -> item.
inline std::vector<std::size_t> best_assignment(const std::vector<std::vector<double>>& weight, double* total) {
  const std::size_t n = weight.size();
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> best(full, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> choice(full, 0);
  best[0] = 0.0;
  // Slots are filled in order; mask = items already used by slots 0..popcount-1.
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (best[mask] == -std::numeric_limits<double>::infinity()) continue;
    const auto slot = static_cast<std::size_t>(std::popcount(mask));
    if (slot == n) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) continue;
      const std::size_t next = mask | (std::size_t{1} << i);
      const double v = best[mask] + weight[i][slot];
      if (v > best[next]) {
        best[next] = v;
        choice[next] = i;
      }
    }
  }
  std::vector<std::size_t> slot_item(n);
  std::size_t mask = full - 1;
  for (std::size_t s = n; s-- > 0;) {
    slot_item[s] = choice[mask];
    mask &= ~(std::size_t{1} << choice[mask]);
  }
  if (total) *total = best[full - 1];
  return slot_item;
}

}  // namespace detail

/// Received-signal log-likelihood of a candidate set of SFP pairs, with the
/// path coefficients fitted per subcarrier by least squares.
inline double log_likelihood(const ScanMeasurement& meas, std::span<const SfpPair> pairs,
                             const SystemConfig& config) {
  return detail::log_likelihood_eval(meas, pairs, config).value;
}

/// Log prior density of pair l under prior l (degrees). Throws InfeasibleSfp
/// if a pair cannot be mapped back to a direction.
inline double log_prior(std::span<const SfpPair> pairs, const Orientation& orient,
                        std::span<const PathPrior> priors) {
  if (pairs.size() != priors.size()) throw Error(ErrorCode::InvalidArgument, "one prior per pair is required");
  double acc = 0.0;
  for (std::size_t l = 0; l < pairs.size(); ++l) acc += detail::log_gauss_pair(aoa_from_sfp(pairs[l], orient), priors[l]);
  return acc;
}

/// MAP pairing. The likelihood depends only on which u is matched with which
/// v, so the search enumerates those L! matchings and, for each, assigns the
/// resulting pairs to the priors optimally; this equals the maximum over both
/// orderings. Ties resolve to the lexicographically smallest matching.
inline PairingResult map_pair(const ScanMeasurement& meas, const SfpSets& sfps, const Orientation& orient,
                              std::span<const PathPrior> priors, const SystemConfig& config) {
  const std::size_t L = sfps.u_set.size();
  if (L == 0 || sfps.v_set.size() != L || priors.size() != L)
    throw Error(ErrorCode::InvalidArgument, "SFP sets and priors must all have L entries");
  if (L > 8) throw Error(ErrorCode::SearchSpaceTooLarge, "pairing search limited to L <= 8");

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  PairingResult best;
  best.score = kNegInf;
  bool have = false;

  Permutation xi = Permutation::identity(L);
  do {
    std::vector<SfpPair> pairs(L);
    for (std::size_t i = 0; i < L; ++i) pairs[i] = {sfps.u_set[i], sfps.v_set[xi[i]]};

    CandidateScore cand{xi, 0.0, kNegInf, kNegInf};
    std::vector<std::vector<double>> weight(L, std::vector<double>(L, kNegInf));
    std::vector<AnglePair> aoas(L);
    bool feasible = true;
    for (std::size_t i = 0; i < L && feasible; ++i) {
      try {
        aoas[i] = aoa_from_sfp(pairs[i], orient);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InfeasibleSfp) throw;
        feasible = false;
      }
      if (feasible)
        for (std::size_t a = 0; a < L; ++a) weight[i][a] = detail::log_gauss_pair(aoas[i], priors[a]);
    }

    const auto ll = detail::log_likelihood_eval(meas, pairs, config);
    cand.log_likelihood = ll.value;
    std::vector<std::size_t> slot_item;
    if (feasible) {
      slot_item = detail::best_assignment(weight, &cand.log_prior);
      cand.score = cand.log_likelihood + cand.log_prior;
    }
    if (L <= 4) best.certificate.push_back(cand);

    if (feasible && (!have || cand.score > best.score)) {
      have = true;
      best.score = cand.score;
      best.log_likelihood = cand.log_likelihood;
      best.log_prior = cand.log_prior;
      best.ill_conditioned = ll.ill_conditioned;
      best.theta_perm.map = slot_item;
      best.xi_perm.map.resize(L);
      best.sfp_pairs.resize(L);
      best.aoas.resize(L);
      for (std::size_t l = 0; l < L; ++l) {
        best.xi_perm.map[l] = xi[slot_item[l]];
        best.sfp_pairs[l] = pairs[slot_item[l]];
        best.aoas[l] = aoas[slot_item[l]];
      }
    }
  } while (std::next_permutation(xi.map.begin(), xi.map.end()));

  if (!have) throw Error(ErrorCode::InfeasibleSfp, "no pairing maps every SFP pair to a direction");
  return best;
}

struct SompConfig {
  std::size_t grid_points = 201;  // per axis over [-1, 1]
};

struct SompResult {
  std::vector<AnglePair> aoas;
  std::vector<SfpPair> atoms;
  std::vector<double> residual_norms;  // after each iteration; entry 0 is the input energy
};

/// Simultaneous OMP over a joint (u, v) grid restricted to u^2 + v^2 <= 1.
/// The correlation of atom (u, v) with the residual splits into an X-scan term
/// depending on u and a Z-scan term depending on v, which keeps the full
/// dictionary search cheap.
inline SompResult somp_estimate(const ScanMeasurement& meas, std::size_t num_paths, const Orientation& orient,
                                const SystemConfig& config, const SompConfig& somp = {}) {
  if (num_paths < 1) throw Error(ErrorCode::InvalidArgument, "at least one path is required");
  const std::vector<double> grid = search_grid(somp.grid_points);
  const auto G = static_cast<Eigen::Index>(grid.size());
  const auto K = static_cast<Eigen::Index>(config.num_subcarriers);
  const auto M = static_cast<Eigen::Index>(meas.axis_split);
  const double d = config.spacing();

  Eigen::MatrixXcd residual = meas.samples;
  SompResult out;
  out.residual_norms.push_back(residual.norm());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> chosen;

  // corr(i, k) = sum_m exp(+j 2 pi f_k m d grid_i / c) r(row0 + m, k)
  auto axis_corr = [&](Eigen::Index row0) {
    Eigen::MatrixXcd A(G, K);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double fk = config.frequency(static_cast<std::size_t>(k) + 1);
      for (Eigen::Index i = 0; i < G; ++i) {
        const cdouble step = std::polar(1.0, 2.0 * kPi * fk * d * grid[static_cast<std::size_t>(i)] / kSpeedOfLight);
        cdouble ph{1.0, 0.0};
        cdouble acc{0.0, 0.0};
        for (Eigen::Index m = 0; m < M; ++m) {
          acc += ph * residual(row0 + m, k);
          ph *= step;
        }
        A(i, k) = acc;
      }
    }
    return A;
  };

  for (std::size_t it = 0; it < num_paths; ++it) {
    const Eigen::MatrixXcd A = axis_corr(0);
    const Eigen::MatrixXcd B = axis_corr(M);
    const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
    const Eigen::MatrixXd cross = 2.0 * (A.conjugate() * B.transpose()).real();

    double best = -1.0;
    std::pair<Eigen::Index, Eigen::Index> arg{-1, -1};
    for (Eigen::Index i = 0; i < G; ++i)
      for (Eigen::Index j = 0; j < G; ++j) {
        const double u = grid[static_cast<std::size_t>(i)], v = grid[static_cast<std::size_t>(j)];
        if (u * u + v * v > 1.0 + 1e-12) continue;
        if (std::find(chosen.begin(), chosen.end(), std::pair{i, j}) != chosen.end()) continue;
        const double score = a2[i] + b2[j] + cross(i, j);
        if (score > best) {
          best = score;
          arg = {i, j};
        }
      }
    chosen.push_back(arg);
    out.atoms.push_back({grid[static_cast<std::size_t>(arg.first)], grid[static_cast<std::size_t>(arg.second)]});

    for (Eigen::Index k = 0; k < K; ++k) {
      const Eigen::MatrixXcd S = steering_matrix(out.atoms, meas.positions, static_cast<std::size_t>(k) + 1, config);
      const Eigen::VectorXcd s = meas.samples.col(k);
      const LsFit fit = ls_path_coefficients(S, s);
      residual.col(k) = s - S * fit.q;
    }
    out.residual_norms.push_back(residual.norm());
  }

  for (const auto& a : out.atoms) out.aoas.push_back(aoa_from_sfp(a, orient));
  return out;
}

}  // namespace masense
