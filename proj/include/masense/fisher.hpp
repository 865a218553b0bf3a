#pragma once

// Fisher information of the initial-frame AoAs for a set of scan positions.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "masense/error.hpp"
#include "masense/geometry.hpp"
#include "masense/signal.hpp"

namespace masense {

struct FimResult {
  Eigen::MatrixXd matrix;                        // 2L x 2L, real, scaled
  std::vector<std::vector<Eigen::Matrix2cd>> blocks;  // Gamma_{l,u} before Re{} and scaling
  double scale = 1.0;                            // 2K / (P N0)
  bool scale_defined = true;                     // false when N0 == 0; matrix is then Re{Gamma}

  std::size_t num_paths() const { return blocks.size(); }
};

/// Derivative of the extra path length at `position` with respect to the
/// path's initial-frame elevation and azimuth, in meters per radian.
inline Eigen::Vector2d aoa_gradient(const Scene& scene, const Orientation& orient, const Vec3& position,
                                    std::size_t path_index) {
  if (path_index >= scene.paths.size()) throw Error(ErrorCode::InvalidArgument, "path index out of range");
  const AnglePair& a = scene.paths[path_index].angles0;
  const double t = deg2rad(a.theta);
  const double p = deg2rad(a.phi);
  const Vec3 d_theta(std::cos(t) * std::cos(p), std::cos(t) * std::sin(p), -std::sin(t));
  const Vec3 d_phi(-std::sin(t) * std::sin(p), std::sin(t) * std::cos(p), 0.0);
  const Mat3 rt = rotation_matrix(orient).transpose();
  return {propagation_delta(rt * d_theta, position), propagation_delta(rt * d_phi, position)};
}

namespace detail {

inline double relative_delay(const Scene& scene, const std::vector<Direction3>& local, const Vec3& position,
                             std::size_t l, std::size_t u) {
  return scene.paths[l].tau - scene.paths[u].tau +
         (propagation_delta(local[l], position) - propagation_delta(local[u], position)) / kSpeedOfLight;
}

inline std::complex<double> kappa(const Scene& scene, std::size_t l, std::size_t u, double delta) {
  const SystemConfig& cfg = scene.config;
  const double amp = cfg.amplitude();
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 1; k <= cfg.num_subcarriers; ++k) {
    const double fk = cfg.frequency(k);
    const double w = 2.0 * kPi * fk / kSpeedOfLight;
    acc += w * w * std::polar(1.0, 2.0 * kPi * fk * delta);
  }
  return std::conj(scene.paths[l].upsilon) * scene.paths[u].upsilon * amp * amp * acc;
}

}  // namespace detail

/// Off-diagonal coupling factor kappa_{l,u} at one position.
inline std::complex<double> coupling_factor(const Scene& scene, const Orientation& orient, const Vec3& position,
                                            std::size_t l, std::size_t u) {
  if (l >= scene.paths.size() || u >= scene.paths.size())
    throw Error(ErrorCode::InvalidArgument, "path index out of range");
  const auto local = detail::local_directions(scene, orient);
  return detail::kappa(scene, l, u, detail::relative_delay(scene, local, position, l, u));
}

inline FimResult fim(const Scene& scene, const Orientation& orient, std::span<const Vec3> positions) {
  if (positions.empty()) throw Error(ErrorCode::InvalidArgument, "no positions");
  const std::size_t L = scene.paths.size();
  const SystemConfig& cfg = scene.config;
  const auto local = detail::local_directions(scene, orient);

  // Diagonal factor c_l = |v_l|^2 sum_k (2 pi f_k / c * P / K)^2.
  double wsum = 0.0;
  for (std::size_t k = 1; k <= cfg.num_subcarriers; ++k) {
    const double w = 2.0 * kPi * cfg.frequency(k) / kSpeedOfLight * cfg.amplitude();
    wsum += w * w;
  }

  std::vector<std::vector<Eigen::Vector2d>> grads(L);
  for (std::size_t l = 0; l < L; ++l)
    for (const auto& p : positions) grads[l].push_back(aoa_gradient(scene, orient, p, l));

  FimResult out;
  out.blocks.assign(L, std::vector<Eigen::Matrix2cd>(L, Eigen::Matrix2cd::Zero()));
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t u = 0; u < L; ++u) {
      Eigen::Matrix2cd blk = Eigen::Matrix2cd::Zero();
      for (std::size_t m = 0; m < positions.size(); ++m) {
        const Eigen::Matrix2d outer = grads[l][m] * grads[u][m].transpose();
        if (l == u) {
          blk += (std::norm(scene.paths[l].upsilon) * wsum) * outer.cast<std::complex<double>>();
        } else {
          const auto kap = detail::kappa(scene, l, u, detail::relative_delay(scene, local, positions[m], l, u));
          blk += kap * outer.cast<std::complex<double>>();
        }
      }
      out.blocks[l][u] = blk;
    }
  }

  out.scale_defined = cfg.noise_n0 > 0.0;
  out.scale = out.scale_defined ? 2.0 * static_cast<double>(cfg.num_subcarriers) / (cfg.power * cfg.noise_n0) : 1.0;
  out.matrix.resize(static_cast<Eigen::Index>(2 * L), static_cast<Eigen::Index>(2 * L));
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t u = 0; u < L; ++u)
      out.matrix.block<2, 2>(static_cast<Eigen::Index>(2 * l), static_cast<Eigen::Index>(2 * u)) =
          out.scale * out.blocks[l][u].real();
  return out;
}

/// Summary diagnostics printed by the CLI.
struct FimSummary {
  Eigen::MatrixXd block_norms;  // Frobenius norm of each Gamma_{l,u}
  double determinant = 0.0;
  double min_eigenvalue = 0.0;
};

inline FimSummary summarize(const FimResult& r) {
  const auto L = static_cast<Eigen::Index>(r.num_paths());
  FimSummary s;
  s.block_norms.resize(L, L);
  for (Eigen::Index l = 0; l < L; ++l)
    for (Eigen::Index u = 0; u < L; ++u)
      s.block_norms(l, u) = r.blocks[static_cast<std::size_t>(l)][static_cast<std::size_t>(u)].norm();
  s.determinant = r.matrix.determinant();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.matrix, Eigen::EigenvaluesOnly);
  s.min_eigenvalue = es.eigenvalues().minCoeff();
  return s;
}

}  // namespace masense
