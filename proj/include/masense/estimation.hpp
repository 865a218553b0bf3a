#pragma once

// Spatial-frequency extraction from one linear scan: spatially smoothed
// covariance (averaged over subarrays and subcarriers) followed by a MUSIC
// pseudo-spectrum search over [-1, 1].

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "masense/error.hpp"
#include "masense/geometry.hpp"
#include "masense/signal.hpp"

namespace masense {

struct MusicConfig {
  std::size_t subarray_size = 0;     // 0: max(L + 1, floor(2M / 3))
  std::size_t grid_points = 4001;
  double min_peak_separation = 0.0;  // 0: 2 / subarray_size
  bool refine = true;

  /// Subarray size actually used for M positions and L sources.
  std::size_t resolved_subarray(std::size_t M, std::size_t L) const {
    const std::size_t msub = subarray_size > 0 ? subarray_size : std::max(L + 1, (2 * M) / 3);
    if (!(L < msub && msub + L <= M + 1))
      throw Error(ErrorCode::BadSubarray, "subarray size must satisfy L < M_sub <= M - L + 1");
    return msub;
  }

  double resolved_separation(std::size_t msub) const {
    return min_peak_separation > 0.0 ? min_peak_separation : 2.0 / static_cast<double>(msub);
  }

  void validate() const {
    if (grid_points < 201) throw Error(ErrorCode::InvalidArgument, "grid_points must be >= 201");
  }
};

struct SfpSets {
  std::vector<double> u_set;  // X scan
  std::vector<double> v_set;  // Z scan
  std::vector<double> grid;
  std::vector<double> spectrum_x;
  std::vector<double> spectrum_z;
};

inline std::vector<double> search_grid(std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

/// C = 1/(K Q) sum_k sum_q s_q s_q^H over the Q = M - M_sub + 1 overlapping
/// subarrays of one axis (rows = positions, columns = subcarriers).
inline Eigen::MatrixXcd smoothed_covariance(const Eigen::MatrixXcd& axis_samples, std::size_t subarray) {
  const auto M = static_cast<std::size_t>(axis_samples.rows());
  const auto K = static_cast<std::size_t>(axis_samples.cols());
  if (subarray < 1 || subarray > M) throw Error(ErrorCode::BadSubarray, "subarray larger than the scan");
  const std::size_t Q = M - subarray + 1;
  const auto ms = static_cast<Eigen::Index>(subarray);
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(ms, ms);
  for (std::size_t q = 0; q < Q; ++q) {
    const auto block = axis_samples.middleRows(static_cast<Eigen::Index>(q), ms);
    C.noalias() += block * block.adjoint();
  }
  C /= static_cast<double>(K * Q);
  return 0.5 * (C + C.adjoint());
}

/// d(theta)_m = exp(-j 2 pi (d / lambda) m theta), m = 0..n-1.
inline Eigen::VectorXcd steering_vector(std::size_t n, double spacing_over_lambda, double theta) {
  Eigen::VectorXcd d(static_cast<Eigen::Index>(n));
  for (std::size_t m = 0; m < n; ++m)
    d[static_cast<Eigen::Index>(m)] =
        std::polar(1.0, -2.0 * kPi * spacing_over_lambda * static_cast<double>(m) * theta);
  return d;
}

/// Orthonormal basis of the noise subspace (eigenvectors of the smallest
/// size - num_sources eigenvalues).
inline Eigen::MatrixXcd noise_subspace(const Eigen::MatrixXcd& cov, std::size_t num_sources) {
  const auto n = static_cast<std::size_t>(cov.rows());
  if (num_sources >= n) throw Error(ErrorCode::BadSubarray, "noise subspace is empty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);  // ascending eigenvalues
  return es.eigenvectors().leftCols(static_cast<Eigen::Index>(n - num_sources));
}

inline std::vector<double> music_spectrum(const Eigen::MatrixXcd& cov, std::size_t num_sources,
                                          std::span<const double> grid, double spacing_over_lambda) {
  const Eigen::MatrixXcd un = noise_subspace(cov, num_sources);
  const auto n = static_cast<std::size_t>(cov.rows());
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXcd d = steering_vector(n, spacing_over_lambda, grid[i]);
    const double denom = (un.adjoint() * d).squaredNorm();
    out[i] = 1.0 / std::max(denom, 1e-300);
  }
  return out;
}

/// The `count` strongest local maxima that are at least `min_separation`
/// apart, optionally refined by a parabola through the log-spectrum. With
/// half-wavelength spacing the grid ends alias, so separation is measured
/// modulo the spatial period `period`.
inline std::vector<double> pick_peaks(std::span<const double> spectrum, std::span<const double> grid,
                                      std::size_t count, double min_separation, bool refine,
                                      double period = 0.0) {
  const std::size_t n = spectrum.size();
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || spectrum[i] > spectrum[i - 1];
    const bool right = i + 1 == n || spectrum[i] >= spectrum[i + 1];
    if (left && right && n > 1) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return spectrum[a] > spectrum[b]; });

  auto distance = [period](double a, double b) {
    double d = std::abs(a - b);
    if (period > 0.0) d = std::min(d, std::abs(period - d));
    return d;
  };

  const double step = n > 1 ? grid[1] - grid[0] : 0.0;
  std::vector<double> picked;
  for (std::size_t i : cand) {
    if (picked.size() == count) break;
    double x = grid[i];
    if (refine && i > 0 && i + 1 < n) {
      const double ym = std::log(spectrum[i - 1]);
      const double y0 = std::log(spectrum[i]);
      const double yp = std::log(spectrum[i + 1]);
      const double den = ym - 2.0 * y0 + yp;
      if (den < 0.0) x += std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5) * step;
    }
    x = std::clamp(x, grid.front(), grid.back());
    const bool far = std::all_of(picked.begin(), picked.end(),
                                 [&](double p) { return distance(p, x) >= min_separation; });
    if (far) picked.push_back(x);
  }
  if (picked.size() < count) throw Error(ErrorCode::InsufficientPeaks, "fewer separated peaks than paths");
  return picked;
}

/// One axis: covariance, spectrum, peaks.
inline std::vector<double> estimate_axis(const Eigen::MatrixXcd& axis_samples, std::size_t num_paths,
                                         const MusicConfig& cfg, double spacing_over_lambda,
                                         std::span<const double> grid, std::vector<double>* spectrum_out = nullptr) {
  const auto M = static_cast<std::size_t>(axis_samples.rows());
  const std::size_t msub = cfg.resolved_subarray(M, num_paths);
  const Eigen::MatrixXcd cov = smoothed_covariance(axis_samples, msub);
  std::vector<double> spec = music_spectrum(cov, num_paths, grid, spacing_over_lambda);
  const double period = 1.0 / spacing_over_lambda;
  auto peaks = pick_peaks(spec, grid, num_paths, cfg.resolved_separation(msub), cfg.refine,
                          period <= 2.0 + 1e-12 ? period : 0.0);
  if (spectrum_out) *spectrum_out = std::move(spec);
  return peaks;
}

/// Unordered SFP sets from the X-axis and Z-axis halves of a measurement.
inline SfpSets extract_sfps(const ScanMeasurement& meas, std::size_t num_paths, const MusicConfig& cfg,
                            const SystemConfig& system) {
  cfg.validate();
  if (num_paths < 1) throw Error(ErrorCode::InvalidArgument, "at least one path is required");
  const double ratio = system.spacing() / system.wavelength();
  SfpSets out;
  out.grid = search_grid(cfg.grid_points);
  out.u_set = estimate_axis(meas.x_axis(), num_paths, cfg, ratio, out.grid, &out.spectrum_x);
  out.v_set = estimate_axis(meas.z_axis(), num_paths, cfg, ratio, out.grid, &out.spectrum_z);
  return out;
}

}  // namespace masense
