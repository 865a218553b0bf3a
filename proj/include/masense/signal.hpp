#pragma once

// Measurement synthesis for the two linear antenna scans on a tilted plate.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "masense/error.hpp"
#include "masense/geometry.hpp"
#include "masense/random.hpp"

namespace masense {

using cdouble = std::complex<double>;

enum class SubcarrierGrid { Centered, OneSided };

struct SystemConfig {
  double carrier_hz = 28e9;
  double bandwidth_hz = 50e6;
  std::size_t num_subcarriers = 64;  // K
  std::size_t num_positions = 32;    // M, per scan axis
  double spacing_m = 0.0;            // d; 0 selects half a carrier wavelength
  double power = 64.0;               // P (linear)
  double noise_n0 = 0.0;             // N0 (linear)
  SubcarrierGrid grid = SubcarrierGrid::Centered;

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  double spacing() const { return spacing_m > 0.0 ? spacing_m : 0.5 * wavelength(); }
  double subcarrier_spacing() const { return bandwidth_hz / static_cast<double>(num_subcarriers); }

  /// Frequency of subcarrier k, 1-based.
  double frequency(std::size_t k) const {
    const double kk = static_cast<double>(k);
    if (grid == SubcarrierGrid::OneSided) return carrier_hz + (kk - 1.0) * subcarrier_spacing();
    return carrier_hz + (kk - (static_cast<double>(num_subcarriers) + 1.0) / 2.0) * subcarrier_spacing();
  }

  /// Per-sample noise variance P N0 / K after demodulation.
  double noise_variance() const { return power * noise_n0 / static_cast<double>(num_subcarriers); }
  double amplitude() const { return power / static_cast<double>(num_subcarriers); }

  /// Sets N0 so that -10 log10(P N0 / K) equals snr_db.
  void set_snr_db(double snr_db) {
    noise_n0 = std::pow(10.0, -snr_db / 10.0) * static_cast<double>(num_subcarriers) / power;
  }

  void validate() const {
    if (num_subcarriers < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
    if (num_positions < 2) throw Error(ErrorCode::InvalidArgument, "M must be >= 2");
    if (spacing_m < 0.0) throw Error(ErrorCode::InvalidArgument, "spacing must be > 0");
    if (!(power > 0.0)) throw Error(ErrorCode::InvalidArgument, "power must be > 0");
    if (noise_n0 < 0.0) throw Error(ErrorCode::InvalidArgument, "N0 must be >= 0");
    if (!(carrier_hz > 0.0) || bandwidth_hz < 0.0)
      throw Error(ErrorCode::InvalidArgument, "carrier and bandwidth must be positive");
  }
};

struct PathTruth {
  AnglePair angles0;        // initial frame
  double tau = 0.0;         // seconds
  cdouble upsilon{1.0, 0.0};
};

struct Scene {
  std::vector<PathTruth> paths;
  SystemConfig config;
};

struct ScanMeasurement {
  std::vector<Vec3> positions;  // 2M plate-frame positions: M on X, then M on Z
  Eigen::MatrixXcd samples;     // 2M x K
  std::size_t axis_split = 0;   // M
  std::vector<std::size_t> back_side_paths;  // paths with local Y <= 0 (diagnostic)

  Eigen::MatrixXcd x_axis() const { return samples.topRows(axis_split); }
  Eigen::MatrixXcd z_axis() const { return samples.bottomRows(samples.rows() - axis_split); }
};

inline std::vector<Vec3> scan_positions(const SystemConfig& config) {
  const std::size_t m = config.num_positions;
  const double d = config.spacing();
  std::vector<Vec3> out;
  out.reserve(2 * m);
  for (std::size_t i = 0; i < m; ++i) out.emplace_back(static_cast<double>(i) * d, 0.0, 0.0);
  for (std::size_t i = 0; i < m; ++i) out.emplace_back(0.0, 0.0, static_cast<double>(i) * d);
  return out;
}

/// Extra path length a^T p for an on-plate position p = (x, 0, z).
inline double propagation_delta(const Direction3& dir_local, const Vec3& position) {
  return dir_local.x() * position.x() + dir_local.z() * position.z();
}

namespace detail {

inline std::vector<Direction3> local_directions(const Scene& scene, const Orientation& orient) {
  const Mat3 rt = rotation_matrix(orient).transpose();
  std::vector<Direction3> out;
  out.reserve(scene.paths.size());
  for (const auto& p : scene.paths) out.push_back(rt * unit_direction(p.angles0));
  return out;
}

inline cdouble response(const Scene& scene, const std::vector<Direction3>& local, const Vec3& position,
                        double fk) {
  cdouble h{0.0, 0.0};
  for (std::size_t l = 0; l < scene.paths.size(); ++l) {
    const double rho = propagation_delta(local[l], position);
    const double phase = -2.0 * kPi * fk * (scene.paths[l].tau + rho / kSpeedOfLight);
    h += scene.paths[l].upsilon * std::polar(1.0, phase);
  }
  return h;
}

}  // namespace detail

/// Noiseless channel at one position and subcarrier k (1-based).
inline cdouble channel_response(const Scene& scene, const Orientation& orient, const Vec3& position,
                                std::size_t k) {
  if (k < 1 || k > scene.config.num_subcarriers)
    throw Error(ErrorCode::InvalidArgument, "subcarrier index out of range");
  return detail::response(scene, detail::local_directions(scene, orient), position,
                          scene.config.frequency(k));
}

/// Demodulated samples s = (P/K) h + w over both scans, w ~ CN(0, P N0 / K).
inline ScanMeasurement synthesize_scan(const Scene& scene, const Orientation& orient, std::uint64_t rng_seed) {
  const SystemConfig& cfg = scene.config;
  cfg.validate();
  const auto local = detail::local_directions(scene, orient);

  ScanMeasurement meas;
  meas.positions = scan_positions(cfg);
  meas.axis_split = cfg.num_positions;
  for (std::size_t l = 0; l < local.size(); ++l)
    if (local[l].y() <= 0.0) meas.back_side_paths.push_back(l);

  const std::size_t rows = meas.positions.size();
  const std::size_t K = cfg.num_subcarriers;
  meas.samples.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(K));

  Rng rng(rng_seed);
  const double var = cfg.noise_variance();
  const double amp = cfg.amplitude();
  for (std::size_t m = 0; m < rows; ++m) {
    for (std::size_t k = 1; k <= K; ++k) {
      cdouble s = amp * detail::response(scene, local, meas.positions[m], cfg.frequency(k));
      if (var > 0.0) s += complex_normal(rng, var);
      meas.samples(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k - 1)) = s;
    }
  }
  return meas;
}

}  // namespace masense
