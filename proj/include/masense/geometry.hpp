#pragma once

// Coordinate conventions shared by the whole library.
//
// Angles are in degrees at every public interface. Elevation theta is measured
// from +Z, azimuth phi from +X towards +Y. The plate frame is obtained from
// the initial frame by the intrinsic Z-Y-X rotation R = Rz(alpha) Ry(beta) Rx(gamma);
// the antenna moves in the plate's X-Z plane and its front face points along +Y.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "masense/error.hpp"

namespace masense {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Direction3 = Eigen::Vector3d;  // unit norm

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle in degrees into (-180, 180].
inline double wrap_deg(double deg) {
  double r = std::fmod(deg + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  r -= 180.0;
  return r == -180.0 ? 180.0 : r;
}

struct AnglePair {
  double theta = 0.0;  // elevation, [0, 180]
  double phi = 0.0;    // azimuth, (-180, 180]
};

/// Brings an arbitrary (theta, phi) onto the canonical ranges describing the
/// same direction: theta folded into [0, 180] (flipping phi by 180 when
/// needed) and phi wrapped.
inline AnglePair normalize(AnglePair a) {
  double t = std::fmod(a.theta, 360.0);
  if (t < 0.0) t += 360.0;
  double p = a.phi;
  if (t > 180.0) {
    t = 360.0 - t;
    p += 180.0;
  }
  return {t, wrap_deg(p)};
}

struct Orientation {
  double alpha = 0.0;  // about Z(0)
  double beta = 0.0;   // about Y(0)
  double gamma = 0.0;  // about X(0)

  static Orientation identity() { return {}; }
  Orientation wrapped() const { return {wrap_deg(alpha), wrap_deg(beta), wrap_deg(gamma)}; }
};

/// Spatial-frequency parameters seen by the X-axis (u) and Z-axis (v) scans.
struct SfpPair {
  double u = 0.0;
  double v = 0.0;
};

inline Direction3 unit_direction(const AnglePair& angles) {
  const double t = deg2rad(angles.theta);
  const double p = deg2rad(angles.phi);
  return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

inline AnglePair angles_from_direction(const Direction3& dir) {
  const double z = std::clamp(dir.z(), -1.0, 1.0);
  const double theta = rad2deg(std::acos(z));
  const double s = std::hypot(dir.x(), dir.y());
  if (s < 1e-9) return {theta, 0.0};
  return {theta, wrap_deg(rad2deg(std::atan2(dir.y(), dir.x())))};
}

inline Mat3 rotation_z(double rad) {
  Mat3 r;
  r << std::cos(rad), -std::sin(rad), 0.0,
       std::sin(rad), std::cos(rad), 0.0,
       0.0, 0.0, 1.0;
  return r;
}

inline Mat3 rotation_y(double rad) {
  Mat3 r;
  r << std::cos(rad), 0.0, std::sin(rad),
       0.0, 1.0, 0.0,
       -std::sin(rad), 0.0, std::cos(rad);
  return r;
}

inline Mat3 rotation_x(double rad) {
  Mat3 r;
  r << 1.0, 0.0, 0.0,
       0.0, std::cos(rad), -std::sin(rad),
       0.0, std::sin(rad), std::cos(rad);
  return r;
}

/// R(alpha, beta, gamma) = Rz(alpha) Ry(beta) Rx(gamma). Columns are the plate
/// axes expressed in the initial frame.
inline Mat3 rotation_matrix(const Orientation& o) {
  return rotation_z(deg2rad(o.alpha)) * rotation_y(deg2rad(o.beta)) * rotation_x(deg2rad(o.gamma));
}

/// Expresses an initial-frame direction in the plate frame (R^T a).
inline Direction3 to_plate_frame(const Orientation& o, const Direction3& dir0) {
  return rotation_matrix(o).transpose() * dir0;
}

inline SfpPair sfp_from_local(const AnglePair& local) {
  const Direction3 a = unit_direction(local);
  return {a.x(), a.z()};
}

inline SfpPair sfp_from_direction(const Direction3& local) { return {local.x(), local.z()}; }

/// Rebuilds the plate-frame direction from (u, v) on the front side (+Y) and
/// maps it back to initial-frame angles.
inline AnglePair aoa_from_sfp(const SfpPair& sfp, const Orientation& o) {
  const double r2 = sfp.u * sfp.u + sfp.v * sfp.v;
  if (r2 > 1.0 + 1e-6) throw Error(ErrorCode::InfeasibleSfp, "u^2 + v^2 exceeds 1");
  const Direction3 local(sfp.u, std::sqrt(std::max(0.0, 1.0 - r2)), sfp.v);
  Direction3 dir0 = rotation_matrix(o) * local;
  dir0.normalize();
  return angles_from_direction(dir0);
}

}  // namespace masense
