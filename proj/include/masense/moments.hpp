#pragma once

// Closed-form moments of the plate-frame projections of a random arrival
// direction whose elevation and azimuth are independent Gaussians.

#include <cmath>

#include "masense/geometry.hpp"

namespace masense {

struct PathPrior {
  double mu = 90.0;       // elevation mean, deg
  double sigma = 0.0;     // elevation std, deg
  double xi = 0.0;        // azimuth mean, deg
  double varsigma = 0.0;  // azimuth std, deg
};

/// E[cos X], E[sin X], E[cos^2 X], E[sin^2 X], E[sin X cos X] for X ~ N(mean, std^2).
struct TrigMoments {
  double cos = 1.0;
  double sin = 0.0;
  double cos2 = 1.0;
  double sin2 = 0.0;
  double sincos = 0.0;
};

inline TrigMoments gauss_trig_moments(double mean_deg, double std_deg) {
  const double m = deg2rad(mean_deg);
  const double s = deg2rad(std_deg);
  const double e1 = std::exp(-s * s / 2.0);
  const double e2 = std::exp(-2.0 * s * s);
  TrigMoments t;
  t.cos = std::cos(m) * e1;
  t.sin = std::sin(m) * e1;
  t.cos2 = 0.5 * (1.0 + e2 * std::cos(2.0 * m));
  t.sin2 = 0.5 * (1.0 - e2 * std::cos(2.0 * m));
  t.sincos = 0.5 * e2 * std::sin(2.0 * m);
  return t;
}

/// First moments (mean_*) and raw second moments (second_*) of the projections
/// of R^T a(0) onto the plate X, Z and Y axes.
struct ProjectionMoments {
  double mean_x = 0.0;
  double mean_z = 0.0;
  double mean_y = 0.0;
  double second_x = 0.0;
  double second_z = 0.0;
  double second_y = 0.0;

  double var_x() const { return second_x - mean_x * mean_x; }
  double var_z() const { return second_z - mean_z * mean_z; }
  double var_y() const { return second_y - mean_y * mean_y; }
};

inline ProjectionMoments projection_moments(const PathPrior& prior, const Orientation& orient) {
  const double a = deg2rad(orient.alpha);
  const double b = deg2rad(orient.beta);
  const double g = deg2rad(orient.gamma);
  const double ca = std::cos(a), sa = std::sin(a);
  const double cb = std::cos(b), sb = std::sin(b);
  const double cg = std::cos(g), sg = std::sin(g);

  const TrigMoments th = gauss_trig_moments(prior.mu, prior.sigma);
  const TrigMoments ph = gauss_trig_moments(prior.xi, prior.varsigma);
  // Azimuth measured from the rotated X axis.
  const TrigMoments ph_a = gauss_trig_moments(prior.xi - orient.alpha, prior.varsigma);

  // Third and second columns of R, less the Z components.
  const double q = ca * sb * cg + sa * sg;
  const double h = sa * sb * cg - ca * sg;
  const double p = ca * sb * sg - sa * cg;
  const double gg = sa * sb * sg + ca * cg;
  const double zz = cb * cg;  // R(2,2)
  const double zy = cb * sg;  // R(2,1)

  ProjectionMoments out;
  out.mean_x = cb * th.sin * ph_a.cos - sb * th.cos;
  out.mean_z = th.sin * (q * ph.cos + h * ph.sin) + zz * th.cos;
  out.mean_y = th.sin * (p * ph.cos + gg * ph.sin) + zy * th.cos;

  out.second_x = cb * cb * th.sin2 * ph_a.cos2 + sb * sb * th.cos2 -
                 std::sin(2.0 * b) * th.sincos * ph_a.cos;
  out.second_z = th.sin2 * (q * q * ph.cos2 + h * h * ph.sin2 + 2.0 * q * h * ph.sincos) +
                 zz * zz * th.cos2 + 2.0 * zz * th.sincos * (h * ph.sin + q * ph.cos);
  out.second_y = th.sin2 * (p * p * ph.cos2 + gg * gg * ph.sin2 + 2.0 * p * gg * ph.sincos) +
                 zy * zy * th.cos2 + 2.0 * zy * th.sincos * (p * ph.cos + gg * ph.sin);
  return out;
}

}  // namespace masense
