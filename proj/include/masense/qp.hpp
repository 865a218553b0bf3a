#pragma once

// Dense convex quadratic programming by a primal-dual interior-point method:
//
//   minimize 0.5 z^T H z + h^T z   subject to   G z >= r
//
// H must be positive semidefinite and H + G^T G positive definite. Sized for the
// small subproblems of the orientation solver (tens of variables).

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace masense {

struct QpResult {
  Eigen::VectorXd z;
  Eigen::VectorXd multipliers;  // one per inequality row, >= 0
  int iterations = 0;
  bool converged = false;
};

struct QpOptions {
  int max_iter = 200;
  double tol = 1e-11;
};

inline QpResult solve_qp(const Eigen::MatrixXd& H_in, const Eigen::VectorXd& h_in, const Eigen::MatrixXd& G,
                         const Eigen::VectorXd& r, const QpOptions& opt = {}) {
  using Eigen::VectorXd;
  // Objective scaling keeps the multipliers O(1) whatever the penalty weights.
  const double obj_scale = std::max({1.0, h_in.lpNorm<Eigen::Infinity>(), H_in.lpNorm<Eigen::Infinity>()});
  const Eigen::MatrixXd H = H_in / obj_scale;
  const VectorXd h = h_in / obj_scale;
  const Eigen::Index n = H.rows();
  const Eigen::Index m = G.rows();

  QpResult res;
  res.z = VectorXd::Zero(n);
  if (m == 0) {
    res.z = H.ldlt().solve(-h);
    res.converged = true;
    return res;
  }

  VectorXd z = VectorXd::Zero(n);
  VectorXd s = (G * z - r).cwiseMax(1.0);
  VectorXd lam = VectorXd::Ones(m);
  const double scale = 1.0 + std::max(h.lpNorm<Eigen::Infinity>(), r.lpNorm<Eigen::Infinity>());

  auto max_step = [](const VectorXd& v, const VectorXd& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
  };

  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    const VectorXd rd = H * z + h - G.transpose() * lam;
    const VectorXd rp = G * z - s - r;
    const double mu = s.dot(lam) / static_cast<double>(m);
    if (mu < opt.tol * scale && rd.lpNorm<Eigen::Infinity>() < opt.tol * scale &&
        rp.lpNorm<Eigen::Infinity>() < opt.tol * scale) {
      res.converged = true;
      break;
    }

    const VectorXd d = lam.cwiseQuotient(s);
    const Eigen::MatrixXd K = H + G.transpose() * d.asDiagonal() * G;
    const Eigen::LDLT<Eigen::MatrixXd> fac(K);

    // Mehrotra predictor-corrector. `target` is the complementarity goal s_i lam_i.
    auto direction = [&](const VectorXd& target, VectorXd& dz, VectorXd& ds, VectorXd& dl) {
      const VectorXd w = -rp - s + target.cwiseQuotient(lam);
      dz = fac.solve(-rd + G.transpose() * d.cwiseProduct(w));
      dl = d.cwiseProduct(w - G * dz);
      ds = -s + target.cwiseQuotient(lam) - s.cwiseQuotient(lam).cwiseProduct(dl);
    };

    VectorXd dz, ds, dl;
    direction(VectorXd::Zero(m), dz, ds, dl);
    const double a_aff = std::min(max_step(s, ds), max_step(lam, dl));
    const double mu_aff = (s + a_aff * ds).dot(lam + a_aff * dl) / static_cast<double>(m);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-6, 1.0);
    const VectorXd corr = VectorXd::Constant(m, sigma * mu) - ds.cwiseProduct(dl);
    direction(corr, dz, ds, dl);

    const double a = std::min(1.0, 0.995 * std::min(max_step(s, ds), max_step(lam, dl)));
    z += a * dz;
    s += a * ds;
    lam += a * dl;
    s = s.cwiseMax(1e-300);
    lam = lam.cwiseMax(1e-300);
  }
  res.z = z;
  res.multipliers = lam * obj_scale;
  return res;
}

}  // namespace masense
