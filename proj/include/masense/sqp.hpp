#pragma once

// Sequential quadratic programming for small smooth problems
//
//   minimize f(x)   subject to   c(x) >= 0
//
// using the elastic (l1-penalty) formulation so that every quadratic
// subproblem is feasible even when the linearized constraints are not.
// Gradients come from central finite differences; the Lagrangian Hessian is
// approximated by damped BFGS.

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "masense/qp.hpp"

namespace masense {

struct SqpOptions {
  int max_iter = 150;
  double fd_step = 1e-5;
  double step_tol = 1e-9;
  double feasibility_tol = 1e-9;
  double trust_radius = 0.5;  // box on each step component
  double penalty = 10.0;
  double max_penalty = 1e8;
};

struct SqpResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd c;
  int iterations = 0;
  bool converged = false;
  // Best feasible iterate seen along the way (min f), if any.
  std::optional<Eigen::VectorXd> best_feasible;
  double best_feasible_f = 0.0;
};

template <class Objective>
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = xm[i] = x[i];
  }
  return g;
}

template <class Constraints>
Eigen::MatrixXd fd_jacobian(const Constraints& c, const Eigen::VectorXd& x, Eigen::Index m, double h) {
  Eigen::MatrixXd J(m, x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    J.col(i) = (c(xp) - c(xm)) / (2.0 * h);
    xp[i] = xm[i] = x[i];
  }
  return J;
}

template <class Objective, class Constraints>
SqpResult sqp_minimize(const Objective& f, const Constraints& c, Eigen::VectorXd x, const SqpOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const Eigen::Index n = x.size();

  SqpResult res;
  double fx = f(x);
  VectorXd cx = c(x);
  const Eigen::Index m = cx.size();
  VectorXd gx = fd_gradient(f, x, opt.fd_step);
  MatrixXd Jx = fd_jacobian(c, x, m, opt.fd_step);
  MatrixXd B = MatrixXd::Identity(n, n);
  double rho = opt.penalty;

  auto violation = [](const VectorXd& cv) { return (-cv).cwiseMax(0.0).sum(); };
  auto note_feasible = [&](const VectorXd& xv, double fv, const VectorXd& cv) {
    if (cv.size() > 0 && cv.minCoeff() < -opt.feasibility_tol) return;
    if (!res.best_feasible || fv < res.best_feasible_f) {
      res.best_feasible = xv;
      res.best_feasible_f = fv;
    }
  };
  note_feasible(x, fx, cx);

  // QP in z = [p; t]:  0.5 p^T B p + g^T p + rho 1^T t
  //   s.t.  J p + t >= -c,  t >= 0,  -D <= p <= D.
  const Eigen::Index nz = n + m;
  const Eigen::Index rows = 2 * m + 2 * n;
  MatrixXd G = MatrixXd::Zero(rows, nz);
  VectorXd r(rows);
  G.block(m, n, m, m).setIdentity();
  G.block(2 * m, 0, n, n).setIdentity();
  G.block(2 * m + n, 0, n, n) = -MatrixXd::Identity(n, n);

  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;

    MatrixXd H = MatrixXd::Zero(nz, nz);
    H.topLeftCorner(n, n) = B;
    VectorXd h(nz);
    h.head(n) = gx;
    h.tail(m).setConstant(rho);
    G.block(0, 0, m, n) = Jx;
    G.block(0, n, m, m).setIdentity();
    r.head(m) = -cx;
    r.segment(m, m).setZero();
    r.tail(2 * n).setConstant(-opt.trust_radius);
    const QpResult qp = solve_qp(H, h, G, r);
    const VectorXd p = qp.z.head(n);
    const VectorXd lam = qp.multipliers.head(m);

    if (p.lpNorm<Eigen::Infinity>() < opt.step_tol) {
      res.converged = true;
      break;
    }

    const double merit = fx + rho * violation(cx);
    const double model = fx + gx.dot(p) + 0.5 * p.dot(B * p) + rho * violation(cx + Jx * p);
    const double pred = merit - model;
    if (pred <= 1e-14 * (1.0 + std::abs(merit))) {
      res.converged = true;
      break;
    }

    double step = 1.0;
    VectorXd xn;
    double fn = 0.0;
    VectorXd cn;
    bool accepted = false;
    while (step > 1e-10) {
      xn = x + step * p;
      fn = f(xn);
      cn = c(xn);
      if (fn + rho * violation(cn) <= merit - 1e-4 * step * pred) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (B.isIdentity()) break;
      B.setIdentity();
      continue;
    }

    const VectorXd gn = fd_gradient(f, xn, opt.fd_step);
    const MatrixXd Jn = fd_jacobian(c, xn, m, opt.fd_step);
    const VectorXd s = xn - x;
    VectorXd y = (gn - Jn.transpose() * lam) - (gx - Jx.transpose() * lam);
    const VectorXd Bs = B * s;
    const double sBs = s.dot(Bs);
    double sy = s.dot(y);
    if (sBs > 1e-16) {
      if (sy < 0.2 * sBs) {
        const double theta = 0.8 * sBs / (sBs - sy);
        y = theta * y + (1.0 - theta) * Bs;
        sy = s.dot(y);
      }
      B += y * y.transpose() / sy - Bs * Bs.transpose() / sBs;
    }

    // Multipliers pinned at the penalty mean the elastic variables are active.
    if (m > 0 && lam.maxCoeff() > 0.9 * rho) rho = std::min(opt.max_penalty, 10.0 * rho);

    x = xn;
    fx = fn;
    cx = cn;
    gx = gn;
    Jx = Jn;
    note_feasible(x, fx, cx);
  }

  res.x = x;
  res.f = fx;
  res.c = cx;
  return res;
}

}  // namespace masense
