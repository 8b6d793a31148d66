#pragma once

// Slow, independent reference solutions for the projection operators.

#include "rtomo/proxtv.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>

namespace testing {

using rtomo::TVOperator;

inline Eigen::MatrixXd dense_D(const TVOperator& D) {
  Eigen::MatrixXd M(D.edges(), D.cells());
  for (Eigen::Index c = 0; c < D.cells(); ++c) M.col(c) = D.apply(Eigen::VectorXd::Unit(D.cells(), c));
  return M;
}

// l1-ball projection by bisection on the soft-threshold level.
inline Eigen::VectorXd l1_oracle(const Eigen::VectorXd& w, double tau) {
  if (w.lpNorm<1>() <= tau) return w;
  auto soft = [&](double t) { return (w.array().abs() - t).max(0.0).matrix().eval(); };
  double lo = 0.0, hi = w.cwiseAbs().maxCoeff();
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (soft(mid).sum() > tau ? lo : hi) = mid;
  }
  const Eigen::VectorXd m = soft(0.5 * (lo + hi));
  return (m.array() * w.array().sign()).matrix();
}

// Projection onto {f >= 0, ||Df||_1 <= tau}: bisection on the TV multiplier mu, each
// subproblem min 1/2||f - w||^2 + mu ||Df||_1 + i(f >= 0) solved through its dual
// max_p ... with f = max(w - D^T p, 0), |p| <= mu, by restarted accelerated projected gradient.
inline Eigen::VectorXd nn_tv_oracle(const TVOperator& D, const Eigen::VectorXd& w, double tau) {
  const Eigen::VectorXd w0 = w.cwiseMax(0.0);
  if (D.tv(w0) <= tau) return w0;
  const double L = 8.0;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(D.edges());
  auto solve_mu = [&](double mu) {
    Eigen::VectorXd y = p, prev = p;
    double t = 1.0;
    double last_obj = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 40000; ++it) {
      const Eigen::VectorXd f = (w - D.apply_transpose(y)).cwiseMax(0.0);
      const Eigen::VectorXd pn = (y + D.apply(f) / L).cwiseMax(-mu).cwiseMin(mu);
      const Eigen::VectorXd fp = (w - D.apply_transpose(pn)).cwiseMax(0.0);
      const double obj = 0.5 * fp.squaredNorm();  // dual objective up to constants (minimized)
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      if (obj > last_obj) {  // adaptive restart
        t = 1.0;
        y = pn;
      } else {
        y = pn + ((t - 1.0) / tn) * (pn - prev);
        t = tn;
      }
      if ((pn - prev).lpNorm<Eigen::Infinity>() < 1e-15 * std::max(1.0, mu) && it > 10) {
        prev = pn;
        break;
      }
      prev = pn;
      last_obj = obj;
    }
    p = prev;
    return (w - D.apply_transpose(p)).cwiseMax(0.0).eval();
  };
  double lo = 0.0, hi = 1.0;
  while (D.tv(solve_mu(hi)) > tau) hi *= 2.0;
  p.setZero();
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (D.tv(solve_mu(mid)) > tau ? lo : hi) = mid;
  }
  return solve_mu(hi);
}

}  // namespace testing
