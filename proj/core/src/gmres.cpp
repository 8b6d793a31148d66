#include "rtomo/gmres.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace rtomo {

namespace {

using cplx = std::complex<double>;

// Rotation that annihilates b in (a, b): [c s; -conj(s) c].
void make_rotation(cplx a, cplx b, double& c, cplx& s) {
  const double aa = std::abs(a), bb = std::abs(b);
  if (bb == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (aa == 0.0) {
    c = 0.0;
    s = std::conj(b) / bb;
  } else {
    const double r = std::hypot(aa, bb);
    c = aa / r;
    s = (a / aa) * std::conj(b) / r;
  }
}

}  // namespace

GmresResult gmres(const ComplexLinearMap& apply, const Eigen::VectorXcd& b, const GmresOptions& opts,
                  const Eigen::VectorXcd& x0) {
  if (opts.restart < 1 || opts.max_iterations < 0 || !(opts.tol > 0.0))
    throw std::invalid_argument("gmres: invalid options");
  const Eigen::Index n = b.size();
  GmresResult res;
  res.x = x0.size() == n ? x0 : Eigen::VectorXcd::Zero(n);

  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  const double target = opts.tol * bnorm;

  Eigen::VectorXcd r = b - (res.x.squaredNorm() > 0.0 ? apply(res.x) : Eigen::VectorXcd::Zero(n));
  double rnorm = r.norm();
  const int m = opts.restart;
  Eigen::MatrixXcd basis(n, m + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
  Eigen::VectorXcd g(m + 1);
  std::vector<double> cs(m);
  std::vector<cplx> sn(m);

  while (rnorm > target && res.iterations < opts.max_iterations) {
    basis.col(0) = r / rnorm;
    g.setZero();
    g[0] = rnorm;
    h.setZero();
    int j = 0;
    for (; j < m && res.iterations < opts.max_iterations; ++j) {
      Eigen::VectorXcd w = apply(basis.col(j));
      for (int i = 0; i <= j; ++i) {
        h(i, j) = basis.col(i).dot(w);
        w -= h(i, j) * basis.col(i);
      }
      const double hn = w.norm();
      h(j + 1, j) = hn;
      ++res.iterations;
      if (hn > 0.0) basis.col(j + 1) = w / hn;

      for (int i = 0; i < j; ++i) {
        const cplx t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -std::conj(sn[i]) * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      make_rotation(h(j, j), h(j + 1, j), cs[j], sn[j]);
      h(j, j) = cs[j] * h(j, j) + sn[j] * h(j + 1, j);
      h(j + 1, j) = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];

      if (std::abs(g[j + 1]) <= target || hn == 0.0) {
        ++j;
        break;
      }
    }
    // Solve the j x j triangular least-squares system and update.
    const Eigen::VectorXcd y =
        h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    res.x += basis.leftCols(j) * y;
    r = b - apply(res.x);
    const double new_norm = r.norm();
    if (!(new_norm < rnorm)) {
      rnorm = new_norm;
      break;  // a full cycle made no progress
    }
    rnorm = new_norm;
  }
  res.relative_residual = rnorm / bnorm;
  res.converged = rnorm <= target;
  return res;
}

}  // namespace rtomo
