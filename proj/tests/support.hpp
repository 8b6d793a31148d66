#pragma once

#include "rtomo/forward.hpp"
#include "rtomo/greens.hpp"
#include "rtomo/scene.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace testing {

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline Eigen::VectorXcd random_cvector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
  return v;
}

template <class A, class B>
double rel_err(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const double d = b.norm();
  return d == 0.0 ? a.norm() : (a - b).norm() / d;
}

/// Acquisition with the first `n_tx` default transmitters and all receivers.
inline rtomo::AcquisitionGeometry acquisition(int n_tx = 5) {
  rtomo::AcquisitionGeometry acq = rtomo::default_acquisition();
  acq.tx.resize(n_tx);
  return acq;
}

inline std::vector<rtomo::GreenOperators> bank(int n, const std::vector<double>& mhz, int n_tx = 5,
                                               rtomo::OperatorStorage storage = rtomo::OperatorStorage::automatic) {
  std::vector<double> hz;
  for (double f : mhz) hz.push_back(f * 1e6);
  const auto acq = acquisition(n_tx);
  return rtomo::build_operator_bank(rtomo::Grid::unit_square(n), acq, rtomo::FrequencySchedule(hz),
                                    rtomo::SourceSpec::flat(n_tx), storage);
}

/// Dense (I - G diag f)^{-1} V, assembled independently of the library solvers.
inline Eigen::MatrixXcd dense_fields(const rtomo::GreenOperators& ops, const Eigen::VectorXd& f) {
  const Eigen::MatrixXcd G = ops.G.dense();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(G.rows(), G.cols());
  for (Eigen::Index c = 0; c < G.cols(); ++c) A.col(c) -= G.col(c) * f[c];
  return A.fullPivLu().solve(ops.V);
}

/// Convex QP min q^T x + 1/2 x^T B x s.t. A x <= b by enumerating active sets (tiny sizes only).
inline Eigen::VectorXd active_set_qp(const Eigen::MatrixXd& B, const Eigen::VectorXd& q, const Eigen::MatrixXd& A,
                                     const Eigen::VectorXd& b) {
  const int n = static_cast<int>(B.rows());
  const int m = static_cast<int>(A.rows());
  Eigen::VectorXd best;
  double best_val = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) act.push_back(i);
    if (static_cast<int>(act.size()) > n) continue;
    const int k = static_cast<int>(act.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    K.topLeftCorner(n, n) = B;
    rhs.head(n) = -q;
    for (int i = 0; i < k; ++i) {
      K.block(0, n + i, n, 1) = A.row(act[i]).transpose();
      K.block(n + i, 0, 1, n) = A.row(act[i]);
      rhs[n + i] = b[act[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd x = lu.solve(rhs).head(n);
    if (((A * x - b).array() > 1e-12).any()) continue;
    const double val = q.dot(x) + 0.5 * x.dot(B * x);
    if (val < best_val) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

}  // namespace testing
