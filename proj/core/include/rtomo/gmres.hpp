#pragma once

#include <Eigen/Core>

#include <functional>

namespace rtomo {

struct GmresOptions {
  double tol = 1e-8;       // relative residual target ||b - Ax|| / ||b||
  int restart = 50;
  int max_iterations = 1000;
};

struct GmresResult {
  Eigen::VectorXcd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using ComplexLinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

/// Restarted GMRES(m) with modified Gram-Schmidt Arnoldi and Givens rotations.
/// `x0` is an optional initial guess (zero when empty).
GmresResult gmres(const ComplexLinearMap& apply, const Eigen::VectorXcd& b, const GmresOptions& opts,
                  const Eigen::VectorXcd& x0 = Eigen::VectorXcd());

}  // namespace rtomo
