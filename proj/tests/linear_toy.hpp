#pragma once

// Linearized scattering problem with frozen wavefields, used to exercise the tau
// continuation rule: pred(f) = H diag(f) U with U fixed.

#include "support.hpp"

#include "rtomo/inversion.hpp"
#include "rtomo/objective.hpp"
#include "rtomo/proxqn.hpp"

#include <cmath>
#include <vector>

namespace testing {

class FrozenFieldMisfit final : public rtomo::SmoothObjective {
 public:
  FrozenFieldMisfit(const rtomo::GreenOperators& ops, Eigen::MatrixXcd U, Eigen::MatrixXcd Y)
      : ops_(ops), U_(std::move(U)), Y_(std::move(Y)) {}

  [[nodiscard]] Eigen::MatrixXcd residual(const Eigen::VectorXd& f) const {
    return Y_ - ops_.H * f.cast<rtomo::cplx>().asDiagonal() * U_;
  }
  double value(const Eigen::VectorXd& f) override { return 0.5 * residual(f).squaredNorm(); }
  double value_and_gradient(const Eigen::VectorXd& f, Eigen::VectorXd& g) override {
    const Eigen::MatrixXcd r = residual(f);
    g = -(U_.conjugate().cwiseProduct(ops_.H.adjoint() * r)).rowwise().sum().real();
    return 0.5 * r.squaredNorm();
  }
  [[nodiscard]] const Eigen::MatrixXcd& fields() const { return U_; }
  [[nodiscard]] const Eigen::MatrixXcd& data() const { return Y_; }

 private:
  const rtomo::GreenOperators& ops_;
  Eigen::MatrixXcd U_;
  Eigen::MatrixXcd Y_;
};

struct TauRun {
  std::vector<double> tau;
  std::vector<double> residual;  // ||r|| at the subproblem solution for tau[k]
  double sigma = 0.0;
};

/// Solves the constrained subproblem for tau_0 = 0, then applies `steps` continuation updates,
/// re-solving after each one.
inline TauRun run_tau_continuation(const rtomo::GreenOperators& ops, const Eigen::VectorXd& f_true, double noise_rel,
                                   int steps, bool conjugate, std::uint64_t seed = 1) {
  const Eigen::MatrixXcd U = dense_fields(ops, f_true);
  Eigen::MatrixXcd Y = ops.H * f_true.cast<rtomo::cplx>().asDiagonal() * U;
  std::mt19937_64 rng(seed);
  Eigen::MatrixXcd noise(Y.rows(), Y.cols());
  for (Eigen::Index c = 0; c < Y.cols(); ++c) noise.col(c) = random_cvector(rng, Y.rows());
  noise *= noise_rel * Y.norm() / noise.norm();
  Y += noise;

  FrozenFieldMisfit phi(ops, U, Y);
  const rtomo::TVOperator D(ops.grid);
  rtomo::ProxQNConfig cfg;
  cfg.i_max = 3000;
  cfg.grad_tol = 1e-12;
  cfg.inner_t_max = 2000;
  cfg.inner_tol = 1e-13;
  cfg.prox.tol = 1e-13;
  cfg.prox.t_max = 20000;

  TauRun run;
  run.sigma = noise.norm();
  double tau = 0.0;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(f_true.size());
  for (int k = 0; k <= steps; ++k) {
    f = rtomo::prox_qn_solve(phi, D, f, tau, cfg).f;
    const Eigen::MatrixXcd r = phi.residual(f);
    run.tau.push_back(tau);
    run.residual.push_back(r.norm());
    if (k == steps) break;
    rtomo::ResidualSet rs;
    rs.batch = {0};
    rs.r = {r};
    rtomo::WavefieldSet ws;
    ws.fields = {U};
    const std::vector<rtomo::GreenOperators> bank{ops};
    tau = rtomo::tau_update(tau, rs, ws, bank, D, run.sigma, conjugate).tau;
  }
  return run;
}

}  // namespace testing
