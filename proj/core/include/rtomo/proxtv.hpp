#pragma once

#include "rtomo/scene.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>

namespace rtomo {

/// Anisotropic finite-difference operator D = [I_x (x) D_y ; D_x (x) I_y] with
/// non-cyclic forward differences. Rows are ordered y-differences first
/// (index ix*(ny-1)+iy), then x-differences (offset nx*(ny-1), index ix*ny+iy).
class TVOperator {
 public:
  TVOperator(int nx, int ny);
  explicit TVOperator(const Grid& grid) : TVOperator(grid.nx, grid.ny) {}

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] Eigen::Index cells() const { return static_cast<Eigen::Index>(nx_) * ny_; }
  [[nodiscard]] Eigen::Index edges() const {
    return static_cast<Eigen::Index>(nx_) * (ny_ - 1) + static_cast<Eigen::Index>(nx_ - 1) * ny_;
  }

  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  [[nodiscard]] Eigen::VectorXd apply_transpose(const Eigen::VectorXd& w) const;
  /// ||D f||_1
  [[nodiscard]] double tv(const Eigen::VectorXd& f) const;
  /// Power-iteration estimate of ||D^T D + I||_2, cached per grid shape.
  [[nodiscard]] double norm_estimate() const { return norm_; }
  /// 0.9 / sqrt(norm_estimate())
  [[nodiscard]] double default_step() const;

 private:
  int nx_;
  int ny_;
  double norm_;
};

/// Euclidean projection onto {x : ||x||_1 <= tau} by sort-based thresholding.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& w, double tau);
/// Soft-threshold level used by project_l1_ball (0 when w is inside the ball).
double l1_ball_threshold(const Eigen::VectorXd& w, double tau);
Eigen::VectorXd project_nonneg(const Eigen::VectorXd& w);

/// Primal/dual iterates of the projection solver, reusable as a warm start.
struct ProxTVState {
  Eigen::VectorXd f;
  Eigen::VectorXd u;  // edge duals
  Eigen::VectorXd v;  // orthant duals
};

struct ProxTVResult {
  Eigen::VectorXd f;
  int iterations = 0;
  double residual = 0.0;  // relative change + feasibility violation at exit
  bool converged = false;
};

struct ProxTVOptions {
  double gamma = 1.0;
  int t_max = 2000;
  std::optional<double> step;  // defaults to TVOperator::default_step()
  double tol = 1e-8;
  /// Clamp to >= 0 and rescale about the mean so the returned image is exactly feasible.
  bool polish = true;
};

/// Projection of w onto {f >= 0, ||D f||_1 <= tau} by the three-term primal-dual
/// iteration. `state`, when given, provides the starting iterates and receives the final ones.
ProxTVResult prox_nn_tv_detailed(const TVOperator& D, const Eigen::VectorXd& w, double tau,
                                 const ProxTVOptions& opts = {}, ProxTVState* state = nullptr);
Eigen::VectorXd prox_nn_tv(const TVOperator& D, const Eigen::VectorXd& w, double tau,
                           const ProxTVOptions& opts = {}, ProxTVState* state = nullptr);

/// ||D (D^T D)^+ (x - mean x)||_inf with the pseudo-inverse applied by conjugate gradients.
/// Throws SolverError when CG misses `tol`.
double tv_polar(const TVOperator& D, const Eigen::VectorXd& x, double tol = 1e-12);

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Black-box pieces of min_x h(x) + g(Lx) + k(x). The resolvents are
/// (I + gamma grad h)^{-1}, (I + gamma dg*)^{-1} and (I + gamma dk*)^{-1}
/// for the step gamma that is passed to pd_three_term.
struct ThreeTermProblem {
  VectorMap resolvent_h;
  VectorMap resolvent_gstar;
  VectorMap resolvent_kstar;
  VectorMap L;
  VectorMap Lt;
};

struct ThreeTermState {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};

struct ThreeTermResult {
  ThreeTermState state;
  int iterations = 0;
  double last_change = 0.0;  // ||x+ - x|| / max(||x+||, 1)
};

/// Runs the preconditioned primal-dual fixed-point iteration
///   x+ = R_h(x - gamma L^T u - gamma v)
///   u+ = R_g*(u + gamma L(2x+ - x))
///   v+ = R_k*(v + gamma (2x+ - x))
/// for t_max steps, or until the relative primal change falls below tol (tol <= 0 disables).
/// Throws SolverError if an iterate becomes non-finite or overflows.
ThreeTermResult pd_three_term(const ThreeTermProblem& p, double gamma, int t_max, ThreeTermState start,
                              double tol = 0.0);

/// Dual updates of the projection solver written in resolvent form.
VectorMap l1_ball_conjugate_resolvent(double tau, double gamma);
VectorMap nonneg_conjugate_resolvent(double gamma);

}  // namespace rtomo
