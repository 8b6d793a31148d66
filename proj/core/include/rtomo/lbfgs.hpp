#pragma once

#include <Eigen/Core>

#include <deque>

namespace rtomo {

/// Limited-memory BFGS Hessian approximation B = delta I - W M^{-1} W^T in compact form,
/// with W = [delta S, Y] and M = [[delta S^T S, L], [L^T, -D]].
class LBFGSState {
 public:
  explicit LBFGSState(int memory = 10, bool fixed_scale = false);

  /// Stores the pair unless <s, y> <= 1e-12 ||s|| ||y||. Returns whether it was stored.
  bool update(const Eigen::VectorXd& s, const Eigen::VectorXd& y);
  void reset();

  /// delta, the multiple of the identity in B_0. Set from the newest pair unless fixed.
  [[nodiscard]] double scale() const { return delta_; }
  void set_scale(double delta);
  [[nodiscard]] int pairs() const { return static_cast<int>(s_.size()); }
  [[nodiscard]] int memory() const { return memory_; }
  [[nodiscard]] int skipped() const { return skipped_; }

  /// B v
  [[nodiscard]] Eigen::VectorXd apply_B(const Eigen::VectorXd& v) const;
  /// (I + gamma B)^{-1} v via the Woodbury identity.
  [[nodiscard]] Eigen::VectorXd apply_inv_shifted(double gamma, const Eigen::VectorXd& v) const;

 private:
  void rebuild();

  int memory_;
  bool fixed_scale_;
  double delta_ = 1.0;
  int skipped_ = 0;
  std::deque<Eigen::VectorXd> s_;
  std::deque<Eigen::VectorXd> y_;
  Eigen::MatrixXd W_;  // n x 2m
  Eigen::MatrixXd M_;  // 2m x 2m
  Eigen::MatrixXd WtW_;
};

}  // namespace rtomo
