#include "rtomo/lbfgs.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace rtomo {

LBFGSState::LBFGSState(int memory, bool fixed_scale) : memory_(memory), fixed_scale_(fixed_scale) {
  if (memory < 0) throw std::invalid_argument("L-BFGS memory must be >= 0");
}

void LBFGSState::reset() {
  s_.clear();
  y_.clear();
  skipped_ = 0;
  W_.resize(0, 0);
  M_.resize(0, 0);
  WtW_.resize(0, 0);
}

void LBFGSState::set_scale(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("L-BFGS scale must be positive");
  delta_ = delta;
  rebuild();
}

bool LBFGSState::update(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  if (s.size() != y.size()) throw std::invalid_argument("L-BFGS pair size mismatch");
  const double sy = s.dot(y);
  if (!(sy > 1e-12 * s.norm() * y.norm())) {
    ++skipped_;
    return false;
  }
  if (!fixed_scale_) delta_ = y.squaredNorm() / sy;
  if (memory_ == 0) return false;
  if (!s_.empty() && s_.front().size() != s.size()) reset();
  s_.push_back(s);
  y_.push_back(y);
  if (static_cast<int>(s_.size()) > memory_) {
    s_.pop_front();
    y_.pop_front();
  }
  rebuild();
  return true;
}

void LBFGSState::rebuild() {
  const int m = pairs();
  if (m == 0) return;
  const Eigen::Index n = s_.front().size();
  Eigen::MatrixXd S(n, m), Y(n, m);
  for (int i = 0; i < m; ++i) {
    S.col(i) = s_[i];
    Y.col(i) = y_[i];
  }
  const Eigen::MatrixXd SY = S.transpose() * Y;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < i; ++j) L(i, j) = SY(i, j);
  W_.resize(n, 2 * m);
  W_.leftCols(m) = delta_ * S;
  W_.rightCols(m) = Y;
  M_.resize(2 * m, 2 * m);
  M_.topLeftCorner(m, m) = delta_ * (S.transpose() * S);
  M_.topRightCorner(m, m) = L;
  M_.bottomLeftCorner(m, m) = L.transpose();
  M_.bottomRightCorner(m, m) = -Eigen::MatrixXd(SY.diagonal().asDiagonal());
  WtW_ = W_.transpose() * W_;
}

Eigen::VectorXd LBFGSState::apply_B(const Eigen::VectorXd& v) const {
  if (pairs() == 0) return delta_ * v;
  const Eigen::VectorXd t = M_.fullPivLu().solve(W_.transpose() * v);
  return delta_ * v - W_ * t;
}

Eigen::VectorXd LBFGSState::apply_inv_shifted(double gamma, const Eigen::VectorXd& v) const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("shift must be >= 0");
  const double c = 1.0 + gamma * delta_;
  if (pairs() == 0 || gamma == 0.0) return v / c;
  const Eigen::MatrixXd K = M_ - (gamma / c) * WtW_;
  const Eigen::VectorXd t = K.fullPivLu().solve(W_.transpose() * v);
  return v / c + (gamma / (c * c)) * (W_ * t);
}

}  // namespace rtomo
