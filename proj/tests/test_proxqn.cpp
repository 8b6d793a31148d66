#include "doctest.h"

#include "support.hpp"

#include "rtomo/lbfgs.hpp"
#include "rtomo/objective.hpp"
#include "rtomo/proxqn.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

using namespace rtomo;
using testing::rel_err;

namespace {

/// 1/2 ||A x - b||^2
class Quadratic final : public SmoothObjective {
 public:
  Quadratic(Eigen::MatrixXd A, Eigen::VectorXd b) : A_(std::move(A)), b_(std::move(b)) {}
  double value(const Eigen::VectorXd& x) override { return 0.5 * (A_ * x - b_).squaredNorm(); }
  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) override {
    const Eigen::VectorXd r = A_ * x - b_;
    g = A_.transpose() * r;
    return 0.5 * r.squaredNorm();
  }
  [[nodiscard]] Eigen::MatrixXd hessian() const { return A_.transpose() * A_; }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

/// Misfit of c * mask as a function of the scalar c.
class ScalarContrast final : public SmoothObjective {
 public:
  ScalarContrast(ScatteringMisfit& m, Eigen::VectorXd mask) : m_(m), mask_(std::move(mask)) {}
  double value(const Eigen::VectorXd& c) override { return m_.value(c[0] * mask_); }
  double value_and_gradient(const Eigen::VectorXd& c, Eigen::VectorXd& g) override {
    Eigen::VectorXd full;
    const double v = m_.value_and_gradient(c[0] * mask_, full);
    g = Eigen::VectorXd::Constant(1, full.dot(mask_));
    return v;
  }

 private:
  ScatteringMisfit& m_;
  Eigen::VectorXd mask_;
};

Eigen::MatrixXd dense_lbfgs(const std::vector<Eigen::VectorXd>& S, const std::vector<Eigen::VectorXd>& Y) {
  const double delta = Y.back().squaredNorm() / S.back().dot(Y.back());
  Eigen::MatrixXd B = delta * Eigen::MatrixXd::Identity(S[0].size(), S[0].size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    const Eigen::VectorXd Bs = B * S[i];
    B += -Bs * Bs.transpose() / S[i].dot(Bs) + Y[i] * Y[i].transpose() / Y[i].dot(S[i]);
  }
  return B;
}

Eigen::MatrixXd materialize(const LBFGSState& st, int n) {
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i) B.col(i) = st.apply_B(Eigen::VectorXd::Unit(n, i));
  return B;
}

}  // namespace

TEST_CASE("L-BFGS compact form against dense recursive updates") {
  std::mt19937_64 rng(1);
  const int n = 8;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Random(n, n);
  const Eigen::MatrixXd H = Q * Q.transpose() + Eigen::MatrixXd::Identity(n, n);
  LBFGSState st(10);
  CHECK(st.pairs() == 0);
  const Eigen::VectorXd v = testing::random_vector(rng, n);
  CHECK(rel_err(st.apply_B(v), st.scale() * v) == 0.0);
  CHECK(rel_err(st.apply_inv_shifted(0.3, v), v / (1 + 0.3 * st.scale())) < 1e-15);

  std::vector<Eigen::VectorXd> S, Y;
  for (int k = 0; k < 3; ++k) {
    S.push_back(testing::random_vector(rng, n));
    Y.push_back(H * S.back());
    CHECK(st.update(S.back(), Y.back()));
  }
  CHECK(st.scale() == doctest::Approx(Y.back().squaredNorm() / S.back().dot(Y.back())));
  const Eigen::MatrixXd Bd = dense_lbfgs(S, Y);
  CHECK((materialize(st, n) - Bd).norm() <= 1e-10 * Bd.norm());
  for (double gamma : {0.01, 1.0, 50.0}) {
    const Eigen::VectorXd w = st.apply_inv_shifted(gamma, v);
    CHECK((w + gamma * st.apply_B(w) - v).norm() <= 1e-10 * v.norm());
    const Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(n, n) + gamma * Bd;
    CHECK(rel_err(w, shifted.lu().solve(v)) < 1e-10);
  }
  // Positive definiteness.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(materialize(st, n));
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  // Curvature guard.
  CHECK_FALSE(st.update(S[0], -Y[0]));
  CHECK(st.skipped() == 1);
  CHECK(st.pairs() == 3);

  // Memory limit keeps the newest pairs.
  LBFGSState small(2);
  for (int k = 0; k < 3; ++k) small.update(S[k], Y[k]);
  CHECK(small.pairs() == 2);
  const Eigen::MatrixXd B2 = dense_lbfgs({S[1], S[2]}, {Y[1], Y[2]});
  CHECK((materialize(small, n) - B2).norm() <= 1e-10 * B2.norm());
}

TEST_CASE("search direction: stationary point and unconstrained Newton step") {
  const TVOperator D(4, 4);
  std::mt19937_64 rng(2);
  const Eigen::VectorXd f = testing::random_vector(rng, 16, 2.0, 3.0);
  LBFGSState id(0, true);
  const auto s0 = search_direction(Eigen::VectorXd::Zero(16), id, f, D, D.tv(f), 200, 1e-12);
  CHECK(s0.s.norm() < 1e-10);

  const Eigen::VectorXd g = 0.1 * testing::random_vector(rng, 16);
  const auto s1 = search_direction(g, id, f, D, 1e6, 5000, 1e-14);
  CHECK((s1.s + g).norm() < 1e-6);
}

TEST_CASE("search direction on a two-cell toy matches a constrained QP oracle") {
  const TVOperator D(2, 1);
  const Eigen::Vector2d f(0.2, 0.5);
  const Eigen::Vector2d g(-1.5, 0.4);
  LBFGSState st(5);
  st.update(Eigen::Vector2d(1.0, 0.2), Eigen::Vector2d(2.0, 0.9));
  const Eigen::MatrixXd B = materialize(st, 2);
  const double tau = 0.1;
  ThreeTermState warm;
  const auto sd = search_direction(g, st, f, D, tau, 50000, 1e-15, &warm);
  // Constraints in s: |(f2 + s2) - (f1 + s1)| <= tau, f + s >= 0.
  Eigen::MatrixXd A(4, 2);
  A << -1, 1, 1, -1, -1, 0, 0, -1;
  Eigen::VectorXd b(4);
  b << tau - (f[1] - f[0]), tau + (f[1] - f[0]), f[0], f[1];
  const Eigen::VectorXd oracle = testing::active_set_qp(B, g, A, b);
  CHECK((sd.s - oracle).norm() < 1e-6);
  CHECK(warm.u.size() == 1);
}

TEST_CASE("linesearch behaviour") {
  const TVOperator D(3, 3);
  std::mt19937_64 rng(3);
  const Eigen::VectorXd c = testing::random_vector(rng, 9, 1.0, 2.0);
  const Eigen::VectorXd f = testing::random_vector(rng, 9, 1.0, 2.0);
  const double tau = 100.0;
  auto phi = [&](const Eigen::VectorXd& x) { return 0.5 * (x - c).squaredNorm(); };
  const Eigen::VectorXd grad = f - c;

  // Newton direction with the exact Hessian.
  const Eigen::VectorXd s = c - f;
  const auto a = linesearch(phi, D, f, phi(f), s, grad.dot(s), tau, 0.5, 1e-4, 1e-8);
  CHECK(a.accepted);
  CHECK(a.alpha == 1.0);
  CHECK(a.trials == 1);
  CHECK(rel_err(a.f_next, c) < 1e-8);

  // Zero step returns the (feasible) start.
  const auto z = linesearch(phi, D, f, phi(f), Eigen::VectorXd::Zero(9), 0.0, tau, 0.5, 1e-4, 1e-8);
  CHECK(z.accepted);
  CHECK(rel_err(z.f_next, f) < 1e-8);

  // Overshooting direction forces a shrink.
  const Eigen::VectorXd big = 5.0 * (c - f);
  const auto o = linesearch(phi, D, f, phi(f), big, grad.dot(big), tau, 0.5, 1e-4, 1e-8);
  CHECK(o.accepted);
  CHECK(o.alpha < 1.0);
  CHECK(o.trials >= 2);
  CHECK(phi(o.f_next) < phi(f));

  // Ascent direction never satisfies the test.
  const auto bad = linesearch(phi, D, f, phi(f), -s, grad.dot(s), tau, 0.5, 1e-4, 1e-8);
  CHECK_FALSE(bad.accepted);
  CHECK(bad.f_next == f);
  CHECK_THROWS(linesearch(phi, D, f, phi(f), s, grad.dot(s), tau, 1.5, 1e-4, 1e-8));
}

TEST_CASE("memory-0 prox-QN reduces to proximal gradient with backtracking") {
  const TVOperator D(4, 4);
  std::mt19937_64 rng(4);
  Eigen::MatrixXd A = 0.3 * Eigen::MatrixXd::Random(20, 16);
  A.topRows(16) += Eigen::MatrixXd::Identity(16, 16);
  const Eigen::VectorXd b = testing::random_vector(rng, 20, -0.5, 1.5);
  Quadratic q(A, b);
  const double tau = 2.0;

  ProxQNConfig cfg;
  cfg.memory = 0;
  cfg.fixed_scaling = true;
  cfg.i_max = 20;
  cfg.grad_tol = 1e-300;
  cfg.inner_t_max = 100000;
  cfg.inner_tol = 1e-15;
  cfg.prox.t_max = 100000;
  cfg.prox.tol = 1e-15;
  const Eigen::VectorXd f0 = Eigen::VectorXd::Zero(16);
  const ProxQNResult r = prox_qn_solve(q, D, f0, tau, cfg);

  // Direct implementation.
  auto P = [&](const Eigen::VectorXd& x) { return prox_nn_tv(D, x, tau, cfg.prox); };
  Eigen::VectorXd f = f0;
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd g;
    const double v = q.value_and_gradient(f, g);
    const Eigen::VectorXd s = P(f - g) - f;
    double alpha = 1.0;
    Eigen::VectorXd next = P(f + s);
    while (q.value(next) > v - 1e-4 * alpha * std::abs(g.dot(s))) {
      alpha *= 0.5;
      next = P(f + alpha * s);
    }
    f = next;
    REQUIRE(r.trace.iterates.size() > static_cast<std::size_t>(i + 1));
    CHECK(std::abs(r.trace.iterates[i + 1].misfit - q.value(f)) <= 1e-8 * std::max(1.0, q.value(f)));
  }
  CHECK(r.iterations == 20);
  CHECK((r.f - f).norm() <= 1e-8 * std::max(1.0, f.norm()));
}

TEST_CASE("prox-QN iterates are monotone and feasible") {
  const TVOperator D(6, 6);
  std::mt19937_64 rng(5);
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(50, 36);
  const Eigen::VectorXd b = testing::random_vector(rng, 50, 0.0, 2.0);
  Quadratic q(A, b);
  const double tau = 1.5;
  ProxQNConfig cfg;
  cfg.i_max = 60;
  const ProxQNResult r = prox_qn_solve(q, D, Eigen::VectorXd::Zero(36), tau, cfg);
  REQUIRE(r.trace.iterates.size() >= 2);
  for (std::size_t i = 0; i < r.trace.iterates.size(); ++i) {
    const auto& it = r.trace.iterates[i];
    CHECK(it.tv <= tau * (1 + 1e-6));
    CHECK(it.min_value >= -1e-10);
    if (i > 0) CHECK(it.misfit <= r.trace.iterates[i - 1].misfit);
  }
  std::ostringstream csv;
  r.trace.write_csv(csv);
  CHECK(csv.str().rfind("iter,misfit,alpha,tv,min_value,grad_map_norm\n", 0) == 0);
  CHECK(to_string(r.trace.reason).size() > 0);

  // The limited-memory solver beats projected gradient at equal iteration counts.
  ProxQNConfig pg = cfg;
  pg.memory = 0;
  pg.fixed_scaling = true;
  const ProxQNResult rp = prox_qn_solve(q, D, Eigen::VectorXd::Zero(36), tau, pg);
  CHECK(r.misfit <= rp.misfit * (1 + 1e-9));
}

TEST_CASE("prox-QN stops immediately at the noiseless global minimum") {
  const auto bank = testing::bank(8, {200.0, 600.0});
  const ContrastImage truth = layered_phantom(8, 0.5);
  ForwardOptions fo;
  fo.solver = LinearSolver::dense_lu;
  const ScatteredData data = simulate(bank, truth, fo);
  ScatteringMisfit m(bank, data, {0, 1}, fo, 1.0 / (data.norm() * data.norm()));
  const TVOperator D(truth.grid);
  const ProxQNResult r = prox_qn_solve(m, D, truth.values, D.tv(truth.values), ProxQNConfig{});
  CHECK(r.iterations <= 1);
  CHECK(r.trace.reason == StopReason::converged);
  CHECK(rel_err(r.f, truth.values) < 1e-6);
}

TEST_CASE("scalar contrast of a cylinder is recovered at low frequency") {
  const auto bank = testing::bank(16, {10.0});
  ForwardOptions fo;
  fo.solver = LinearSolver::dense_lu;
  const ContrastImage truth = cylinder_scene(10.0);
  const ScatteredData data = simulate(bank, truth, fo);
  ScatteringMisfit m(bank, data, {0}, fo, 1.0 / (data.norm() * data.norm()));
  ScalarContrast obj(m, cylinder_scene(1.0).values);
  const TVOperator D(1, 1);
  ProxQNConfig cfg;
  cfg.grad_tol = 1e-10;
  const ProxQNResult r = prox_qn_solve(obj, D, Eigen::VectorXd::Zero(1), 0.0, cfg);
  CHECK(r.f[0] == doctest::Approx(10.0).epsilon(0.01));
}
