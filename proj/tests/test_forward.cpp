#include "doctest.h"

#include "support.hpp"

#include "rtomo/forward.hpp"
#include "rtomo/parallel.hpp"

#include <cmath>
#include <cstring>

using namespace rtomo;
using testing::rel_err;

namespace {

ForwardOptions gmres_opts(double tol) {
  ForwardOptions o;
  o.solver = LinearSolver::gmres;
  o.gmres.tol = tol;
  return o;
}

double born_gap(const std::vector<GreenOperators>& bank, double fmax) {
  const ContrastImage disk = cylinder_scene(fmax);
  const ScatteredData full = simulate(bank, disk, gmres_opts(1e-13));
  const ScatteredData born = born_data(bank, disk);
  double num = 0.0;
  for (int j = 0; j < full.n_freq(); ++j) num += (full.Y[j] - born.Y[j]).squaredNorm();
  return std::sqrt(num) / full.norm();
}

}  // namespace

TEST_CASE("GMRES fields match a dense direct solve") {
  std::mt19937_64 rng(3);
  for (double mhz : {50.0, 400.0, 1500.0}) {
    const auto bank = testing::bank(8, {mhz}, 5, OperatorStorage::fft);
    const Eigen::VectorXd f = testing::random_vector(rng, 64, 0.0, 1.0);
    const double tol = 1e-10;
    const Eigen::MatrixXcd U = solve_total_field(bank[0], f, gmres_opts(tol));
    const Eigen::MatrixXcd Uref = testing::dense_fields(bank[0], f);
    CHECK(rel_err(U, Uref) <= 10 * tol);
    CHECK(rel_err(U, Uref) <= 1e-7);
    // Residual contract.
    const FieldSolver solver(bank[0], f, gmres_opts(tol));
    for (int c = 0; c < U.cols(); ++c)
      CHECK((solver.apply(U.col(c)) - bank[0].V.col(c)).norm() <= tol * bank[0].V.col(c).norm() * 1.0001);

    ForwardOptions lu;
    lu.solver = LinearSolver::dense_lu;
    CHECK(rel_err(solve_total_field(bank[0], f, lu), Uref) < 1e-12);

    const Eigen::MatrixXcd Y = synthesize_data(bank[0], f, Uref);
    Eigen::MatrixXcd Yref = Eigen::MatrixXcd::Zero(5, 5);
    for (int n = 0; n < 64; ++n) Yref += bank[0].H.col(n) * (f[n] * Uref.row(n));
    CHECK(rel_err(Y, Yref) < 1e-10);
  }
}

TEST_CASE("adjoint solves invert the conjugate-transposed system") {
  std::mt19937_64 rng(8);
  const auto bank = testing::bank(12, {300.0}, 3, OperatorStorage::fft);
  const Eigen::VectorXd f = testing::random_vector(rng, 144, 0.0, 1.0);
  Eigen::MatrixXcd rhs(144, 2);
  rhs.col(0) = testing::random_cvector(rng, 144);
  rhs.col(1) = testing::random_cvector(rng, 144);
  const FieldSolver it(bank[0], f, gmres_opts(1e-11));
  const Eigen::MatrixXcd L = it.solve_adjoint(rhs);
  for (int c = 0; c < 2; ++c) CHECK((it.apply_adjoint(L.col(c)) - rhs.col(c)).norm() <= 1.0001e-11 * rhs.col(c).norm());

  const Eigen::MatrixXcd G = bank[0].G.dense();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(144, 144);
  A -= f.cast<cplx>().asDiagonal() * G.adjoint();
  CHECK(rel_err(L, A.fullPivLu().solve(rhs)) < 1e-8);

  ForwardOptions lu;
  lu.solver = LinearSolver::dense_lu;
  CHECK(rel_err(FieldSolver(bank[0], f, lu).solve_adjoint(rhs), A.fullPivLu().solve(rhs)) < 1e-12);
}

TEST_CASE("zero contrast gives the incident field and no scattered data") {
  const auto bank = testing::bank(8, {100.0, 900.0});
  const ContrastImage zero(Grid::unit_square(8), Eigen::VectorXd::Zero(64));
  const WavefieldSet w = solve_total_field(bank, zero, gmres_opts(1e-8));
  for (std::size_t j = 0; j < bank.size(); ++j) CHECK(w.fields[j] == bank[j].V);
  const ScatteredData d = synthesize_data(bank, zero, w);
  CHECK(d.norm() == 0.0);
  CHECK(born_data(bank, zero).norm() == 0.0);
  CHECK(d.freqs_hz[1] == doctest::Approx(900e6));
}

TEST_CASE("scattered data is linear in the receiver matrix and Born data is linear in f") {
  std::mt19937_64 rng(4);
  auto bank = testing::bank(8, {200.0});
  const ContrastImage f(Grid::unit_square(8), testing::random_vector(rng, 64, 0.0, 0.5));
  const ScatteredData a = simulate(bank, f, gmres_opts(1e-10));
  const ScatteredData b1 = born_data(bank, f);
  ContrastImage f3 = f;
  f3.values *= 3.0;
  CHECK(rel_err(born_data(bank, f3).Y[0], 3.0 * b1.Y[0]) < 1e-14);
  bank[0].H *= cplx(2.0, 1.0);
  const ScatteredData c = simulate(bank, f, gmres_opts(1e-10));
  CHECK(rel_err(c.Y[0], cplx(2.0, 1.0) * a.Y[0]) < 1e-14);
}

TEST_CASE("non-convergence reports the achieved residual") {
  const auto bank = testing::bank(16, {2000.0}, 1, OperatorStorage::fft);
  ForwardOptions o = gmres_opts(1e-12);
  o.gmres.max_iterations = 2;
  o.gmres.restart = 2;
  const Eigen::VectorXd f = Eigen::VectorXd::Constant(256, 5.0);
  try {
    (void)solve_total_field(bank[0], f, o);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.achieved_residual() > 1e-12);
    CHECK(std::isfinite(e.achieved_residual()));
  }
  CHECK_THROWS_AS(solve_total_field(bank[0], f, gmres_opts(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(solve_total_field(bank[0], f, gmres_opts(1.0)), std::invalid_argument);
}

TEST_CASE("Born gap decays at first order in the contrast") {
  const auto bank = testing::bank(16, {100.0, 400.0});
  const double g2 = born_gap(bank, 1e-2);
  const double g3 = born_gap(bank, 1e-3);
  const double g4 = born_gap(bank, 1e-4);
  CHECK(g4 < 1e-2);
  const double s1 = std::log10(g2 / g3);
  const double s2 = std::log10(g3 / g4);
  CHECK(s1 == doctest::Approx(1.0).epsilon(0.2));
  CHECK(s2 == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("noise has the requested relative energy and is seeded") {
  std::mt19937_64 rng(1);
  const auto bank = testing::bank(8, {100.0, 300.0, 700.0});
  const ContrastImage f(Grid::unit_square(8), testing::random_vector(rng, 64, 0.0, 1.0));
  const ScatteredData clean = simulate(bank, f, gmres_opts(1e-10));
  CHECK(add_noise(clean, 0.0, 9).Y == clean.Y);
  for (double rel : {0.1, 0.2}) {
    const ScatteredData noisy = add_noise(clean, rel, 42);
    double e = 0.0;
    for (int j = 0; j < clean.n_freq(); ++j) e += (noisy.Y[j] - clean.Y[j]).squaredNorm();
    CHECK(std::sqrt(e) / clean.norm() == doctest::Approx(rel).epsilon(1e-12));
    const double snr_db = 20.0 * std::log10(clean.norm() / std::sqrt(e));
    CHECK(snr_db == doctest::Approx(-20.0 * std::log10(rel)).epsilon(1e-10));
    CHECK(noisy.noise.rel_energy == rel);
    CHECK(noisy.noise.seed == 42u);
    const ScatteredData again = add_noise(clean, rel, 42);
    for (int j = 0; j < clean.n_freq(); ++j)
      CHECK(std::memcmp(again.Y[j].data(), noisy.Y[j].data(), sizeof(cplx) * noisy.Y[j].size()) == 0);
    CHECK(add_noise(clean, rel, 43).Y[0] != noisy.Y[0]);
  }
  CHECK_THROWS(add_noise(clean, -0.1, 1));
}

TEST_CASE("per-frequency solves are reproducible across thread counts") {
  std::mt19937_64 rng(2);
  const auto bank = testing::bank(12, {100.0, 250.0, 600.0, 1200.0}, 5, OperatorStorage::fft);
  const ContrastImage f(Grid::unit_square(12), testing::random_vector(rng, 144, 0.0, 1.0));
  set_thread_count(1);
  const ScatteredData a = simulate(bank, f, gmres_opts(1e-9));
  set_thread_count(3);
  const ScatteredData b = simulate(bank, f, gmres_opts(1e-9));
  set_thread_count(1);
  for (int j = 0; j < a.n_freq(); ++j) CHECK(a.Y[j] == b.Y[j]);
}
