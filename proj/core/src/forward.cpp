#include "rtomo/forward.hpp"

#include "rtomo/parallel.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace rtomo {

FieldSolver::FieldSolver(const GreenOperators& ops, const Eigen::VectorXd& f, const ForwardOptions& opts)
    : ops_(&ops), f_(f), opts_(opts) {
  if (f.size() != ops.n_cells()) throw std::invalid_argument("FieldSolver: contrast size does not match grid");
  zero_contrast_ = (f.array() == 0.0).all();
  LinearSolver kind = opts.solver;
  if (kind == LinearSolver::automatic) kind = ops.n_cells() <= 576 ? LinearSolver::dense_lu : LinearSolver::gmres;
  if (kind == LinearSolver::dense_lu && !zero_contrast_) {
    Eigen::MatrixXcd a = -(ops.G.dense() * f.asDiagonal());
    a.diagonal().array() += 1.0;
    lu_.emplace(a);
  }
}

Eigen::VectorXcd FieldSolver::apply(const Eigen::VectorXcd& x) const {
  return x - ops_->G.apply(f_.cast<cplx>().cwiseProduct(x));
}

Eigen::VectorXcd FieldSolver::apply_adjoint(const Eigen::VectorXcd& x) const {
  return x - f_.cast<cplx>().cwiseProduct(ops_->G.apply_adjoint(x));
}

Eigen::MatrixXcd FieldSolver::solve(const Eigen::MatrixXcd& rhs, const Eigen::MatrixXcd* warm) const {
  return solve_impl(rhs, warm, false);
}

Eigen::MatrixXcd FieldSolver::solve_adjoint(const Eigen::MatrixXcd& rhs, const Eigen::MatrixXcd* warm) const {
  return solve_impl(rhs, warm, true);
}

Eigen::MatrixXcd FieldSolver::solve_impl(const Eigen::MatrixXcd& rhs, const Eigen::MatrixXcd* warm,
                                         bool adjoint) const {
  if (rhs.rows() != ops_->n_cells()) throw std::invalid_argument("FieldSolver: right-hand side has wrong row count");
  iterations_ = 0;
  if (zero_contrast_) return rhs;
  if (lu_) return adjoint ? Eigen::MatrixXcd(lu_->adjoint().solve(rhs)) : Eigen::MatrixXcd(lu_->solve(rhs));

  Eigen::MatrixXcd out(rhs.rows(), rhs.cols());
  const ComplexLinearMap op = adjoint ? ComplexLinearMap([this](const Eigen::VectorXcd& x) { return apply_adjoint(x); })
                                      : ComplexLinearMap([this](const Eigen::VectorXcd& x) { return apply(x); });
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
    const Eigen::VectorXcd x0 =
        (warm && warm->rows() == rhs.rows() && warm->cols() == rhs.cols()) ? Eigen::VectorXcd(warm->col(c))
                                                                             : Eigen::VectorXcd();
    GmresResult r = gmres(op, rhs.col(c), opts_.gmres, x0);
    iterations_ += r.iterations;
    if (!r.converged) {
      std::ostringstream msg;
      msg << (adjoint ? "adjoint" : "forward") << " GMRES did not converge at " << ops_->frequency_hz
          << " Hz (column " << c << "): relative residual " << r.relative_residual << " after " << r.iterations
          << " iterations";
      throw SolverError(msg.str(), r.relative_residual);
    }
    out.col(c) = r.x;
  }
  return out;
}

double ScatteredData::norm() const {
  double s = 0.0;
  for (const auto& y : Y) s += y.squaredNorm();
  return std::sqrt(s);
}

void ScatteredData::validate() const {
  if (freqs_hz.size() != Y.size()) throw std::invalid_argument("scattered data: frequency list and matrices disagree");
  for (const auto& y : Y) {
    if (y.rows() != n_rx() || y.cols() != n_tx()) throw std::invalid_argument("scattered data: inconsistent shapes");
    if (!y.allFinite()) throw std::invalid_argument("scattered data: non-finite entries");
  }
}

Eigen::MatrixXcd solve_total_field(const GreenOperators& ops, const Eigen::VectorXd& f, const ForwardOptions& opts) {
  if (!(opts.gmres.tol > 0.0 && opts.gmres.tol < 1.0)) throw std::invalid_argument("forward tolerance must be in (0, 1)");
  return FieldSolver(ops, f, opts).solve(ops.V);
}

WavefieldSet solve_total_field(const std::vector<GreenOperators>& bank, const ContrastImage& f,
                               const ForwardOptions& opts) {
  WavefieldSet out;
  out.fields.resize(bank.size());
  parallel_for(static_cast<int>(bank.size()),
               [&](int j) { out.fields[j] = solve_total_field(bank[j], f.values, opts); });
  return out;
}

Eigen::MatrixXcd synthesize_data(const GreenOperators& ops, const Eigen::VectorXd& f, const Eigen::MatrixXcd& U) {
  return ops.H * (f.cast<cplx>().asDiagonal() * U);
}

ScatteredData synthesize_data(const std::vector<GreenOperators>& bank, const ContrastImage& f,
                              const WavefieldSet& fields) {
  if (fields.fields.size() != bank.size()) throw std::invalid_argument("wavefield set does not match operator bank");
  ScatteredData d;
  for (std::size_t j = 0; j < bank.size(); ++j) {
    d.freqs_hz.push_back(bank[j].frequency_hz);
    d.Y.push_back(synthesize_data(bank[j], f.values, fields.fields[j]));
  }
  return d;
}

ScatteredData simulate(const std::vector<GreenOperators>& bank, const ContrastImage& f, const ForwardOptions& opts) {
  return synthesize_data(bank, f, solve_total_field(bank, f, opts));
}

ScatteredData born_data(const std::vector<GreenOperators>& bank, const ContrastImage& f) {
  ScatteredData d;
  for (const auto& ops : bank) {
    d.freqs_hz.push_back(ops.frequency_hz);
    d.Y.push_back(synthesize_data(ops, f.values, ops.V));
  }
  return d;
}

ScatteredData add_noise(const ScatteredData& data, double rel_energy, std::uint64_t seed) {
  if (!(rel_energy >= 0.0) || !std::isfinite(rel_energy)) throw std::invalid_argument("noise level must be >= 0");
  ScatteredData out = data;
  out.noise = NoiseInfo{rel_energy, seed};
  if (rel_energy == 0.0) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXcd> noise;
  double energy = 0.0;
  for (const auto& y : data.Y) {
    Eigen::MatrixXcd n(y.rows(), y.cols());
    for (Eigen::Index c = 0; c < n.cols(); ++c)
      for (Eigen::Index r = 0; r < n.rows(); ++r) {
        const double re = normal(rng);
        const double im = normal(rng);
        n(r, c) = cplx(re, im);
      }
    energy += n.squaredNorm();
    noise.push_back(std::move(n));
  }
  if (energy == 0.0) return out;
  const double scale = rel_energy * data.norm() / std::sqrt(energy);
  for (std::size_t j = 0; j < noise.size(); ++j) out.Y[j] += scale * noise[j];
  return out;
}

}  // namespace rtomo
