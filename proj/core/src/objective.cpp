#include "rtomo/objective.hpp"

#include "rtomo/parallel.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rtomo {

double ResidualSet::norm() const {
  double s = 0.0;
  for (const auto& m : r) s += m.squaredNorm();
  return std::sqrt(s);
}

std::vector<int> full_batch(int n) {
  std::vector<int> b(n);
  std::iota(b.begin(), b.end(), 0);
  return b;
}

ScatteringMisfit::ScatteringMisfit(const std::vector<GreenOperators>& bank, const ScatteredData& data,
                                   std::vector<int> batch, ForwardOptions opts, double weight)
    : bank_(bank), data_(data), batch_(std::move(batch)), opts_(opts), weight_(weight) {
  if (batch_.empty()) throw std::invalid_argument("misfit batch is empty");
  if (static_cast<int>(bank_.size()) != data_.n_freq())
    throw std::invalid_argument("operator bank and data have different frequency counts");
  for (int j : batch_)
    if (j < 0 || j >= data_.n_freq()) throw std::out_of_range("misfit batch index out of range");
  if (!(weight_ > 0.0)) throw std::invalid_argument("misfit weight must be positive");
}

double ScatteringMisfit::data_energy() const {
  double s = 0.0;
  for (int j : batch_) s += data_.Y[j].squaredNorm();
  return s;
}

MisfitEvaluation ScatteringMisfit::evaluate(const Eigen::VectorXd& f, bool with_gradient) {
  const int nb = static_cast<int>(batch_.size());
  const bool same_point = cached_f_.size() == f.size() && cached_f_ == f && !solvers_.empty();

  if (!same_point) {
    ++evaluations_;
    std::vector<std::unique_ptr<FieldSolver>> solvers(nb);
    MisfitEvaluation ev;
    ev.residuals.batch = batch_;
    ev.residuals.r.resize(nb);
    ev.fields.fields.resize(nb);
    std::vector<double> parts(nb, 0.0);
    const bool warm = cached_.fields.fields.size() == static_cast<std::size_t>(nb);
    parallel_for(nb, [&](int b) {
      const GreenOperators& ops = bank_[batch_[b]];
      solvers[b] = std::make_unique<FieldSolver>(ops, f, opts_);
      ev.fields.fields[b] = solvers[b]->solve(ops.V, warm ? &cached_.fields.fields[b] : nullptr);
      ev.residuals.r[b] = data_.Y[batch_[b]] - synthesize_data(ops, f, ev.fields.fields[b]);
      parts[b] = 0.5 * ev.residuals.r[b].squaredNorm();
    });
    ev.value = std::accumulate(parts.begin(), parts.end(), 0.0);
    cached_f_ = f;
    solvers_ = std::move(solvers);
    cached_ = std::move(ev);
  }

  if (with_gradient && cached_.gradient.size() != f.size()) {
    std::vector<Eigen::VectorXd> parts(nb);
    last_adjoint_.resize(nb);
    const Eigen::VectorXcd fc = f.cast<cplx>();
    parallel_for(nb, [&](int b) {
      const GreenOperators& ops = bank_[batch_[b]];
      const Eigen::MatrixXcd& U = cached_.fields.fields[b];
      const Eigen::MatrixXcd& r = cached_.residuals.r[b];  // y - H diag(f) u
      // Adjoint of (I - G diag f) is (I - diag f G^H).
      const Eigen::MatrixXcd hr = ops.H.adjoint() * r;
      const Eigen::MatrixXcd rhs = fc.asDiagonal() * hr;
      const Eigen::MatrixXcd* warm =
          (last_adjoint_[b].rows() == rhs.rows() && last_adjoint_[b].cols() == rhs.cols()) ? &last_adjoint_[b]
                                                                                            : nullptr;
      Eigen::MatrixXcd lambda = solvers_[b]->solve_adjoint(rhs, warm);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(f.size());
      for (Eigen::Index i = 0; i < U.cols(); ++i) {
        const Eigen::VectorXcd term = -hr.col(i) - ops.G.apply_adjoint(lambda.col(i));
        g += (U.col(i).conjugate().cwiseProduct(term)).real();
      }
      parts[b] = std::move(g);
      last_adjoint_[b] = std::move(lambda);
    });
    Eigen::VectorXd g = Eigen::VectorXd::Zero(f.size());
    for (const auto& p : parts) g += p;
    cached_.gradient = std::move(g);
  }

  MisfitEvaluation out = cached_;
  if (!with_gradient) out.gradient.resize(0);
  return out;
}

double ScatteringMisfit::value(const Eigen::VectorXd& f) { return weight_ * evaluate(f, false).value; }

double ScatteringMisfit::value_and_gradient(const Eigen::VectorXd& f, Eigen::VectorXd& grad) {
  MisfitEvaluation ev = evaluate(f, true);
  grad = weight_ * ev.gradient;
  return weight_ * ev.value;
}

MisfitEvaluation misfit(const Eigen::VectorXd& f, const std::vector<int>& batch, const ScatteredData& data,
                        const std::vector<GreenOperators>& bank, const ForwardOptions& opts) {
  ScatteringMisfit m(bank, data, batch, opts);
  return m.evaluate(f, false);
}

Eigen::VectorXd gradient(const Eigen::VectorXd& f, const std::vector<int>& batch, const ScatteredData& data,
                         const std::vector<GreenOperators>& bank, const ForwardOptions& opts) {
  ScatteringMisfit m(bank, data, batch, opts);
  return m.evaluate(f, true).gradient;
}

}  // namespace rtomo
