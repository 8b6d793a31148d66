#pragma once

#include "rtomo/forward.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace rtomo {

/// Differentiable objective over a real parameter vector.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;
  virtual double value(const Eigen::VectorXd& x) = 0;
  virtual double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) = 0;
};

/// Data residuals r_j = Y_j - H_j diag(f) U_j for a frequency batch.
struct ResidualSet {
  std::vector<int> batch;
  std::vector<Eigen::MatrixXcd> r;
  [[nodiscard]] double norm() const;
};

struct MisfitEvaluation {
  double value = 0.0;          // sum_j 1/2 ||r_j||_F^2 (unweighted)
  Eigen::VectorXd gradient;    // empty unless requested
  ResidualSet residuals;
  WavefieldSet fields;         // U_j for j in batch, batch order
};

/// Reduced misfit sum_{j in batch} F_j(f) with the total fields eliminated through the
/// Lippmann-Schwinger constraint; gradient by the adjoint-state method.
///
/// `weight` multiplies value() and value_and_gradient() (the SmoothObjective view), which
/// lets solvers work on a data-normalized objective. evaluate() always reports the
/// unweighted misfit. Not thread-safe: the instance caches the last factorizations and
/// fields to reuse them across value/gradient calls at the same point.
class ScatteringMisfit final : public SmoothObjective {
 public:
  ScatteringMisfit(const std::vector<GreenOperators>& bank, const ScatteredData& data, std::vector<int> batch,
                   ForwardOptions opts, double weight = 1.0);

  MisfitEvaluation evaluate(const Eigen::VectorXd& f, bool with_gradient);

  double value(const Eigen::VectorXd& f) override;
  double value_and_gradient(const Eigen::VectorXd& f, Eigen::VectorXd& grad) override;

  [[nodiscard]] const std::vector<int>& batch() const { return batch_; }
  [[nodiscard]] double weight() const { return weight_; }
  /// sum_{j in batch} ||Y_j||_F^2
  [[nodiscard]] double data_energy() const;
  [[nodiscard]] int evaluations() const { return evaluations_; }

 private:
  const std::vector<GreenOperators>& bank_;
  const ScatteredData& data_;
  std::vector<int> batch_;
  ForwardOptions opts_;
  double weight_;
  int evaluations_ = 0;

  Eigen::VectorXd cached_f_;
  std::vector<std::unique_ptr<FieldSolver>> solvers_;
  MisfitEvaluation cached_;
  std::vector<Eigen::MatrixXcd> last_adjoint_;
};

/// All frequency indices 0..n-1.
std::vector<int> full_batch(int n);

/// Convenience wrappers.
MisfitEvaluation misfit(const Eigen::VectorXd& f, const std::vector<int>& batch, const ScatteredData& data,
                        const std::vector<GreenOperators>& bank, const ForwardOptions& opts);
Eigen::VectorXd gradient(const Eigen::VectorXd& f, const std::vector<int>& batch, const ScatteredData& data,
                         const std::vector<GreenOperators>& bank, const ForwardOptions& opts);

}  // namespace rtomo
