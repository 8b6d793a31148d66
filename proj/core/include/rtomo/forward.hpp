#pragma once

#include "rtomo/errors.hpp"
#include "rtomo/gmres.hpp"
#include "rtomo/greens.hpp"
#include "rtomo/scene.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtomo {

enum class LinearSolver {
  gmres,     // matrix-free restarted GMRES
  dense_lu,  // LU of the assembled system, reused across right-hand sides
  automatic  // dense_lu for N <= 576, GMRES otherwise
};

struct ForwardOptions {
  GmresOptions gmres{};
  LinearSolver solver = LinearSolver::gmres;
};

/// Solver for the Lippmann-Schwinger system (I - G diag f) u = v at one frequency
/// and its adjoint (I - diag f G^H) w = r, sharing one factorization when dense.
class FieldSolver {
 public:
  FieldSolver(const GreenOperators& ops, const Eigen::VectorXd& f, const ForwardOptions& opts);

  /// Columns of rhs solved independently. Throws SolverError on non-convergence.
  [[nodiscard]] Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs, const Eigen::MatrixXcd* warm = nullptr) const;
  [[nodiscard]] Eigen::MatrixXcd solve_adjoint(const Eigen::MatrixXcd& rhs,
                                               const Eigen::MatrixXcd* warm = nullptr) const;

  /// (I - G diag f) x
  [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  /// (I - diag f G^H) x
  [[nodiscard]] Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& x) const;

  [[nodiscard]] int last_iterations() const { return iterations_; }

 private:
  [[nodiscard]] Eigen::MatrixXcd solve_impl(const Eigen::MatrixXcd& rhs, const Eigen::MatrixXcd* warm,
                                            bool adjoint) const;

  const GreenOperators* ops_;
  Eigen::VectorXd f_;
  ForwardOptions opts_;
  bool zero_contrast_ = false;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_;
  mutable int iterations_ = 0;
};

/// Per-frequency total fields U_j (N x n_tx).
struct WavefieldSet {
  std::vector<Eigen::MatrixXcd> fields;
};

struct NoiseInfo {
  double rel_energy = 0.0;
  std::uint64_t seed = 0;
};

/// Scattered data Y_j (n_rx x n_tx) per frequency.
struct ScatteredData {
  std::vector<double> freqs_hz;
  std::vector<Eigen::MatrixXcd> Y;
  NoiseInfo noise;

  [[nodiscard]] int n_freq() const { return static_cast<int>(Y.size()); }
  [[nodiscard]] int n_tx() const { return Y.empty() ? 0 : static_cast<int>(Y.front().cols()); }
  [[nodiscard]] int n_rx() const { return Y.empty() ? 0 : static_cast<int>(Y.front().rows()); }
  /// Frobenius norm of the concatenated tensor.
  [[nodiscard]] double norm() const;
  void validate() const;
};

Eigen::MatrixXcd solve_total_field(const GreenOperators& ops, const Eigen::VectorXd& f, const ForwardOptions& opts);
WavefieldSet solve_total_field(const std::vector<GreenOperators>& bank, const ContrastImage& f,
                               const ForwardOptions& opts);

/// Y = H diag(f) U for one frequency.
Eigen::MatrixXcd synthesize_data(const GreenOperators& ops, const Eigen::VectorXd& f, const Eigen::MatrixXcd& U);
ScatteredData synthesize_data(const std::vector<GreenOperators>& bank, const ContrastImage& f,
                              const WavefieldSet& fields);
/// Forward solve plus data synthesis for every frequency of the bank.
ScatteredData simulate(const std::vector<GreenOperators>& bank, const ContrastImage& f, const ForwardOptions& opts);

/// Born-linearized data H diag(f) V.
ScatteredData born_data(const std::vector<GreenOperators>& bank, const ContrastImage& f);

/// Adds circular complex white Gaussian noise with ||noise|| = rel_energy * ||Y|| over the whole tensor.
ScatteredData add_noise(const ScatteredData& data, double rel_energy, std::uint64_t seed);

}  // namespace rtomo
