#pragma once

#include "rtomo/forward.hpp"
#include "rtomo/objective.hpp"
#include "rtomo/proxqn.hpp"
#include "rtomo/proxtv.hpp"
#include "rtomo/scene.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rtomo {

enum class Method { sf_tau, sf_sigma, cisor, rl };
std::string to_string(Method m);
/// Accepts "sf-tau", "sf-sigma", "cisor", "rl".
Method parse_method(const std::string& name);

struct StageRecord {
  int stage = 0;
  std::vector<int> batch;
  double tau = 0.0;
  double sigma = 0.0;      // noise bound used for the tau update (sf-sigma only)
  double misfit = 0.0;     // unweighted sum over the batch at the stage output
  double seconds = 0.0;
  ProxQNTrace trace;
  Eigen::VectorXd f;
  bool failed = false;
  std::string note;
};

struct InversionConfig {
  ProxQNConfig qn{};            // i_max is the per-stage cap
  int cisor_i_max = 5000;
  ForwardOptions forward{};
  /// Scale each stage objective by 1 / sum_{j in batch} ||Y_j||^2.
  bool normalize = true;
  /// Use conj(U) in the tau-update polar argument.
  bool conjugate_polar = true;
  double polar_tol = 1e-10;
  /// Called after every stage, e.g. to write snapshots.
  std::function<void(const StageRecord&)> on_stage;
};

struct InversionReport {
  Method method = Method::sf_tau;
  ContrastImage image;
  std::vector<StageRecord> stages;
  std::vector<double> tau_schedule;
  double dr = 0.0;
  std::optional<double> snr;
  double seconds = 0.0;
};

struct TauUpdate {
  double tau = 0.0;
  double residual_norm = 0.0;
  double sigma = 0.0;
  double polar = 0.0;
  bool degenerate = false;  // zero polar value with a nonzero residual; tau left unchanged
};

/// Re sum_j sum_i diag(u_ij) H_j^H r_ij (u conjugated when `conjugate`), in batch order.
Eigen::VectorXd tau_polar_argument(const ResidualSet& residuals, const WavefieldSet& fields,
                                   const std::vector<GreenOperators>& bank, bool conjugate);

/// tau + ||r|| (||r|| - sigma) / polar, floored at 0.
TauUpdate tau_newton_step(double tau, double residual_norm, double sigma, double polar);

/// One continuation step from residuals and wavefields evaluated at the current iterate.
TauUpdate tau_update(double tau, const ResidualSet& residuals, const WavefieldSet& fields,
                     const std::vector<GreenOperators>& bank, const TVOperator& D, double sigma, bool conjugate,
                     double polar_tol = 1e-10);

InversionReport sf_tau(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid,
                       double tau, const InversionConfig& cfg);
InversionReport sf_sigma(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid,
                         double noise_rel, const InversionConfig& cfg);
InversionReport cisor(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid,
                      double tau, const InversionConfig& cfg);
InversionReport rl(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid, double tau,
                   const InversionConfig& cfg);

/// Runs `method`; `tau_or_noise` is tau for sf-tau/cisor/rl and the relative noise level for sf-sigma.
InversionReport run_inversion(Method method, const ScatteredData& data, const std::vector<GreenOperators>& bank,
                              const Grid& grid, double tau_or_noise, const InversionConfig& cfg);

/// 100 * sum_j F_j(f) / sum_j ||Y_j||^2 over all frequencies.
double metric_dr(const Eigen::VectorXd& f, const ScatteredData& data, const std::vector<GreenOperators>& bank,
                 const ForwardOptions& opts);
/// -20 log10(||f - f_true|| / ||f_true||), capped at 300 dB.
double metric_snr(const Eigen::VectorXd& f, const Eigen::VectorXd& f_true);
inline constexpr double kSnrCap = 300.0;

}  // namespace rtomo
