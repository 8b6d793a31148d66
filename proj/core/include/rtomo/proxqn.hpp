#pragma once

#include "rtomo/lbfgs.hpp"
#include "rtomo/objective.hpp"
#include "rtomo/proxtv.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rtomo {

struct ProxQNConfig {
  int i_max = 500;
  int inner_t_max = 200;
  double inner_tol = 1e-9;
  double gamma_ls = 0.5;       // backtracking shrink
  double c_suff = 1e-4;        // sufficient decrease
  double min_step = 1e-8;
  double grad_tol = 1e-6;      // on ||f - prox(f - grad)||
  int memory = 10;
  bool fixed_scaling = false;  // B = I: proximal gradient when memory = 0
  ProxTVOptions prox{};
};

enum class StopReason { converged, max_iterations, linesearch_failure };
std::string to_string(StopReason r);

struct ProxQNIterate {
  int iter = 0;
  double misfit = 0.0;  // objective value at the iterate
  double alpha = 0.0;   // step accepted to reach it (0 for the start point)
  double tv = 0.0;
  double min_value = 0.0;
  double grad_map_norm = 0.0;  // at the iterate; NaN when not computed
  int inner_iterations = 0;
};

struct ProxQNTrace {
  std::vector<ProxQNIterate> iterates;
  StopReason reason = StopReason::max_iterations;
  void write_csv(std::ostream& os) const;
};

struct ProxQNResult {
  Eigen::VectorXd f;
  double misfit = 0.0;
  int iterations = 0;
  ProxQNTrace trace;
};

struct SearchDirection {
  Eigen::VectorXd s;
  int iterations = 0;
  bool converged = false;
};

/// Approximate minimizer of <g, s> + 1/2 s^T B s subject to ||D(f + s)||_1 <= tau and
/// f + s >= 0, by the three-term primal-dual iteration on the problem rescaled by 1/scale(B).
/// `warm` carries the duals between calls.
SearchDirection search_direction(const Eigen::VectorXd& grad, const LBFGSState& lbfgs, const Eigen::VectorXd& f,
                                 const TVOperator& D, double tau, int t_max, double tol = 1e-9,
                                 ThreeTermState* warm = nullptr);

struct LinesearchResult {
  double alpha = 0.0;
  Eigen::VectorXd f_next;
  double value = 0.0;
  bool accepted = false;
  int trials = 0;
};

/// Backtracking on alpha = 1, gamma_ls, gamma_ls^2, ... over f(alpha) = prox_nn_tv(f + alpha s)
/// until phi(f(alpha)) <= phi(f) - c_suff alpha |<grad, s>| or alpha < min_step.
LinesearchResult linesearch(const std::function<double(const Eigen::VectorXd&)>& phi, const TVOperator& D,
                            const Eigen::VectorXd& f, double phi_f, const Eigen::VectorXd& s, double grad_dot_s,
                            double tau, double gamma_ls, double c_suff, double min_step,
                            const ProxTVOptions& prox = {}, ProxTVState* prox_state = nullptr);

/// Proximal quasi-Newton solve of min phi(f) s.t. f >= 0, ||D f||_1 <= tau.
/// `lbfgs`, when given, is used (and updated) instead of a fresh memory.
ProxQNResult prox_qn_solve(SmoothObjective& phi, const TVOperator& D, const Eigen::VectorXd& f0, double tau,
                           const ProxQNConfig& cfg, LBFGSState* lbfgs = nullptr);

}  // namespace rtomo
