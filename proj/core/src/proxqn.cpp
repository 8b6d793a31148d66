#include "rtomo/proxqn.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace rtomo {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::linesearch_failure: return "linesearch_failure";
  }
  return "unknown";
}

void ProxQNTrace::write_csv(std::ostream& os) const {
  os << "iter,misfit,alpha,tv,min_value,grad_map_norm\n";
  os.precision(17);
  for (const auto& it : iterates)
    os << it.iter << ',' << it.misfit << ',' << it.alpha << ',' << it.tv << ',' << it.min_value << ','
       << it.grad_map_norm << '\n';
}

SearchDirection search_direction(const Eigen::VectorXd& grad, const LBFGSState& lbfgs, const Eigen::VectorXd& f,
                                 const TVOperator& D, double tau, int t_max, double tol, ThreeTermState* warm) {
  if (grad.size() != D.cells() || f.size() != D.cells()) throw std::invalid_argument("search_direction: size mismatch");
  const double delta = lbfgs.scale();
  const double gamma = D.default_step();
  const Eigen::VectorXd g = grad / delta;
  const Eigen::VectorXd df = D.apply(f);

  ThreeTermProblem p;
  p.resolvent_h = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return lbfgs.apply_inv_shifted(gamma / delta, y - gamma * g);
  };
  // Constraint sets shifted by the current iterate: ||w + Df||_1 <= tau and s + f >= 0.
  p.resolvent_gstar = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return z - gamma * (project_l1_ball(z / gamma + df, tau) - df);
  };
  p.resolvent_kstar = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return z - gamma * ((z / gamma + f).cwiseMax(0.0) - f);
  };
  p.L = [&](const Eigen::VectorXd& x) { return D.apply(x); };
  p.Lt = [&](const Eigen::VectorXd& w) { return D.apply_transpose(w); };

  ThreeTermState start;
  start.x = Eigen::VectorXd::Zero(D.cells());
  const bool have_warm = warm && warm->u.size() == D.edges() && warm->v.size() == D.cells();
  start.u = have_warm ? warm->u : Eigen::VectorXd::Zero(D.edges());
  start.v = have_warm ? warm->v : Eigen::VectorXd::Zero(D.cells());

  ThreeTermResult r = pd_three_term(p, gamma, t_max, std::move(start), tol);
  SearchDirection out;
  out.iterations = r.iterations;
  out.converged = tol > 0.0 && r.last_change < tol;
  out.s = r.state.x;
  if (warm) *warm = std::move(r.state);
  return out;
}

LinesearchResult linesearch(const std::function<double(const Eigen::VectorXd&)>& phi, const TVOperator& D,
                            const Eigen::VectorXd& f, double phi_f, const Eigen::VectorXd& s, double grad_dot_s,
                            double tau, double gamma_ls, double c_suff, double min_step, const ProxTVOptions& prox,
                            ProxTVState* prox_state) {
  if (!(gamma_ls > 0.0 && gamma_ls < 1.0)) throw std::invalid_argument("linesearch shrink must be in (0, 1)");
  LinesearchResult res;
  const double decrease = std::abs(grad_dot_s);
  for (double alpha = 1.0; alpha >= min_step; alpha *= gamma_ls) {
    ++res.trials;
    Eigen::VectorXd trial = prox_nn_tv(D, f + alpha * s, tau, prox, prox_state);
    const double value = phi(trial);
    if (std::isfinite(value) && value <= phi_f - c_suff * alpha * decrease) {
      res.alpha = alpha;
      res.f_next = std::move(trial);
      res.value = value;
      res.accepted = true;
      return res;
    }
  }
  res.f_next = f;
  res.value = phi_f;
  return res;
}

namespace {

bool feasible(const TVOperator& D, const Eigen::VectorXd& f, double tau) {
  return f.minCoeff() >= -1e-10 && D.tv(f) <= tau * (1.0 + 1e-6);
}

}  // namespace

ProxQNResult prox_qn_solve(SmoothObjective& phi, const TVOperator& D, const Eigen::VectorXd& f0, double tau,
                           const ProxQNConfig& cfg, LBFGSState* lbfgs) {
  if (f0.size() != D.cells()) throw std::invalid_argument("prox_qn_solve: start vector has wrong size");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("prox_qn_solve: tau must be finite and >= 0");
  if (cfg.i_max < 0 || cfg.inner_t_max < 1 || !(cfg.grad_tol > 0.0) || !(cfg.c_suff > 0.0) ||
      !(cfg.gamma_ls > 0.0 && cfg.gamma_ls < 1.0) || !(cfg.min_step > 0.0))
    throw std::invalid_argument("prox_qn_solve: invalid configuration");

  LBFGSState local(cfg.memory, cfg.fixed_scaling);
  LBFGSState& mem = lbfgs ? *lbfgs : local;

  ProxTVState prox_state;
  Eigen::VectorXd f = feasible(D, f0, tau) ? f0 : prox_nn_tv(D, f0, tau, cfg.prox, &prox_state);
  Eigen::VectorXd grad;
  double value = phi.value_and_gradient(f, grad);
  ThreeTermState inner;

  ProxQNResult res;
  double last_alpha = 0.0;
  int last_inner = 0;
  for (int i = 0;; ++i) {
    {
      ProxTVState gm_state = prox_state;
      const Eigen::VectorXd pg = prox_nn_tv(D, f - grad, tau, cfg.prox, &gm_state);
      ProxQNIterate it;
      it.iter = i;
      it.misfit = value;
      it.alpha = last_alpha;
      it.tv = D.tv(f);
      it.min_value = f.minCoeff();
      it.grad_map_norm = (f - pg).norm();
      it.inner_iterations = last_inner;
      res.trace.iterates.push_back(it);
      if (it.grad_map_norm <= cfg.grad_tol) {
        res.trace.reason = StopReason::converged;
        break;
      }
    }
    if (i >= cfg.i_max) {
      res.trace.reason = StopReason::max_iterations;
      break;
    }

    if (i == 0 && mem.pairs() == 0 && !cfg.fixed_scaling) {
      const double ginf = grad.lpNorm<Eigen::Infinity>();
      if (ginf > 0.0 && std::isfinite(ginf)) mem.set_scale(ginf);
    }

    SearchDirection sd = search_direction(grad, mem, f, D, tau, cfg.inner_t_max, cfg.inner_tol, &inner);
    last_inner = sd.iterations;
    Eigen::VectorXd s = std::move(sd.s);
    double gs = grad.dot(s);
    if (!(gs < 0.0)) {
      s = prox_nn_tv(D, f - grad / mem.scale(), tau, cfg.prox, &prox_state) - f;
      gs = grad.dot(s);
      inner = ThreeTermState{};
    }
    if (!(gs < 0.0)) {
      res.trace.reason = StopReason::linesearch_failure;
      break;
    }

    const auto eval = [&phi](const Eigen::VectorXd& x) { return phi.value(x); };
    LinesearchResult ls =
        linesearch(eval, D, f, value, s, gs, tau, cfg.gamma_ls, cfg.c_suff, cfg.min_step, cfg.prox, &prox_state);
    if (!ls.accepted) {
      res.trace.reason = StopReason::linesearch_failure;
      break;
    }

    Eigen::VectorXd grad_next;
    const double value_next = phi.value_and_gradient(ls.f_next, grad_next);
    mem.update(ls.f_next - f, grad_next - grad);
    f = std::move(ls.f_next);
    grad = std::move(grad_next);
    value = value_next;
    last_alpha = ls.alpha;
    res.iterations = i + 1;
  }
  res.f = std::move(f);
  res.misfit = value;
  return res;
}

}  // namespace rtomo
