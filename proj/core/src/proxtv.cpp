#include "rtomo/proxtv.hpp"

#include "rtomo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rtomo {

namespace {

double power_iteration(const TVOperator& D) {
  const Eigen::Index n = D.cells();
  Eigen::VectorXd x(n);
  for (int ix = 0; ix < D.nx(); ++ix)
    for (int iy = 0; iy < D.ny(); ++iy) {
      const Eigen::Index i = static_cast<Eigen::Index>(ix) * D.ny() + iy;
      x[i] = ((ix + iy) % 2 == 0 ? 1.0 : -1.0) + 0.01 * std::sin(1.0 + static_cast<double>(i));
    }
  x.normalize();
  double lambda = 1.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd y = D.apply_transpose(D.apply(x)) + x;
    const double next = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) break;
    x = y / ny;
    if (std::abs(next - lambda) <= 1e-12 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

double cached_norm(const TVOperator& D) {
  static std::shared_mutex mutex;
  static std::map<std::pair<int, int>, double> cache;
  const auto key = std::make_pair(D.nx(), D.ny());
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double value = power_iteration(D);
  std::unique_lock lock(mutex);
  cache.emplace(key, value);
  return value;
}

}  // namespace

TVOperator::TVOperator(int nx, int ny) : nx_(nx), ny_(ny), norm_(1.0) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("TVOperator: grid dimensions must be positive");
  norm_ = cached_norm(*this);
}

double TVOperator::default_step() const { return 0.9 / std::sqrt(norm_); }

Eigen::VectorXd TVOperator::apply(const Eigen::VectorXd& f) const {
  if (f.size() != cells()) throw std::invalid_argument("TVOperator::apply: size mismatch");
  Eigen::VectorXd out(edges());
  Eigen::Index e = 0;
  for (int ix = 0; ix < nx_; ++ix) {
    const Eigen::Index base = static_cast<Eigen::Index>(ix) * ny_;
    for (int iy = 0; iy + 1 < ny_; ++iy) out[e++] = f[base + iy + 1] - f[base + iy];
  }
  for (int ix = 0; ix + 1 < nx_; ++ix) {
    const Eigen::Index base = static_cast<Eigen::Index>(ix) * ny_;
    for (int iy = 0; iy < ny_; ++iy) out[e++] = f[base + ny_ + iy] - f[base + iy];
  }
  return out;
}

Eigen::VectorXd TVOperator::apply_transpose(const Eigen::VectorXd& w) const {
  if (w.size() != edges()) throw std::invalid_argument("TVOperator::apply_transpose: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cells());
  Eigen::Index e = 0;
  for (int ix = 0; ix < nx_; ++ix) {
    const Eigen::Index base = static_cast<Eigen::Index>(ix) * ny_;
    for (int iy = 0; iy + 1 < ny_; ++iy) {
      out[base + iy + 1] += w[e];
      out[base + iy] -= w[e];
      ++e;
    }
  }
  for (int ix = 0; ix + 1 < nx_; ++ix) {
    const Eigen::Index base = static_cast<Eigen::Index>(ix) * ny_;
    for (int iy = 0; iy < ny_; ++iy) {
      out[base + ny_ + iy] += w[e];
      out[base + iy] -= w[e];
      ++e;
    }
  }
  return out;
}

double TVOperator::tv(const Eigen::VectorXd& f) const { return apply(f).lpNorm<1>(); }

double l1_ball_threshold(const Eigen::VectorXd& w, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("l1 ball radius must be >= 0");
  const double l1 = w.lpNorm<1>();
  if (l1 <= tau) return 0.0;
  std::vector<double> a(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) a[i] = std::abs(w[i]);
  std::sort(a.begin(), a.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    cumsum += a[k];
    const double t = (cumsum - tau) / static_cast<double>(k + 1);
    if (a[k] >= t) theta = t;
    else break;
  }
  return std::max(theta, 0.0);
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& w, double tau) {
  const double theta = l1_ball_threshold(w, tau);
  if (theta == 0.0 && w.lpNorm<1>() <= tau) return w;
  Eigen::VectorXd out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double m = std::abs(w[i]) - theta;
    out[i] = m > 0.0 ? std::copysign(m, w[i]) : 0.0;
  }
  return out;
}

Eigen::VectorXd project_nonneg(const Eigen::VectorXd& w) { return w.cwiseMax(0.0); }

VectorMap l1_ball_conjugate_resolvent(double tau, double gamma) {
  return [tau, gamma](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return z - gamma * project_l1_ball(z / gamma, tau);
  };
}

VectorMap nonneg_conjugate_resolvent(double gamma) {
  return [gamma](const Eigen::VectorXd& z) -> Eigen::VectorXd { return z - gamma * project_nonneg(z / gamma); };
}

ProxTVResult prox_nn_tv_detailed(const TVOperator& D, const Eigen::VectorXd& w, double tau,
                                 const ProxTVOptions& opts, ProxTVState* state) {
  if (w.size() != D.cells()) throw std::invalid_argument("prox_nn_tv: size mismatch");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("prox_nn_tv: tau must be finite and >= 0");
  if (!(opts.gamma > 0.0)) throw std::invalid_argument("prox_nn_tv: gamma must be positive");
  if (opts.t_max < 0) throw std::invalid_argument("prox_nn_tv: t_max must be >= 0");
  const double alpha = opts.step.value_or(D.default_step());
  if (!(alpha > 0.0 && alpha * alpha * D.norm_estimate() < 1.0))
    throw std::invalid_argument("prox_nn_tv: step outside (0, 1/sqrt(||D^T D + I||))");
  const double gamma = opts.gamma;

  const bool warm = state && state->f.size() == D.cells() && state->u.size() == D.edges() &&
                    state->v.size() == D.cells();
  Eigen::VectorXd f = warm ? state->f : Eigen::VectorXd::Zero(D.cells());
  Eigen::VectorXd u = warm ? state->u : Eigen::VectorXd::Zero(D.edges());
  Eigen::VectorXd v = warm ? state->v : Eigen::VectorXd::Zero(D.cells());

  ProxTVResult res;
  // When clamping alone lands inside the TV ball it is the exact projection.
  if (const Eigen::VectorXd clamped = w.cwiseMax(0.0); D.tv(clamped) <= tau) {
    if (state) *state = ProxTVState{clamped, u, v};
    res.f = clamped;
    res.converged = true;
    return res;
  }
  for (int t = 0; t < opts.t_max; ++t) {
    const Eigen::VectorXd fhat = f - alpha * (D.apply_transpose(u) + v);
    Eigen::VectorXd fn = (gamma * fhat + alpha * w) / (alpha + gamma);
    const Eigen::VectorXd bar = 2.0 * fn - f;
    const Eigen::VectorXd dbar = D.apply(bar);
    u = u + alpha * dbar - alpha * project_l1_ball(u / alpha + dbar, tau);
    v = v + alpha * bar - alpha * project_nonneg(v / alpha + bar);

    const double fn_norm = fn.norm();
    const double change = fn_norm > 0.0 ? (fn - f).norm() / fn_norm : (fn - f).norm();
    const double scale = std::max(fn.lpNorm<Eigen::Infinity>(), std::numeric_limits<double>::min());
    const double tv_excess = std::max(0.0, D.tv(fn) - tau) / std::max(tau, scale);
    const double neg = std::max(0.0, -fn.minCoeff()) / scale;
    f = std::move(fn);
    res.iterations = t + 1;
    res.residual = change + tv_excess + neg;
    if (!std::isfinite(res.residual)) throw SolverError("prox_nn_tv diverged", res.residual);
    if (res.residual < opts.tol) {
      res.converged = true;
      break;
    }
  }
  if (opts.t_max == 0) {
    const double tv = D.tv(f);
    res.residual = std::max(0.0, tv - tau) + std::max(0.0, -f.minCoeff());
    res.converged = res.residual == 0.0;
  }
  if (state) *state = ProxTVState{f, u, v};

  if (opts.polish) {
    f = f.cwiseMax(0.0);
    const double tv = D.tv(f);
    if (tv > tau) {
      const double mean = f.mean();
      const double s = tau / tv;
      f = (mean + s * (f.array() - mean)).matrix();
    }
  }
  res.f = std::move(f);
  return res;
}

Eigen::VectorXd prox_nn_tv(const TVOperator& D, const Eigen::VectorXd& w, double tau, const ProxTVOptions& opts,
                           ProxTVState* state) {
  return prox_nn_tv_detailed(D, w, tau, opts, state).f;
}

double tv_polar(const TVOperator& D, const Eigen::VectorXd& x, double tol) {
  if (x.size() != D.cells()) throw std::invalid_argument("tv_polar: size mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("tv_polar: tolerance must be positive");
  const Eigen::VectorXd b = (x.array() - x.mean()).matrix();
  const double bnorm = b.norm();
  if (bnorm == 0.0) return 0.0;

  auto lap = [&D](const Eigen::VectorXd& p) { return D.apply_transpose(D.apply(p)); };
  Eigen::VectorXd z = Eigen::VectorXd::Zero(D.cells());
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const int max_it = static_cast<int>(std::max<Eigen::Index>(100, 10 * D.cells()));
  bool ok = false;
  for (int it = 0; it < max_it; ++it) {
    const Eigen::VectorXd ap = lap(p);
    const double alpha = rr / p.dot(ap);
    z += alpha * p;
    r -= alpha * ap;
    r.array() -= r.mean();
    const double rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= tol * bnorm) {
      ok = true;
      break;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "tv_polar: conjugate gradients did not reach relative residual " << tol;
    throw SolverError(msg.str(), std::sqrt(rr) / bnorm);
  }
  z.array() -= z.mean();
  return D.apply(z).lpNorm<Eigen::Infinity>();
}

ThreeTermResult pd_three_term(const ThreeTermProblem& p, double gamma, int t_max, ThreeTermState start, double tol) {
  if (!(gamma > 0.0)) throw std::invalid_argument("pd_three_term: gamma must be positive");
  ThreeTermResult res;
  res.state = std::move(start);
  auto& [x, u, v] = res.state;
  for (int t = 0; t < t_max; ++t) {
    Eigen::VectorXd xn = p.resolvent_h(x - gamma * p.Lt(u) - gamma * v);
    const Eigen::VectorXd bar = 2.0 * xn - x;
    u = p.resolvent_gstar(u + gamma * p.L(bar));
    v = p.resolvent_kstar(v + gamma * bar);
    res.last_change = (xn - x).norm() / std::max(xn.norm(), 1.0);
    x = std::move(xn);
    res.iterations = t + 1;
    const double size = x.norm() + u.norm() + v.norm();
    if (!std::isfinite(size) || size > 1e150) throw SolverError("pd_three_term diverged", size);
    if (tol > 0.0 && res.last_change < tol) break;
  }
  return res;
}

}  // namespace rtomo
