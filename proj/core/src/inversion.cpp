#include "rtomo/inversion.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rtomo {

std::string to_string(Method m) {
  switch (m) {
    case Method::sf_tau: return "sf-tau";
    case Method::sf_sigma: return "sf-sigma";
    case Method::cisor: return "cisor";
    case Method::rl: return "rl";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "sf-tau") return Method::sf_tau;
  if (name == "sf-sigma") return Method::sf_sigma;
  if (name == "cisor") return Method::cisor;
  if (name == "rl") return Method::rl;
  throw std::invalid_argument("unknown method '" + name + "' (expected sf-tau, sf-sigma, cisor or rl)");
}

Eigen::VectorXd tau_polar_argument(const ResidualSet& residuals, const WavefieldSet& fields,
                                   const std::vector<GreenOperators>& bank, bool conjugate) {
  if (residuals.r.size() != residuals.batch.size() || fields.fields.size() != residuals.batch.size())
    throw std::invalid_argument("tau update: residuals and wavefields disagree");
  Eigen::VectorXd out;
  for (std::size_t b = 0; b < residuals.batch.size(); ++b) {
    const GreenOperators& ops = bank.at(residuals.batch[b]);
    const Eigen::MatrixXcd hr = ops.H.adjoint() * residuals.r[b];
    const Eigen::MatrixXcd& U = fields.fields[b];
    if (out.size() == 0) out = Eigen::VectorXd::Zero(U.rows());
    if (conjugate)
      out += U.conjugate().cwiseProduct(hr).rowwise().sum().real();
    else
      out += U.cwiseProduct(hr).rowwise().sum().real();
  }
  return out;
}

TauUpdate tau_newton_step(double tau, double residual_norm, double sigma, double polar) {
  TauUpdate u;
  u.residual_norm = residual_norm;
  u.sigma = sigma;
  u.polar = polar;
  if (!(polar > 0.0)) {
    u.tau = tau;
    u.degenerate = residual_norm > 0.0;
    return u;
  }
  u.tau = std::max(0.0, tau + residual_norm * (residual_norm - sigma) / polar);
  return u;
}

TauUpdate tau_update(double tau, const ResidualSet& residuals, const WavefieldSet& fields,
                     const std::vector<GreenOperators>& bank, const TVOperator& D, double sigma, bool conjugate,
                     double polar_tol) {
  const Eigen::VectorXd arg = tau_polar_argument(residuals, fields, bank, conjugate);
  return tau_newton_step(tau, residuals.norm(), sigma, tv_polar(D, arg, polar_tol));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double batch_energy(const ScatteredData& data, const std::vector<int>& batch) {
  double s = 0.0;
  for (int j : batch) s += data.Y.at(j).squaredNorm();
  return s;
}

std::vector<int> prefix(int k) { return full_batch(k); }

void check_inputs(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid) {
  data.validate();
  if (data.n_freq() == 0) throw std::invalid_argument("no data");
  if (static_cast<int>(bank.size()) != data.n_freq())
    throw std::invalid_argument("operator bank and data have different frequency counts");
  for (const auto& ops : bank) {
    if (!(ops.grid == grid)) throw std::invalid_argument("operator bank grid differs from the inversion grid");
    if (ops.n_tx() != data.n_tx() || ops.n_rx() != data.n_rx())
      throw std::invalid_argument("operator bank acquisition differs from data shape");
  }
}

class Runner {
 public:
  Runner(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid,
         const InversionConfig& cfg, Method method)
      : data_(data), bank_(bank), D_(grid), cfg_(cfg), t0_(Clock::now()) {
    check_inputs(data, bank, grid);
    report_.method = method;
    f_ = Eigen::VectorXd::Zero(grid.size());
    grid_ = grid;
  }

  void stage(int index, std::vector<int> batch, double tau, double sigma, int i_max) {
    const auto ts = Clock::now();
    StageRecord rec;
    rec.stage = index;
    rec.batch = batch;
    rec.tau = tau;
    rec.sigma = sigma;
    const double energy = batch_energy(data_, batch);
    const double weight = (cfg_.normalize && energy > 0.0) ? 1.0 / energy : 1.0;
    try {
      ScatteringMisfit phi(bank_, data_, batch, cfg_.forward, weight);
      ProxQNConfig qn = cfg_.qn;
      qn.i_max = i_max;
      ProxQNResult r = prox_qn_solve(phi, D_, f_, tau, qn);
      f_ = r.f;
      rec.trace = std::move(r.trace);
      rec.misfit = r.misfit / weight;
    } catch (const SolverError& e) {
      rec.failed = true;
      rec.note = e.what();
      ProxTVOptions popts = cfg_.qn.prox;
      f_ = prox_nn_tv(D_, f_, tau, popts);
    }
    rec.f = f_;
    rec.seconds = seconds_since(ts);
    report_.tau_schedule.push_back(tau);
    if (cfg_.on_stage) cfg_.on_stage(rec);
    report_.stages.push_back(std::move(rec));
  }

  MisfitEvaluation evaluate(const std::vector<int>& batch) {
    ScatteringMisfit phi(bank_, data_, batch, cfg_.forward);
    return phi.evaluate(f_, false);
  }

  InversionReport finish() {
    report_.image = ContrastImage(grid_, f_);
    try {
      report_.dr = metric_dr(f_, data_, bank_, cfg_.forward);
    } catch (const SolverError&) {
      report_.dr = std::numeric_limits<double>::quiet_NaN();
    }
    report_.seconds = seconds_since(t0_);
    return std::move(report_);
  }

  const TVOperator& D() const { return D_; }
  const ScatteredData& data() const { return data_; }
  const std::vector<GreenOperators>& bank() const { return bank_; }
  InversionReport& report() { return report_; }

 private:
  const ScatteredData& data_;
  const std::vector<GreenOperators>& bank_;
  TVOperator D_;
  const InversionConfig& cfg_;
  Clock::time_point t0_;
  Grid grid_;
  Eigen::VectorXd f_;
  InversionReport report_;
};

void check_tau(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be finite and >= 0");
}

}  // namespace

InversionReport sf_tau(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid,
                       double tau, const InversionConfig& cfg) {
  check_tau(tau);
  Runner run(data, bank, grid, cfg, Method::sf_tau);
  for (int k = 1; k <= data.n_freq(); ++k) run.stage(k, prefix(k), tau, 0.0, cfg.qn.i_max);
  return run.finish();
}

InversionReport sf_sigma(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid,
                         double noise_rel, const InversionConfig& cfg) {
  if (!(noise_rel >= 0.0) || !std::isfinite(noise_rel)) throw std::invalid_argument("noise level must be >= 0");
  Runner run(data, bank, grid, cfg, Method::sf_sigma);
  double tau = 0.0;
  run.stage(0, prefix(1), tau, 0.0, cfg.qn.i_max);
  for (int k = 1; k <= data.n_freq(); ++k) {
    const std::vector<int> batch = prefix(k);
    const double sigma = noise_rel * std::sqrt(batch_energy(data, batch));
    std::string note;
    try {
      const MisfitEvaluation ev = run.evaluate(batch);
      const TauUpdate up =
          tau_update(tau, ev.residuals, ev.fields, bank, run.D(), sigma, cfg.conjugate_polar, cfg.polar_tol);
      if (up.degenerate) note = "tau update skipped: zero polar value";
      tau = up.tau;
    } catch (const SolverError& e) {
      note = std::string("tau update failed: ") + e.what();
    }
    run.stage(k, batch, tau, sigma, cfg.qn.i_max);
    if (!note.empty()) {
      auto& rec = run.report().stages.back();
      rec.note = rec.note.empty() ? note : note + "; " + rec.note;
    }
  }
  return run.finish();
}

InversionReport cisor(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid,
                      double tau, const InversionConfig& cfg) {
  check_tau(tau);
  Runner run(data, bank, grid, cfg, Method::cisor);
  run.stage(1, full_batch(data.n_freq()), tau, 0.0, cfg.cisor_i_max);
  return run.finish();
}

InversionReport rl(const ScatteredData& data, const std::vector<GreenOperators>& bank, const Grid& grid, double tau,
                   const InversionConfig& cfg) {
  check_tau(tau);
  Runner run(data, bank, grid, cfg, Method::rl);
  for (int j = 0; j < data.n_freq(); ++j) run.stage(j + 1, {j}, tau, 0.0, cfg.qn.i_max);
  return run.finish();
}

InversionReport run_inversion(Method method, const ScatteredData& data, const std::vector<GreenOperators>& bank,
                              const Grid& grid, double tau_or_noise, const InversionConfig& cfg) {
  switch (method) {
    case Method::sf_tau: return sf_tau(data, bank, grid, tau_or_noise, cfg);
    case Method::sf_sigma: return sf_sigma(data, bank, grid, tau_or_noise, cfg);
    case Method::cisor: return cisor(data, bank, grid, tau_or_noise, cfg);
    case Method::rl: return rl(data, bank, grid, tau_or_noise, cfg);
  }
  throw std::invalid_argument("unknown method");
}

double metric_dr(const Eigen::VectorXd& f, const ScatteredData& data, const std::vector<GreenOperators>& bank,
                 const ForwardOptions& opts) {
  const std::vector<int> all = full_batch(data.n_freq());
  const double energy = batch_energy(data, all);
  if (!(energy > 0.0)) throw std::invalid_argument("data residual metric needs nonzero data");
  return 100.0 * misfit(f, all, data, bank, opts).value / energy;
}

double metric_snr(const Eigen::VectorXd& f, const Eigen::VectorXd& f_true) {
  if (f.size() != f_true.size()) throw std::invalid_argument("SNR: image sizes differ");
  const double ref = f_true.norm();
  if (!(ref > 0.0)) throw std::invalid_argument("SNR: reference image is zero");
  const double err = (f - f_true).norm();
  if (err == 0.0) return kSnrCap;
  return std::min(kSnrCap, -20.0 * std::log10(err / ref));
}

}  // namespace rtomo
