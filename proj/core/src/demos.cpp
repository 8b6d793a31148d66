#include "rtomo/demos.hpp"

#include "rtomo/greens.hpp"
#include "rtomo/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rtomo {

LandscapeResult landscape(const FrequencySchedule& sched, const AcquisitionGeometry& acq,
                          const LandscapeOptions& opts) {
  if (opts.c_steps < 2 || !(opts.c_max > opts.c_min)) throw std::invalid_argument("landscape: bad contrast sweep");
  if (opts.batch < 1) throw std::invalid_argument("landscape: batch width must be >= 1");
  if (sched.size() == 0) throw std::invalid_argument("landscape: empty frequency schedule");
  const Grid grid = Grid::unit_square(opts.n);
  const auto bank = build_operator_bank(grid, acq, sched, SourceSpec::flat(acq.n_tx()));
  const ScatteredData observed = simulate(bank, cylinder_scene(opts.c_star, opts.n), opts.forward);

  LandscapeResult res;
  res.freqs_hz = sched.frequencies();
  const int nf = sched.size();
  const int nc = opts.c_steps;
  for (int i = 0; i < nc; ++i) res.c.push_back(opts.c_min + (opts.c_max - opts.c_min) * i / (nc - 1));
  res.per_frequency.resize(nc, nf);
  for (int i = 0; i < nc; ++i) {
    const Eigen::VectorXd f = cylinder_scene(res.c[i], opts.n).values;
    std::vector<double> parts(nf);
    parallel_for(nf, [&](int j) {
      const Eigen::MatrixXcd U = solve_total_field(bank[j], f, opts.forward);
      parts[j] = 0.5 * (observed.Y[j] - synthesize_data(bank[j], f, U)).squaredNorm();
    });
    for (int j = 0; j < nf; ++j) res.per_frequency(i, j) = parts[j];
  }
  const int width = std::min(opts.batch, nf);
  res.sliding.resize(nc, nf - width + 1);
  for (int s = 0; s + width <= nf; ++s) res.sliding.col(s) = res.per_frequency.middleCols(s, width).rowwise().sum();
  res.incremental.resize(nc, nf);
  res.incremental.col(0) = res.per_frequency.col(0);
  for (int k = 1; k < nf; ++k) res.incremental.col(k) = res.incremental.col(k - 1) + res.per_frequency.col(k);
  return res;
}

int count_local_minima(const Eigen::VectorXd& curve) {
  int count = 0;
  const Eigen::Index n = curve.size();
  Eigen::Index i = 1;
  while (i + 1 < n) {
    if (curve[i] < curve[i - 1]) {
      Eigen::Index j = i;
      while (j + 1 < n && curve[j + 1] == curve[i]) ++j;
      if (j + 1 < n && curve[j + 1] > curve[i]) ++count;
      i = j + 1;
    } else {
      ++i;
    }
  }
  return count;
}

AcquisitionGeometry spectrum_geometry(bool reflection, double standoff, int n_rx) {
  if (n_rx < 1) throw std::invalid_argument("spectrum demo needs at least one receiver");
  AcquisitionGeometry acq;
  acq.tx.push_back({-standoff - 0.1, 0.0});
  const double x = reflection ? -standoff : standoff;
  for (int r = 0; r < n_rx; ++r) {
    const double y = n_rx == 1 ? 0.0 : -0.5 + static_cast<double>(r) / (n_rx - 1);
    acq.rx.push_back({x, y});
  }
  return acq;
}

Eigen::MatrixXd dft_magnitude(const Grid& grid, const Eigen::VectorXd& img) {
  const int nx = grid.nx, ny = grid.ny;
  // Separable transform: along y for every column, then along x.
  Eigen::MatrixXcd a(ny, nx);
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) a(iy, ix) = img[grid.index(ix, iy)];
  auto dft_matrix = [](int n) {
    Eigen::MatrixXcd w(n, n);
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) w(k, m) = std::polar(1.0, -2.0 * std::numbers::pi * ((k * m) % n) / n);
    return w;
  };
  const Eigen::MatrixXcd spec = dft_matrix(ny) * a * dft_matrix(nx).transpose();
  Eigen::MatrixXd out(ny, nx);
  for (int ky = 0; ky < ny; ++ky)
    for (int kx = 0; kx < nx; ++kx) out((ky + ny / 2) % ny, (kx + nx / 2) % nx) = std::abs(spec(ky, kx));
  return out;
}

double low_band_fraction(const Eigen::MatrixXd& mag) {
  const Eigen::Index ny = mag.rows(), nx = mag.cols();
  double low = 0.0, total = 0.0;
  for (Eigen::Index r = 0; r < ny; ++r)
    for (Eigen::Index c = 0; c < nx; ++c) {
      const double xi_y = static_cast<double>(r - ny / 2) / static_cast<double>(ny);
      const double xi_x = static_cast<double>(c - nx / 2) / static_cast<double>(nx);
      const double e = mag(r, c) * mag(r, c);
      total += e;
      if (std::hypot(xi_x, xi_y) < 0.125) low += e;
    }
  return total > 0.0 ? low / total : 0.0;
}

namespace {

SpectrumMode reconstruct(const SpectrumOptions& opts, const Grid& grid, const Eigen::VectorXd& object,
                         bool reflection) {
  SpectrumMode mode;
  mode.acq = spectrum_geometry(reflection, opts.standoff, opts.n_rx);
  const FrequencySchedule sched(opts.freqs_hz);
  const auto bank = build_operator_bank(grid, mode.acq, sched, SourceSpec::flat(1));
  const int nf = sched.size();

  // Rows of the linearized map f -> H_j diag(u_j) f with u_j the true total field.
  std::vector<Eigen::MatrixXcd> rows(nf);
  Eigen::VectorXcd y(static_cast<Eigen::Index>(nf) * opts.n_rx);
  parallel_for(nf, [&](int j) {
    const Eigen::MatrixXcd U = solve_total_field(bank[j], object, opts.forward);
    rows[j] = bank[j].H * U.col(0).asDiagonal();
  });
  Eigen::MatrixXcd A(y.size(), grid.size());
  for (int j = 0; j < nf; ++j) A.middleRows(static_cast<Eigen::Index>(j) * opts.n_rx, opts.n_rx) = rows[j];
  y = A * object.cast<cplx>();

  Eigen::MatrixXd Areal(2 * A.rows(), A.cols());
  Areal.topRows(A.rows()) = A.real();
  Areal.bottomRows(A.rows()) = A.imag();
  Eigen::VectorXd yr(2 * y.size());
  yr << y.real(), y.imag();

  const Eigen::Index n = grid.size();
  if (yr.norm() == 0.0) {
    mode.reconstruction = Eigen::VectorXd::Zero(n);
  } else {
    // Conjugate gradients on (A^T A + lambda I) f = A^T y.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Areal * Areal.transpose(), Eigen::EigenvaluesOnly);
    const double a2 = eig.eigenvalues().maxCoeff();
    const double lambda = opts.ridge * a2;
    auto normal = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return Areal.transpose() * (Areal * v) + lambda * v;
    };
    const Eigen::VectorXd b = Areal.transpose() * yr;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b, p = r;
    double rr = r.squaredNorm();
    const double stop = 1e-12 * b.norm();
    for (int it = 0; it < opts.max_iterations && std::sqrt(rr) > stop; ++it) {
      const Eigen::VectorXd ap = normal(p);
      const double alpha = rr / p.dot(ap);
      f += alpha * p;
      r -= alpha * ap;
      const double next = r.squaredNorm();
      p = r + (next / rr) * p;
      rr = next;
    }
    mode.reconstruction = f;
  }
  mode.magnitude = dft_magnitude(grid, mode.reconstruction);
  mode.low_band_fraction = low_band_fraction(mode.magnitude);
  return mode;
}

}  // namespace

SpectrumResult spectrum_demo(const SpectrumOptions& opts) {
  if (opts.n < 8) throw std::invalid_argument("spectrum demo grid must be at least 8 x 8");
  if (opts.freqs_hz.empty()) throw std::invalid_argument("spectrum demo needs at least one frequency");
  if (!(opts.ridge > 0.0)) throw std::invalid_argument("spectrum demo ridge must be positive");
  SpectrumResult res;
  res.grid = Grid::unit_square(opts.n);
  res.object = shepp_logan_phantom(opts.n, opts.contrast).values;
  res.transmission = reconstruct(opts, res.grid, res.object, false);
  res.reflection = reconstruct(opts, res.grid, res.object, true);
  return res;
}

}  // namespace rtomo
