#include "rtomo/greens.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rtomo {

cplx hankel_h0_2(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw std::domain_error("hankel_h0_2: argument must be positive, got " + std::to_string(z));
  return {std::cyl_bessel_j(0.0, z), -std::cyl_neumann(0.0, z)};
}

cplx hankel_h1_2(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw std::domain_error("hankel_h1_2: argument must be positive, got " + std::to_string(z));
  return {std::cyl_bessel_j(1.0, z), -std::cyl_neumann(1.0, z)};
}

cplx green_kernel_2d(double k, double rho) {
  if (!(rho > 0.0)) throw std::domain_error("green_kernel_2d: rho must be > 0; use self_cell_coefficient for the singular cell");
  return cplx(0.0, -0.25) * hankel_h0_2(k * rho);
}

cplx self_cell_coefficient(double k, double dx, double dy) {
  if (!(k > 0.0) || !(dx > 0.0) || !(dy > 0.0)) throw std::domain_error("self_cell_coefficient: k, dx, dy must be > 0");
  const double a = std::sqrt(dx * dy / std::numbers::pi);
  return cplx(0.0, -std::numbers::pi * a / (2.0 * k)) * hankel_h1_2(k * a) - 1.0 / (k * k);
}

SourceSpec SourceSpec::flat(int n_tx, cplx q) { return SourceSpec{std::vector<cplx>(n_tx, q)}; }

namespace {

// FFTW's planner is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct DomainOperator::Impl {
  Grid grid;
  double k = 0.0;
  int kx = 0, ky = 0;           // kernel table extents (2n - 1)
  std::vector<cplx> table;      // kernel by displacement
  bool dense_storage = false;
  Eigen::MatrixXcd dense;
  int px = 0, py = 0;           // padded FFT extents
  std::vector<cplx> kernel_hat;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  cplx kernel(int dix, int diy) const { return table[(dix + grid.nx - 1) * ky + (diy + grid.ny - 1)]; }

  Eigen::VectorXcd convolve(const Eigen::VectorXcd& x) const {
    const int nx = grid.nx, ny = grid.ny;
    std::vector<cplx> buf(static_cast<std::size_t>(px) * py, cplx(0.0));
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) buf[ix * py + iy] = x[ix * ny + iy];
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(forward, p, p);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= kernel_hat[i];
    fftw_execute_dft(backward, p, p);
    const double scale = 1.0 / (static_cast<double>(px) * py);
    Eigen::VectorXcd y(grid.size());
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) y[ix * ny + iy] = buf[ix * py + iy] * scale;
    return y;
  }
};

DomainOperator::DomainOperator(const Grid& grid, double k, OperatorStorage storage) {
  grid.validate();
  if (!(k > 0.0)) throw std::invalid_argument("DomainOperator: wavenumber must be positive");
  auto impl = std::make_shared<Impl>();
  impl->grid = grid;
  impl->k = k;
  impl->kx = 2 * grid.nx - 1;
  impl->ky = 2 * grid.ny - 1;
  impl->table.resize(static_cast<std::size_t>(impl->kx) * impl->ky);
  const double k2 = k * k;
  const cplx diag = k2 * self_cell_coefficient(k, grid.dx, grid.dy);
  for (int dix = -(grid.nx - 1); dix <= grid.nx - 1; ++dix) {
    for (int diy = -(grid.ny - 1); diy <= grid.ny - 1; ++diy) {
      cplx v;
      if (dix == 0 && diy == 0) {
        v = diag;
      } else {
        const double rho = std::hypot(dix * grid.dx, diy * grid.dy);
        v = k2 * green_kernel_2d(k, rho) * grid.cell_area();
      }
      impl->table[(dix + grid.nx - 1) * impl->ky + (diy + grid.ny - 1)] = v;
    }
  }

  if (storage == OperatorStorage::automatic) storage = grid.size() <= 400 ? OperatorStorage::dense : OperatorStorage::fft;

  if (storage == OperatorStorage::dense) {
    impl->dense_storage = true;
    const int n = grid.size();
    impl->dense.resize(n, n);
    for (int m = 0; m < n; ++m)
      for (int c = 0; c < n; ++c)
        impl->dense(m, c) = impl->kernel(grid.ix_of(m) - grid.ix_of(c), grid.iy_of(m) - grid.iy_of(c));
  } else {
    impl->px = 2 * grid.nx;
    impl->py = 2 * grid.ny;
    const std::size_t total = static_cast<std::size_t>(impl->px) * impl->py;
    impl->kernel_hat.assign(total, cplx(0.0));
    for (int dix = -(grid.nx - 1); dix <= grid.nx - 1; ++dix)
      for (int diy = -(grid.ny - 1); diy <= grid.ny - 1; ++diy) {
        const int wx = (dix + impl->px) % impl->px;
        const int wy = (diy + impl->py) % impl->py;
        impl->kernel_hat[wx * impl->py + wy] = impl->kernel(dix, diy);
      }
    {
      std::lock_guard lock(planner_mutex());
      std::vector<cplx> scratch(total);
      auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
      impl->forward = fftw_plan_dft_2d(impl->px, impl->py, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
      impl->backward = fftw_plan_dft_2d(impl->px, impl->py, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!impl->forward || !impl->backward) throw std::runtime_error("FFTW planning failed");
    auto* kh = reinterpret_cast<fftw_complex*>(impl->kernel_hat.data());
    fftw_execute_dft(impl->forward, kh, kh);
  }
  impl_ = std::move(impl);
}

int DomainOperator::size() const { return impl_ ? impl_->grid.size() : 0; }

bool DomainOperator::is_dense() const { return impl_ && impl_->dense_storage; }

Eigen::VectorXcd DomainOperator::apply(const Eigen::VectorXcd& x) const {
  if (x.size() != size()) throw std::invalid_argument("DomainOperator::apply: size mismatch");
  if (impl_->dense_storage) return impl_->dense * x;
  return impl_->convolve(x);
}

Eigen::VectorXcd DomainOperator::apply_adjoint(const Eigen::VectorXcd& x) const {
  if (x.size() != size()) throw std::invalid_argument("DomainOperator::apply_adjoint: size mismatch");
  if (impl_->dense_storage) return impl_->dense.adjoint() * x;
  // The kernel is even in the displacement, so G is complex symmetric and G^H x = conj(G conj(x)).
  return impl_->convolve(x.conjugate()).conjugate();
}

Eigen::MatrixXcd DomainOperator::dense() const {
  if (impl_->dense_storage) return impl_->dense;
  const Grid& g = impl_->grid;
  Eigen::MatrixXcd m(g.size(), g.size());
  for (int r = 0; r < g.size(); ++r)
    for (int c = 0; c < g.size(); ++c) m(r, c) = impl_->kernel(g.ix_of(r) - g.ix_of(c), g.iy_of(r) - g.iy_of(c));
  return m;
}

cplx DomainOperator::kernel(int dix, int diy) const { return impl_->kernel(dix, diy); }

namespace {

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

GreenOperators build_green_operators(const Grid& grid, const AcquisitionGeometry& acq,
                                     const FrequencySchedule& sched, int j, const SourceSpec& src,
                                     OperatorStorage storage) {
  grid.validate();
  if (acq.tx.empty() || acq.rx.empty()) throw std::invalid_argument("acquisition needs transmitters and receivers");
  if (static_cast<int>(src.amplitude.size()) != acq.n_tx())
    throw std::invalid_argument("source spec needs one amplitude per transmitter");
  if (j < 0 || j >= sched.size()) throw std::out_of_range("frequency index out of range");

  const double k = sched.wavenumber(j);
  const double coincide = 1e-9 * std::min(grid.dx, grid.dy);
  GreenOperators ops;
  ops.freq_index = j;
  ops.frequency_hz = sched.frequency(j);
  ops.wavenumber = k;
  ops.grid = grid;
  ops.G = DomainOperator(grid, k, storage);

  const int n = grid.size();
  ops.H.resize(acq.n_rx(), n);
  for (int l = 0; l < acq.n_rx(); ++l)
    for (int c = 0; c < n; ++c) {
      const double rho = distance(acq.rx[l], grid.center(c));
      if (rho < coincide) throw std::invalid_argument("receiver coincides with a grid cell center");
      ops.H(l, c) = green_kernel_2d(k, rho) * grid.cell_area();
    }
  ops.V.resize(n, acq.n_tx());
  for (int t = 0; t < acq.n_tx(); ++t)
    for (int c = 0; c < n; ++c) {
      const double rho = distance(acq.tx[t], grid.center(c));
      if (rho < coincide) throw std::invalid_argument("transmitter coincides with a grid cell center");
      ops.V(c, t) = k * k * green_kernel_2d(k, rho) * src.amplitude[t];
    }
  return ops;
}

std::vector<GreenOperators> build_operator_bank(const Grid& grid, const AcquisitionGeometry& acq,
                                                const FrequencySchedule& sched, const SourceSpec& src,
                                                OperatorStorage storage) {
  std::vector<GreenOperators> bank;
  bank.reserve(sched.size());
  for (int j = 0; j < sched.size(); ++j) bank.push_back(build_green_operators(grid, acq, sched, j, src, storage));
  return bank;
}

}  // namespace rtomo
