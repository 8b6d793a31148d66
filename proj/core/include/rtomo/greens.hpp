#pragma once

#include "rtomo/scene.hpp"

#include <Eigen/Core>

#include <complex>
#include <memory>
#include <vector>

namespace rtomo {

using cplx = std::complex<double>;

/// H0^(2)(z) = J0(z) - i Y0(z) for z > 0.
cplx hankel_h0_2(double z);
/// H1^(2)(z) = J1(z) - i Y1(z) for z > 0.
cplx hankel_h1_2(double z);

/// 2-D free-space kernel -(i/4) H0^(2)(k rho). rho must be > 0.
cplx green_kernel_2d(double k, double rho);

/// Integral of the 2-D kernel over the disk with the cell's area,
/// -(i pi a / 2k) H1^(2)(k a) - 1/k^2 with a = sqrt(dx dy / pi).
cplx self_cell_coefficient(double k, double dx, double dy);

/// Per-transmitter complex amplitudes of point sources.
struct SourceSpec {
  std::vector<cplx> amplitude;
  static SourceSpec flat(int n_tx, cplx q = 1.0);
};

enum class OperatorStorage { automatic, dense, fft };

/// Domain operator G: translation-invariant map on complex vectors of length N.
/// Immutable once built; apply() and apply_adjoint() are safe to call concurrently.
class DomainOperator {
 public:
  DomainOperator() = default;
  DomainOperator(const Grid& grid, double k, OperatorStorage storage);

  [[nodiscard]] int size() const;
  [[nodiscard]] bool is_dense() const;

  [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  [[nodiscard]] Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& x) const;

  /// Explicit N x N matrix (assembled on demand when stored matrix-free).
  [[nodiscard]] Eigen::MatrixXcd dense() const;
  /// Kernel value for cell displacement (dix, diy), including the k^2 and cell-area factors.
  [[nodiscard]] cplx kernel(int dix, int diy) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Discretized operators for one frequency.
struct GreenOperators {
  int freq_index = 0;
  double frequency_hz = 0.0;
  double wavenumber = 0.0;
  Grid grid;
  DomainOperator G;
  Eigen::MatrixXcd H;  // n_rx x N
  Eigen::MatrixXcd V;  // N x n_tx

  [[nodiscard]] int n_cells() const { return grid.size(); }
  [[nodiscard]] int n_tx() const { return static_cast<int>(V.cols()); }
  [[nodiscard]] int n_rx() const { return static_cast<int>(H.rows()); }
};

GreenOperators build_green_operators(const Grid& grid, const AcquisitionGeometry& acq,
                                     const FrequencySchedule& sched, int j, const SourceSpec& src,
                                     OperatorStorage storage = OperatorStorage::automatic);

/// One GreenOperators per scheduled frequency.
std::vector<GreenOperators> build_operator_bank(const Grid& grid, const AcquisitionGeometry& acq,
                                                const FrequencySchedule& sched, const SourceSpec& src,
                                                OperatorStorage storage = OperatorStorage::automatic);

}  // namespace rtomo
