#pragma once

#include "rtomo/forward.hpp"
#include "rtomo/scene.hpp"

#include <Eigen/Core>

#include <vector>

namespace rtomo {

struct LandscapeOptions {
  double c_star = 10.0;
  double c_min = 0.0;
  double c_max = 20.0;
  int c_steps = 41;
  int n = 16;
  int batch = 10;  // width of the sliding batches
  ForwardOptions forward{GmresOptions{}, LinearSolver::automatic};
};

/// Misfit of the cylinder scene as a function of its contrast c, against noiseless data at c_star.
struct LandscapeResult {
  std::vector<double> c;
  std::vector<double> freqs_hz;
  Eigen::MatrixXd per_frequency;  // c x n_f: F_j(c)
  Eigen::MatrixXd sliding;        // c x (n_f - batch + 1): sum over j in [s, s + batch)
  Eigen::MatrixXd incremental;    // c x n_f: sum over j <= k
};

LandscapeResult landscape(const FrequencySchedule& sched, const AcquisitionGeometry& acq,
                          const LandscapeOptions& opts);

/// Number of strict interior local minima of a sampled curve (plateaus count once).
int count_local_minima(const Eigen::VectorXd& curve);

struct SpectrumOptions {
  std::vector<double> freqs_hz{2e9, 3e9, 5e9};
  int n = 64;
  double contrast = 0.05;
  double ridge = 1e-6;  // relative to ||A||^2
  int max_iterations = 2000;
  double standoff = 0.6;  // |x| of the transmitter and receiver lines
  int n_rx = 5;
  ForwardOptions forward{};
};

struct SpectrumMode {
  AcquisitionGeometry acq;
  Eigen::VectorXd reconstruction;
  Eigen::MatrixXd magnitude;  // n x n, centered (zero frequency at n/2), rows ky, columns kx
  double low_band_fraction = 0.0;
};

struct SpectrumResult {
  Grid grid;
  Eigen::VectorXd object;
  SpectrumMode transmission;
  SpectrumMode reflection;
};

/// Linearized reconstructions of one object from reflection and transmission acquisitions,
/// with the true total fields held fixed, and the 2-D DFT magnitudes of both.
SpectrumResult spectrum_demo(const SpectrumOptions& opts);

/// Transmitter left of the domain; receivers on the same side (reflection) or opposite side.
AcquisitionGeometry spectrum_geometry(bool reflection, double standoff, int n_rx);

/// Centered |DFT| of an image (rows ky, columns kx).
Eigen::MatrixXd dft_magnitude(const Grid& grid, const Eigen::VectorXd& img);
/// Fraction of squared magnitude with radial frequency below a quarter of Nyquist.
double low_band_fraction(const Eigen::MatrixXd& centered_magnitude);

}  // namespace rtomo
