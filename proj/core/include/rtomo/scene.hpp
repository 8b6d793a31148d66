#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace rtomo {

/// Vacuum speed of light (m/s).
inline constexpr double kSpeedOfLight = 299792458.0;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Regular grid of cell centers. Cell n = ix * ny + iy (column-major, y fastest).
struct Grid {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;
  double x0 = 0.0;  // center of cell (0, 0)
  double y0 = 0.0;

  /// n x n cells covering the 1 m square [-0.5, 0.5]^2.
  static Grid unit_square(int n);

  [[nodiscard]] int size() const { return nx * ny; }
  [[nodiscard]] int index(int ix, int iy) const { return ix * ny + iy; }
  [[nodiscard]] int ix_of(int n) const { return n / ny; }
  [[nodiscard]] int iy_of(int n) const { return n % ny; }
  [[nodiscard]] Point2 center(int n) const {
    return {x0 + dx * ix_of(n), y0 + dy * iy_of(n)};
  }
  [[nodiscard]] double cell_area() const { return dx * dy; }

  /// Axis-aligned bounding box of all cells (including cell extents).
  [[nodiscard]] double xmin() const { return x0 - 0.5 * dx; }
  [[nodiscard]] double xmax() const { return x0 + (nx - 0.5) * dx; }
  [[nodiscard]] double ymin() const { return y0 - 0.5 * dy; }
  [[nodiscard]] double ymax() const { return y0 + (ny - 0.5) * dy; }

  void validate() const;
  bool operator==(const Grid&) const = default;
};

struct AcquisitionGeometry {
  std::vector<Point2> tx;
  std::vector<Point2> rx;

  [[nodiscard]] int n_tx() const { return static_cast<int>(tx.size()); }
  [[nodiscard]] int n_rx() const { return static_cast<int>(rx.size()); }

  /// Throws std::invalid_argument if empty or if any position lies inside the grid box.
  void validate(const Grid& grid) const;
};

/// Strictly increasing list of positive frequencies (Hz).
class FrequencySchedule {
 public:
  FrequencySchedule() = default;
  explicit FrequencySchedule(std::vector<double> freqs_hz);

  [[nodiscard]] int size() const { return static_cast<int>(freqs_.size()); }
  [[nodiscard]] double frequency(int j) const { return freqs_.at(j); }
  /// k = 2 pi nu / c
  [[nodiscard]] double wavenumber(int j) const;
  [[nodiscard]] const std::vector<double>& frequencies() const { return freqs_; }

  /// `count` entries picked at evenly spaced positions of this schedule (first and last kept).
  [[nodiscard]] FrequencySchedule subsample(int count) const;

 private:
  std::vector<double> freqs_;
};

/// Real contrast map on a grid.
struct ContrastImage {
  Grid grid;
  Eigen::VectorXd values;

  ContrastImage() = default;
  ContrastImage(Grid g, Eigen::VectorXd v);
  static ContrastImage zeros(const Grid& g);

  [[nodiscard]] double at(int ix, int iy) const { return values[grid.index(ix, iy)]; }
  [[nodiscard]] double max_value() const { return values.size() ? values.maxCoeff() : 0.0; }
  [[nodiscard]] double min_value() const { return values.size() ? values.minCoeff() : 0.0; }
  /// Distinct values, ascending, merged within `tol`.
  [[nodiscard]] std::vector<double> value_set(double tol = 1e-12) const;
};

/// Five collocated transmitters/receivers on y = -0.6 m, x equispaced on [-0.5, 0.5].
AcquisitionGeometry default_acquisition();

/// The 47-frequency low/medium/high band union between 10 MHz and 2000 MHz.
FrequencySchedule frequency_bands();

ContrastImage shepp_logan_phantom(int n, double fmax);
ContrastImage layered_phantom(int n, double fmax);
ContrastImage pipes_phantom(int n, double fmax);

/// Centered disk of constant contrast c on a zero background.
ContrastImage cylinder_scene(double c, int n = 16);

/// Nearest-neighbor resample of a square image to n_new x n_new cells over the same domain.
ContrastImage resample_nearest(const ContrastImage& img, int n_new);

}  // namespace rtomo
