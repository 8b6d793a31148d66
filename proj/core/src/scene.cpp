#include "rtomo/scene.hpp"

#include "rtomo/phantom_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rtomo {

Grid Grid::unit_square(int n) {
  if (n < 2) throw std::invalid_argument("grid needs at least 2 cells per side, got " + std::to_string(n));
  const double h = 1.0 / n;
  return Grid{n, n, h, h, -0.5 + 0.5 * h, -0.5 + 0.5 * h};
}

void Grid::validate() const {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs nx, ny >= 2");
  if (!(dx > 0.0) || !(dy > 0.0)) throw std::invalid_argument("grid cell sizes must be positive");
}

void AcquisitionGeometry::validate(const Grid& grid) const {
  if (tx.empty() || rx.empty()) throw std::invalid_argument("acquisition needs at least one transmitter and receiver");
  auto inside = [&](const Point2& p) {
    return p.x > grid.xmin() && p.x < grid.xmax() && p.y > grid.ymin() && p.y < grid.ymax();
  };
  for (const auto& p : tx)
    if (inside(p)) throw std::invalid_argument("transmitter lies inside the object domain");
  for (const auto& p : rx)
    if (inside(p)) throw std::invalid_argument("receiver lies inside the object domain");
}

FrequencySchedule::FrequencySchedule(std::vector<double> freqs_hz) : freqs_(std::move(freqs_hz)) {
  if (freqs_.empty()) throw std::invalid_argument("frequency schedule is empty");
  for (std::size_t i = 0; i < freqs_.size(); ++i) {
    if (!(freqs_[i] > 0.0) || !std::isfinite(freqs_[i]))
      throw std::invalid_argument("frequencies must be positive and finite");
    if (i > 0 && !(freqs_[i] > freqs_[i - 1]))
      throw std::invalid_argument("frequencies must be strictly increasing");
  }
}

double FrequencySchedule::wavenumber(int j) const {
  return 2.0 * std::numbers::pi * frequency(j) / kSpeedOfLight;
}

FrequencySchedule FrequencySchedule::subsample(int count) const {
  if (count < 1 || count > size()) throw std::invalid_argument("subsample count out of range");
  if (count == 1) return FrequencySchedule({freqs_.front()});
  std::vector<double> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const auto pos = static_cast<int>(std::lround(static_cast<double>(i) * (size() - 1) / (count - 1)));
    out.push_back(freqs_[pos]);
  }
  return FrequencySchedule(std::move(out));
}

ContrastImage::ContrastImage(Grid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  grid.validate();
  if (values.size() != grid.size()) throw std::invalid_argument("image size does not match grid");
  if (!values.allFinite()) throw std::invalid_argument("image has non-finite values");
}

ContrastImage ContrastImage::zeros(const Grid& g) { return ContrastImage(g, Eigen::VectorXd::Zero(g.size())); }

std::vector<double> ContrastImage::value_set(double tol) const {
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

AcquisitionGeometry default_acquisition() {
  AcquisitionGeometry acq;
  for (int i = 0; i < 5; ++i) {
    const Point2 p{-0.5 + 0.25 * i, -0.6};
    acq.tx.push_back(p);
    acq.rx.push_back(p);
  }
  return acq;
}

FrequencySchedule frequency_bands() {
  std::vector<double> mhz;
  for (int j = 0; j <= 17; ++j) mhz.push_back(10.0 + 5.0 * j);
  for (int j = 0; j <= 17; ++j) mhz.push_back(100.0 + 50.0 * j);
  for (int j = 0; j <= 10; ++j) mhz.push_back(1000.0 + 100.0 * j);
  std::sort(mhz.begin(), mhz.end());
  mhz.erase(std::unique(mhz.begin(), mhz.end()), mhz.end());
  std::vector<double> hz;
  hz.reserve(mhz.size());
  for (double f : mhz) hz.push_back(f * 1e6);
  return FrequencySchedule(std::move(hz));
}

namespace {

void check_phantom_args(int n, double fmax) {
  if (n < 8) throw std::invalid_argument("phantom resolution must be >= 8");
  if (!(fmax >= 0.0) || !std::isfinite(fmax)) throw std::invalid_argument("fmax must be finite and >= 0");
}

template <class ValueAt>
ContrastImage rasterize(int n, double fmax, ValueAt value_at) {
  const Grid g = Grid::unit_square(n);
  Eigen::VectorXd v(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Point2 p = g.center(k);
    v[k] = std::max(0.0, fmax * value_at(p.x, p.y));
  }
  return ContrastImage(g, std::move(v));
}

template <std::size_t N>
double layer_value(const std::array<phantom::Layer, N>& layers, double y) {
  double v = layers.front().value;
  for (const auto& l : layers)
    if (y >= l.y_from) v = l.value;
  return v;
}

bool in_ellipse(const phantom::Ellipse& e, double x, double y) {
  const double t = e.theta_deg * std::numbers::pi / 180.0;
  const double ux = x - e.cx, uy = y - e.cy;
  const double xr = std::cos(t) * ux + std::sin(t) * uy;
  const double yr = -std::sin(t) * ux + std::cos(t) * uy;
  return (xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0;
}

}  // namespace

ContrastImage shepp_logan_phantom(int n, double fmax) {
  check_phantom_args(n, fmax);
  return rasterize(n, fmax, [](double x, double y) {
    // domain [-0.5, 0.5] -> normalized [-1, 1]
    const double xn = 2.0 * x, yn = 2.0 * y;
    double v = 0.0;
    for (const auto& e : phantom::kSheppLogan)
      if (in_ellipse(e, xn, yn)) v = e.value;
    return v;
  });
}

ContrastImage layered_phantom(int n, double fmax) {
  check_phantom_args(n, fmax);
  using namespace phantom;
  return rasterize(n, fmax, [](double x, double y) {
    double v = layer_value(kLayeredBackground, y);
    const double rx = std::abs(x - kRhombusCx) / kRhombusHalfWidth;
    const double ry = std::abs(y - kRhombusCy) / kRhombusHalfHeight;
    if (rx + ry <= 1.0) v = kRhombusValue;
    if (std::abs(x - kRhombusCx) <= kHoleHalfSide && std::abs(y - kRhombusCy) <= kHoleHalfSide) v = kHoleValue;
    return v;
  });
}

ContrastImage pipes_phantom(int n, double fmax) {
  check_phantom_args(n, fmax);
  using namespace phantom;
  return rasterize(n, fmax, [](double x, double y) {
    double v = layer_value(kPipesBackground, y);
    for (const Pipe& p : {kLargePipe, kSmallPipe}) {
      const double r = std::hypot(x - p.cx, y - p.cy);
      if (r <= p.outer_radius) v = (r <= p.outer_radius - p.wall) ? p.interior_value : p.wall_value;
    }
    return v;
  });
}

ContrastImage cylinder_scene(double c, int n) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("cylinder contrast must be finite and >= 0");
  const Grid g = Grid::unit_square(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Point2 p = g.center(k);
    if (std::hypot(p.x - phantom::kCylinderCx, p.y - phantom::kCylinderCy) <= phantom::kCylinderRadius) v[k] = c;
  }
  return ContrastImage(g, std::move(v));
}

ContrastImage resample_nearest(const ContrastImage& img, int n_new) {
  if (n_new < 2) throw std::invalid_argument("resample target must be >= 2");
  if (img.grid.nx != img.grid.ny) throw std::invalid_argument("resample_nearest expects a square image");
  const int n_old = img.grid.nx;
  const Grid g = Grid::unit_square(n_new);
  Eigen::VectorXd v(g.size());
  auto src = [&](int i) {
    // cell center (i + 0.5) / n_new in unit coordinates
    const int s = static_cast<int>(std::floor((i + 0.5) * n_old / n_new));
    return std::clamp(s, 0, n_old - 1);
  };
  for (int ix = 0; ix < n_new; ++ix)
    for (int iy = 0; iy < n_new; ++iy) v[g.index(ix, iy)] = img.at(src(ix), src(iy));
  return ContrastImage(g, std::move(v));
}

}  // namespace rtomo
