#pragma once

// Frozen geometry of the synthetic scenes. All coordinates are in meters on the
// [-0.5, 0.5]^2 object domain; y grows away from the sensor line at y = -0.6 m.
// Contrast values are for the unit phantom (fmax = 1) and are scaled by fmax.
//
// Shapes are painted in the listed order with absolute values (later shapes
// overwrite earlier ones), so the rasterized value set never contains sums of
// overlapping shapes.

#include <array>

namespace rtomo::phantom {

struct Ellipse {
  double cx, cy;     // center
  double a, b;       // semi-axes along the rotated x and y directions
  double theta_deg;  // counter-clockwise rotation
  double value;
};

// Shepp-Logan variant in normalized [-1, 1]^2 coordinates (mapped onto the
// domain by a factor 0.5). The skull ring is thickened with respect to the
// classic table so that it survives rasterization down to 8 x 8.
inline constexpr std::array<Ellipse, 10> kSheppLogan{{
    {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},         // skull
    {0.0, -0.0184, 0.60, 0.82, 0.0, 0.2},     // brain
    {0.22, 0.0, 0.11, 0.31, -18.0, 0.0},      // right ventricle
    {-0.22, 0.0, 0.16, 0.41, 18.0, 0.0},      // left ventricle
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.3},
    {0.0, 0.1, 0.046, 0.046, 0.0, 0.3},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.3},
    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.3},
    {0.0, -0.606, 0.023, 0.023, 0.0, 0.3},
    {0.06, -0.605, 0.023, 0.046, 0.0, 0.3},
}};
inline constexpr double kSheppLoganMax = 1.0;

// Layered underground scene: horizontal layers, a rhombus, a square hole.
struct Layer {
  double y_from;  // layer occupies y >= y_from (until the next layer)
  double value;
};
inline constexpr std::array<Layer, 4> kLayeredBackground{{
    {-0.50, 0.10},
    {-0.25, 0.20},
    {0.00, 0.35},
    {0.25, 0.50},
}};
inline constexpr double kRhombusCx = 0.0;
inline constexpr double kRhombusCy = 0.0;
inline constexpr double kRhombusHalfWidth = 0.30;   // half diagonal along x
inline constexpr double kRhombusHalfHeight = 0.25;  // half diagonal along y
inline constexpr double kRhombusValue = 1.0;
inline constexpr double kHoleHalfSide = 0.08;  // square hole centered on the rhombus
inline constexpr double kHoleValue = 0.0;
inline constexpr double kLayeredMax = 1.0;

// High-resolution pipes scene. The outer diameters (0.4 m, 0.24 m) are the
// stated ones; the wall thicknesses are read as 0.06 m and 0.05 m.
inline constexpr std::array<Layer, 3> kPipesBackground{{
    {-0.50, 0.05},
    {-0.15, 0.1235},
    {0.20, 0.5},
}};
struct Pipe {
  double cx, cy;
  double outer_radius;
  double wall;
  double wall_value;
  double interior_value;
};
inline constexpr Pipe kLargePipe{-0.20, 0.00, 0.20, 0.06, 0.75, 1.0};
inline constexpr Pipe kSmallPipe{0.25, 0.05, 0.12, 0.05, 0.75, 0.0};
inline constexpr double kPipesMax = 1.0;

// Scalar cylinder scene used for the cost-landscape demo.
inline constexpr double kCylinderCx = 0.0;
inline constexpr double kCylinderCy = 0.0;
inline constexpr double kCylinderRadius = 0.2;

}  // namespace rtomo::phantom
