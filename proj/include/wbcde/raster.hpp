#pragma once

#include <optional>
#include <vector>

#include "wbcde/geometry.hpp"

namespace wbcde {

struct Frame {
    int width = 0;
    int height = 0;
};

/// Perimeter test points of one ellipse.
struct PerimeterSet {
    std::vector<Pixel> points;
    std::size_t size() const noexcept { return points.size(); }
};

/// Largest semi-axis accepted by the fixed-point rasterizer.
inline constexpr double kMaxRasterRadius = 4096.0;

/// Sign of r_min^2 x^2 + r_max^2 y^2 - r_max^2 r_min^2 in the ellipse's own
/// axis-aligned frame (r_max along x). Returns -1 inside, 0 on, +1 outside.
int midpoint_sign(double r_max, double r_min, double x, double y) noexcept;

/// Midpoint-ellipse walk of the first quadrant for an axis-aligned ellipse
/// centered at the origin with semi-axis `rx` along x and `ry` along y.
/// Region 1 steps x while the gradient is y-dominant; region 2 steps y.
std::vector<Pixel> midpoint_quadrant(double rx, double ry);

/// Perimeter pixels of `e`: axis-aligned midpoint walk mirrored into four
/// quadrants, rotated by theta, translated, rounded, deduplicated and
/// clipped to the frame. nullopt when nothing lands inside the frame.
std::optional<PerimeterSet> try_rasterize(const Ellipse& e, Frame frame);

/// As above without clipping.
PerimeterSet rasterize_unclipped(const Ellipse& e);

/// Throws EmptyPerimeter.
PerimeterSet rasterize(const Ellipse& e, Frame frame);

}  // namespace wbcde
