#include "wbcde/raster.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "wbcde/error.hpp"

namespace wbcde {

namespace {

using i128 = __int128;

constexpr double kFixedOne = 65536.0;  // 2^16

// Ellipse function of an axis-aligned ellipse in 16.16 fixed point, exact in
// 128-bit integers. Arguments are doubled coordinates so that half-pixel
// midpoints are integers.
class FixedEllipse {
public:
    FixedEllipse(double rx, double ry)
        : a2_(square(std::llround(rx * kFixedOne))), b2_(square(std::llround(ry * kFixedOne))) {}

    // 4 * 2^64 * (ry^2 x^2 + rx^2 y^2 - rx^2 ry^2) at (x2 / 2, y2 / 2).
    // With semi-axes <= 4096 every term stays below 2^115.
    i128 at_doubled(std::int64_t x2, std::int64_t y2) const noexcept {
        const i128 xx = static_cast<i128>(x2) * x2;
        const i128 yy = static_cast<i128>(y2) * y2;
        return ((b2_ * xx) << 32) + ((a2_ * yy) << 32) - 4 * a2_ * b2_;
    }

    // ry^2 x < rx^2 y: the gradient at (x, y) is dominated by its y component.
    bool y_dominant(std::int64_t x, std::int64_t y) const noexcept { return b2_ * x < a2_ * y; }

private:
    static i128 square(long long v) { return static_cast<i128>(v) * v; }

    i128 a2_;
    i128 b2_;
};

void check_axes(const Ellipse& e) {
    if (!std::isfinite(e.x0) || !std::isfinite(e.y0) || !std::isfinite(e.theta) ||
        !(e.r_min >= 1.0) || !(e.r_max >= e.r_min) || !(e.r_max <= kMaxRasterRadius)) {
        throw std::invalid_argument("rasterize requires finite r_max >= r_min >= 1 within the radius cap");
    }
}

std::vector<Pixel> place(const Ellipse& e, const std::vector<Pixel>& quadrant, const Frame* frame) {
    // A circle has no orientation; skipping the rotation keeps its pixels
    // independent of theta.
    const double theta = e.r_max == e.r_min ? 0.0 : e.theta;
    const double c = std::cos(theta), s = std::sin(theta);
    std::vector<Pixel> out;
    out.reserve(quadrant.size() * 4);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(quadrant.size() * 8);
    auto emit = [&](int u, int v) {
        const double x = e.x0 + u * c - v * s;
        const double y = e.y0 + u * s + v * c;
        const auto px = static_cast<int>(std::lround(x));
        const auto py = static_cast<int>(std::lround(y));
        if (frame && (px < 0 || py < 0 || px >= frame->width || py >= frame->height)) return;
        const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(px)) << 32) |
                         static_cast<std::uint32_t>(py);
        if (seen.insert(key).second) out.push_back({px, py});
    };
    for (const auto& q : quadrant) {
        emit(q.x, q.y);
        emit(-q.x, q.y);
        emit(q.x, -q.y);
        emit(-q.x, -q.y);
    }
    return out;
}

}  // namespace

int midpoint_sign(double r_max, double r_min, double x, double y) noexcept {
    const double v = (r_min * r_min) * (x * x) + (r_max * r_max) * (y * y) - (r_max * r_max) * (r_min * r_min);
    return (v > 0.0) - (v < 0.0);
}

std::vector<Pixel> midpoint_quadrant(double rx, double ry) {
    if (!(rx > 0.0) || !(ry > 0.0) || rx > kMaxRasterRadius || ry > kMaxRasterRadius) {
        throw std::invalid_argument("midpoint_quadrant: semi-axes out of range");
    }
    const FixedEllipse fe(rx, ry);
    std::vector<Pixel> pts;

    // Region 1: one pixel per column. y is the lowest row whose upper
    // midpoint (x, y + 1/2) is not inside the ellipse.
    std::int64_t y = static_cast<std::int64_t>(std::ceil(ry)) + 1;
    std::int64_t y_top = 0;
    for (std::int64_t x = 0;; ++x) {
        while (y > 0 && fe.at_doubled(2 * x, 2 * y - 1) >= 0) --y;
        if (!fe.y_dominant(x, y)) break;
        pts.push_back({static_cast<int>(x), static_cast<int>(y)});
        y_top = y;
    }

    // Region 2: one pixel per row, walking down to the x axis. x is the
    // lowest column whose right midpoint (x + 1/2, y) is outside.
    std::int64_t x = 0;
    for (std::int64_t row = y_top; row >= 0; --row) {
        while (fe.at_doubled(2 * x + 1, 2 * row) <= 0) ++x;
        if (!fe.y_dominant(x, row)) pts.push_back({static_cast<int>(x), static_cast<int>(row)});
    }
    return pts;
}

PerimeterSet rasterize_unclipped(const Ellipse& e) {
    check_axes(e);
    return {place(e, midpoint_quadrant(e.r_max, e.r_min), nullptr)};
}

std::optional<PerimeterSet> try_rasterize(const Ellipse& e, Frame frame) {
    check_axes(e);
    PerimeterSet ps{place(e, midpoint_quadrant(e.r_max, e.r_min), &frame)};
    if (ps.points.empty()) return std::nullopt;
    return ps;
}

PerimeterSet rasterize(const Ellipse& e, Frame frame) {
    if (auto ps = try_rasterize(e, frame)) return std::move(*ps);
    throw EmptyPerimeter("ellipse perimeter lies entirely outside the frame");
}

}  // namespace wbcde
