#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "wbcde/imaging.hpp"

namespace wbcde {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// a x^2 + 2h xy + b y^2 + 2g x + 2f y + 1 = 0
struct Conic {
    double a = 0.0;
    double h = 0.0;
    double b = 0.0;
    double g = 0.0;
    double f = 0.0;

    /// Value of the left-hand side at (x, y).
    double evaluate(double x, double y) const noexcept {
        return a * x * x + 2.0 * h * x * y + b * y * y + 2.0 * g * x + 2.0 * f * y + 1.0;
    }
};

/// Geometric ellipse. The r_max axis points along theta, measured from +x
/// toward +y (image rows grow downward). theta lies in [-pi/2, pi/2).
struct Ellipse {
    double x0 = 0.0;
    double y0 = 0.0;
    double r_max = 0.0;
    double r_min = 0.0;
    double theta = 0.0;

    bool contains(double x, double y) const noexcept;
    Point2 point_at(double t) const noexcept;
    double area() const noexcept;
};

/// Normalizes an orientation angle to [-pi/2, pi/2).
double normalize_orientation(double theta) noexcept;

/// Smallest absolute difference between two orientations modulo pi.
double orientation_distance(double a, double b) noexcept;

/// Conic through five points, or nullopt when the linear system is
/// singular or ill-conditioned (collinear points, repeated points, or a
/// conic through the origin whose constant term cannot be normalized).
std::optional<Conic> try_conic_from_5_points(std::span<const Point2, 5> pts) noexcept;

/// Throws DegenerateConic.
Conic conic_from_5_points(std::span<const Point2, 5> pts);

std::optional<Ellipse> try_ellipse_params(const Conic& c) noexcept;

/// Throws NotAnEllipse.
Ellipse ellipse_params(const Conic& c);

/// Implicit conic of a geometric ellipse, normalized to unit constant term.
/// Returns nullopt for an ellipse through the origin.
std::optional<Conic> conic_of(const Ellipse& e) noexcept;

/// Ordered edge-pixel list plus a membership mask.
///
/// Points are unique and in row-major scan order; the 1-based position of
/// a point in this list is the gene value used by candidates.
class EdgeMap {
public:
    EdgeMap() = default;
    explicit EdgeMap(const BinaryImage& mask);

    int width() const noexcept { return membership_.width(); }
    int height() const noexcept { return membership_.height(); }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    const std::vector<Pixel>& points() const noexcept { return points_; }
    const BinaryImage& membership() const noexcept { return membership_; }

    bool contains(int x, int y) const noexcept { return membership_.at(x, y); }

    /// Copy with the given pixels removed.
    EdgeMap without(const BinaryImage& removed) const;

private:
    std::vector<Pixel> points_;
    BinaryImage membership_;
};

}  // namespace wbcde
