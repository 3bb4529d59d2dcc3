#include "wbcde/geometry.hpp"

#include <cmath>
#include <numbers>

#include "wbcde/error.hpp"

namespace wbcde {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kRelativeZero = 1e-12;

// In-place LU with partial pivoting on a 5x5 system. Returns false when a
// pivot vanishes or the 1-norm condition estimate exceeds kMaxCondition.
bool solve5(std::array<std::array<double, 5>, 5> m, std::array<double, 5>& rhs) noexcept {
    constexpr int n = 5;
    double norm_a = 0.0;
    for (int c = 0; c < n; ++c) {
        double col = 0.0;
        for (int r = 0; r < n; ++r) col += std::abs(m[r][c]);
        norm_a = std::max(norm_a, col);
    }
    if (!(norm_a > 0.0) || !std::isfinite(norm_a)) return false;

    std::array<int, n> perm{0, 1, 2, 3, 4};
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int r = k + 1; r < n; ++r)
            if (std::abs(m[r][k]) > std::abs(m[piv][k])) piv = r;
        if (m[piv][k] == 0.0) return false;
        std::swap(m[piv], m[k]);
        std::swap(perm[piv], perm[k]);
        for (int r = k + 1; r < n; ++r) {
            const double l = m[r][k] / m[k][k];
            m[r][k] = l;
            for (int c = k + 1; c < n; ++c) m[r][c] -= l * m[k][c];
        }
    }

    auto lu_solve = [&](std::array<double, n> b) {
        std::array<double, n> y{};
        for (int r = 0; r < n; ++r) {
            double s = b[perm[r]];
            for (int c = 0; c < r; ++c) s -= m[r][c] * y[c];
            y[r] = s;
        }
        for (int r = n - 1; r >= 0; --r) {
            double s = y[r];
            for (int c = r + 1; c < n; ++c) s -= m[r][c] * y[c];
            y[r] = s / m[r][r];
        }
        return y;
    };

    // ||A^-1||_1 from the explicit inverse; n is tiny.
    double norm_inv = 0.0;
    for (int c = 0; c < n; ++c) {
        std::array<double, n> e{};
        e[c] = 1.0;
        const auto col = lu_solve(e);
        double s = 0.0;
        for (double v : col) s += std::abs(v);
        norm_inv = std::max(norm_inv, s);
    }
    const double cond = norm_a * norm_inv;
    if (!std::isfinite(cond) || cond > kMaxCondition) return false;

    rhs = lu_solve(rhs);
    for (double v : rhs)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

double normalize_orientation(double theta) noexcept {
    constexpr double pi = std::numbers::pi;
    double t = std::fmod(theta + pi / 2.0, pi);
    if (t < 0.0) t += pi;
    t -= pi / 2.0;
    if (t >= pi / 2.0) t -= pi;
    return t == 0.0 ? 0.0 : t;  // no negative zero
}

double orientation_distance(double a, double b) noexcept {
    const double d = std::abs(normalize_orientation(a - b));
    return std::min(d, std::numbers::pi - d);
}

bool Ellipse::contains(double x, double y) const noexcept {
    const double c = std::cos(theta), s = std::sin(theta);
    const double dx = x - x0, dy = y - y0;
    const double u = (dx * c + dy * s) / r_max;
    const double v = (-dx * s + dy * c) / r_min;
    return u * u + v * v <= 1.0;
}

Point2 Ellipse::point_at(double t) const noexcept {
    const double c = std::cos(theta), s = std::sin(theta);
    const double u = r_max * std::cos(t), v = r_min * std::sin(t);
    return {x0 + u * c - v * s, y0 + u * s + v * c};
}

double Ellipse::area() const noexcept { return std::numbers::pi * r_max * r_min; }

std::optional<Conic> try_conic_from_5_points(std::span<const Point2, 5> pts) noexcept {
    // Solve in a centered, unit-scaled frame: the centroid of five points on
    // an ellipse is interior, so the unit constant term is always attainable
    // there, and the matrix entries are all O(1).
    double cx = 0.0, cy = 0.0;
    for (const auto& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= 5.0;
    cy /= 5.0;
    double ms = 0.0;
    for (const auto& p : pts) ms += (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
    const double s = std::sqrt(ms / 10.0);
    if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;

    std::array<std::array<double, 5>, 5> m{};
    std::array<double, 5> rhs{};
    for (int i = 0; i < 5; ++i) {
        const double u = (pts[i].x - cx) / s, v = (pts[i].y - cy) / s;
        m[i] = {u * u, 2.0 * u * v, v * v, 2.0 * u, 2.0 * v};
        rhs[i] = -1.0;
    }
    if (!solve5(m, rhs)) return std::nullopt;
    const auto [an, hn, bn, gn, fn] = rhs;

    // Back to pixel coordinates; multiply through by s^2 and renormalize.
    const double a = an, h = hn, b = bn;
    const double g = -an * cx - hn * cy + gn * s;
    const double f = -hn * cx - bn * cy + fn * s;
    const double k = an * cx * cx + 2.0 * hn * cx * cy + bn * cy * cy - 2.0 * gn * s * cx -
                     2.0 * fn * s * cy + s * s;
    const double mag = std::abs(an) * cx * cx + 2.0 * std::abs(hn * cx * cy) + std::abs(bn) * cy * cy +
                       2.0 * std::abs(gn * s * cx) + 2.0 * std::abs(fn * s * cy) + s * s;
    if (!(std::abs(k) > kRelativeZero * mag)) return std::nullopt;

    Conic c{a / k, h / k, b / k, g / k, f / k};
    if (!std::isfinite(c.a) || !std::isfinite(c.h) || !std::isfinite(c.b) || !std::isfinite(c.g) ||
        !std::isfinite(c.f))
        return std::nullopt;
    if (c.a == 0.0 && c.h == 0.0 && c.b == 0.0) return std::nullopt;
    return c;
}

Conic conic_from_5_points(std::span<const Point2, 5> pts) {
    if (auto c = try_conic_from_5_points(pts)) return *c;
    throw DegenerateConic("five points do not determine a conic with unit constant term");
}

std::optional<Ellipse> try_ellipse_params(const Conic& cn) noexcept {
    const double a = cn.a, h = cn.h, b = cn.b, g = cn.g, f = cn.f;
    const double C = a * b - h * h;
    const double scale = a * a + 2.0 * h * h + b * b;
    if (!(C > kRelativeZero * scale)) return std::nullopt;

    const double R = std::sqrt((a - b) * (a - b) + 4.0 * h * h);
    const double delta = a * (b - f * f) - h * (h - f * g) + g * (h * f - b * g);

    // Eigenvalues (a+b-R)/2 and (a+b+R)/2 of [[a,h],[h,b]]; the smaller
    // magnitude one is recovered from the product C to avoid cancellation.
    double lam_minus, lam_plus;
    if (a + b >= 0.0) {
        lam_plus = 0.5 * (a + b + R);
        lam_minus = C / lam_plus;
    } else {
        lam_minus = 0.5 * (a + b - R);
        lam_plus = C / lam_minus;
    }
    // r^2 = -2 delta / (C (a + b -/+ R)) = -delta / (C lambda)
    const double r_minus_sq = -delta / (C * lam_minus);
    const double r_plus_sq = -delta / (C * lam_plus);
    if (!(r_minus_sq > 0.0) || !(r_plus_sq > 0.0) || !std::isfinite(r_minus_sq) ||
        !std::isfinite(r_plus_sq))
        return std::nullopt;

    Ellipse e;
    e.x0 = (h * f - b * g) / C;
    e.y0 = (g * h - a * f) / C;
    if (!std::isfinite(e.x0) || !std::isfinite(e.y0)) return std::nullopt;

    // Direction of the lambda_plus eigenvector; the lambda_minus axis is
    // perpendicular to it.
    const double phi = 0.5 * std::atan2(2.0 * h, a - b);
    const double r_minus = std::sqrt(r_minus_sq), r_plus = std::sqrt(r_plus_sq);
    if (r_minus >= r_plus) {
        e.r_max = r_minus;
        e.r_min = r_plus;
        e.theta = normalize_orientation(phi + std::numbers::pi / 2.0);
    } else {
        e.r_max = r_plus;
        e.r_min = r_minus;
        e.theta = normalize_orientation(phi);
    }
    if (h == 0.0 && a == b) e.theta = 0.0;
    return e;
}

Ellipse ellipse_params(const Conic& c) {
    if (auto e = try_ellipse_params(c)) return *e;
    throw NotAnEllipse("conic is not a real ellipse");
}

std::optional<Conic> conic_of(const Ellipse& e) noexcept {
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    const double p = 1.0 / (e.r_max * e.r_max), q = 1.0 / (e.r_min * e.r_min);
    const double m00 = p * c * c + q * s * s;
    const double m01 = (p - q) * c * s;
    const double m11 = p * s * s + q * c * c;
    const double g = -(m00 * e.x0 + m01 * e.y0);
    const double f = -(m01 * e.x0 + m11 * e.y0);
    const double k = m00 * e.x0 * e.x0 + 2.0 * m01 * e.x0 * e.y0 + m11 * e.y0 * e.y0 - 1.0;
    if (std::abs(k) < kRelativeZero) return std::nullopt;
    return Conic{m00 / k, m01 / k, m11 / k, g / k, f / k};
}

EdgeMap::EdgeMap(const BinaryImage& mask) : membership_(mask) {
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) points_.push_back({x, y});
}

EdgeMap EdgeMap::without(const BinaryImage& removed) const {
    BinaryImage kept = membership_;
    for (const auto& p : points_)
        if (removed.at(p.x, p.y)) kept.set(p.x, p.y, false);
    return EdgeMap(kept);
}

}  // namespace wbcde
