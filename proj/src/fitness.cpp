#include "wbcde/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wbcde {

FitnessValue FitnessValue::from_counts(std::size_t matched, std::size_t n_s) {
    if (n_s == 0 || matched > n_s) throw std::invalid_argument("fitness counts out of range");
    return {1.0 - static_cast<double>(matched) / static_cast<double>(n_s), matched, n_s};
}

int edge_hit(const EdgeMap& em, int x, int y) noexcept { return em.contains(x, y) ? 1 : 0; }

std::optional<Ellipse> decode(const Candidate& c, const EdgeMap& em) noexcept {
    const auto n = static_cast<std::int64_t>(em.size());
    std::array<Point2, 5> pts;
    for (std::size_t i = 0; i < Candidate::kGenes; ++i) {
        const auto g = c.genes[i];
        if (g < 1 || g > n) return std::nullopt;
        const auto& p = em.points()[static_cast<std::size_t>(g - 1)];
        pts[i] = {static_cast<double>(p.x), static_cast<double>(p.y)};
    }
    const auto conic = try_conic_from_5_points(pts);
    if (!conic) return std::nullopt;
    return try_ellipse_params(*conic);
}

namespace {

BinaryImage dilate(const BinaryImage& m, int r) {
    BinaryImage out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m.at(x, y)) continue;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    if (out.contains(x + dx, y + dy)) out.set(x + dx, y + dy, true);
        }
    }
    return out;
}

}  // namespace

FitnessEvaluator::FitnessEvaluator(const EdgeMap& em, FitnessOptions opts)
    : em_(&em),
      max_radius_(opts.max_radius > 0.0 ? opts.max_radius
                                        : static_cast<double>(std::max(em.width(), em.height()))) {
    if (opts.edge_tolerance < 0) throw std::invalid_argument("edge_tolerance must be >= 0");
    if (opts.edge_tolerance > 0) match_mask_ = dilate(em.membership(), opts.edge_tolerance);
    max_radius_ = std::min(max_radius_, kMaxRasterRadius);
}

FitnessValue FitnessEvaluator::score(const Ellipse& e) const {
    if (!(e.r_min >= 1.0) || !(e.r_max <= max_radius_)) return FitnessValue::penalty();
    const auto perimeter = try_rasterize(e, Frame{em_->width(), em_->height()});
    if (!perimeter) return FitnessValue::penalty();
    const BinaryImage& mask = match_mask_.width() > 0 ? match_mask_ : em_->membership();
    std::size_t matched = 0;
    for (const auto& p : perimeter->points) matched += mask.at(p.x, p.y) ? 1 : 0;
    return FitnessValue::from_counts(matched, perimeter->size());
}

FitnessValue FitnessEvaluator::operator()(const Candidate& c) const {
    const auto e = decode(c, *em_);
    if (!e) return FitnessValue::penalty();
    return score(*e);
}

FitnessValue evaluate(const Candidate& c, const EdgeMap& em, FitnessOptions opts) {
    return FitnessEvaluator(em, opts)(c);
}

}  // namespace wbcde
