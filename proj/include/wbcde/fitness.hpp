#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "wbcde/geometry.hpp"
#include "wbcde/raster.hpp"

namespace wbcde {

/// Five 1-based indices into EdgeMap::points(). Values may leave the valid
/// range after mutation; such candidates are penalized, not repaired.
struct Candidate {
    static constexpr std::size_t kGenes = 5;
    std::array<std::int64_t, kGenes> genes{};

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Cost assigned to candidates that do not describe a usable ellipse.
inline constexpr double kPenalty = 2.0;

struct FitnessValue {
    double j = kPenalty;
    std::size_t matched = 0;
    std::size_t n_s = 0;

    bool is_penalty() const noexcept { return j == kPenalty; }

    /// j = 1 - matched / n_s.
    static FitnessValue from_counts(std::size_t matched, std::size_t n_s);
    static FitnessValue penalty() noexcept { return {}; }
};

struct FitnessOptions {
    /// Candidates with r_max above this are penalized. 0 means
    /// max(width, height) of the edge map.
    double max_radius = 0.0;
    /// Chebyshev dilation of the membership mask used for matching. 0 is
    /// exact pixel coincidence.
    int edge_tolerance = 0;
};

/// 1 iff (x, y) is an edge pixel; out-of-bounds is 0.
int edge_hit(const EdgeMap& em, int x, int y) noexcept;

/// Ellipse encoded by a candidate, if the chain index -> conic -> ellipse
/// succeeds.
std::optional<Ellipse> decode(const Candidate& c, const EdgeMap& em) noexcept;

/// Scores a candidate against an edge map. Every failure along the chain
/// (index out of range, degenerate conic, not an ellipse, radius cap,
/// empty perimeter) yields FitnessValue::penalty().
class FitnessEvaluator {
public:
    explicit FitnessEvaluator(const EdgeMap& em, FitnessOptions opts = {});

    FitnessValue operator()(const Candidate& c) const;

    /// Coverage of an already-decoded ellipse.
    FitnessValue score(const Ellipse& e) const;

    const EdgeMap& edges() const noexcept { return *em_; }
    double max_radius() const noexcept { return max_radius_; }

private:
    const EdgeMap* em_;
    BinaryImage match_mask_;
    double max_radius_;
};

FitnessValue evaluate(const Candidate& c, const EdgeMap& em, FitnessOptions opts = {});

}  // namespace wbcde
