#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>

#include "wbcde/fitness.hpp"
#include "wbcde/rng.hpp"

using namespace wbcde;

namespace {

constexpr int kW = 40, kH = 40;

const std::array<Pixel, 5> kGenePixels{{{29, 20}, {11, 20}, {20, 29}, {20, 11}, {26, 27}}};

std::int64_t index_of(const EdgeMap& em, Pixel p) {
    const auto& pts = em.points();
    const auto it = std::find(pts.begin(), pts.end(), p);
    REQUIRE(it != pts.end());
    return static_cast<std::int64_t>(it - pts.begin()) + 1;
}

Candidate candidate_for(const EdgeMap& em) {
    Candidate c;
    for (int i = 0; i < 5; ++i) c.genes[i] = index_of(em, kGenePixels[i]);
    return c;
}

Ellipse fixture_ellipse() {
    std::array<Point2, 5> pts;
    for (int i = 0; i < 5; ++i) pts[i] = {double(kGenePixels[i].x), double(kGenePixels[i].y)};
    return ellipse_params(conic_from_5_points(pts));
}

BinaryImage mask_of(const std::set<Pixel>& pixels) {
    BinaryImage m(kW, kH);
    for (const auto& p : pixels) m.set(p.x, p.y, true);
    return m;
}

}  // namespace

TEST_CASE("52 perimeter points with 35 on edges score 1 - 35/52") {
    const FitnessValue v = FitnessValue::from_counts(35, 52);
    CHECK(v.j == 1.0 - 35.0 / 52.0);
    CHECK(v.matched == 35);
    CHECK(v.n_s == 52);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", v.j);
    CHECK(std::string(buf) == "0.327");
}

TEST_CASE("geometric fixture with N_s = 52 and 35 coincidences") {
    const auto perimeter = rasterize(fixture_ellipse(), {kW, kH});
    REQUIRE(perimeter.size() == 52);
    const std::set<Pixel> genes(kGenePixels.begin(), kGenePixels.end());

    // Keep the gene pixels, then drop perimeter pixels until 35 remain.
    std::set<Pixel> edges(genes);
    std::size_t kept = 0;
    for (const auto& p : perimeter.points) kept += genes.count(p);
    for (const auto& p : perimeter.points) {
        if (genes.count(p) == 0 && kept < 35) {
            edges.insert(p);
            ++kept;
        }
    }
    const EdgeMap em(mask_of(edges));
    std::size_t matched = 0;
    for (const auto& p : perimeter.points) matched += edges.count(p);
    REQUIRE(matched == 35);

    const FitnessValue v = evaluate(candidate_for(em), em);
    CHECK(v.n_s == 52);
    CHECK(v.matched == 35);
    CHECK(v.j == 1.0 - 35.0 / 52.0);
}

TEST_CASE("candidate on its own rasterized perimeter scores zero") {
    const auto perimeter = rasterize(fixture_ellipse(), {kW, kH});
    std::set<Pixel> edges(perimeter.points.begin(), perimeter.points.end());
    edges.insert(kGenePixels.begin(), kGenePixels.end());
    const EdgeMap em(mask_of(edges));
    const FitnessValue v = evaluate(candidate_for(em), em);
    CHECK(v.j == 0.0);
    CHECK(v.matched == v.n_s);
}

TEST_CASE("out-of-range and degenerate candidates are penalized") {
    BinaryImage m(kW, kH);
    for (int i = 0; i < 10; ++i) m.set(5 + i, 5 + i, true);  // collinear diagonal
    m.set(30, 8, true);
    const EdgeMap em(m);
    const auto n = static_cast<std::int64_t>(em.size());

    CHECK(evaluate(Candidate{{1, 2, 3, 4, n + 1}}, em).is_penalty());
    CHECK(evaluate(Candidate{{0, 2, 3, 4, 5}}, em).is_penalty());
    CHECK(evaluate(Candidate{{-3, 2, 3, 4, 5}}, em).is_penalty());
    CHECK(evaluate(Candidate{{1, 2, 3, 4, 5}}, em).is_penalty());  // collinear
    CHECK(evaluate(Candidate{{1, 1, 1, 1, 1}}, em).is_penalty());  // repeated
    CHECK(evaluate(Candidate{{1, 2, 3, 4, 5}}, em).j == kPenalty);
    CHECK(FitnessValue::penalty().j == 2.0);
}

TEST_CASE("radius cap penalizes oversized ellipses") {
    const auto perimeter = rasterize(fixture_ellipse(), {kW, kH});
    std::set<Pixel> edges(perimeter.points.begin(), perimeter.points.end());
    edges.insert(kGenePixels.begin(), kGenePixels.end());
    const EdgeMap em(mask_of(edges));
    const Candidate c = candidate_for(em);
    CHECK_FALSE(evaluate(c, em).is_penalty());
    FitnessOptions tight;
    tight.max_radius = 9.0;
    CHECK(evaluate(c, em, tight).is_penalty());
    const FitnessEvaluator ev(em);
    CHECK(ev.max_radius() == 40.0);
    CHECK(ev.score(Ellipse{20, 20, 41, 30, 0}).is_penalty());
    CHECK(ev.score(Ellipse{20, 20, 5, 0.5, 0}).is_penalty());
}

TEST_CASE("edge_hit reads membership with out-of-bounds as zero") {
    BinaryImage m(5, 5);
    m.set(1, 1, true);
    m.set(2, 1, true);
    m.set(3, 1, true);
    const EdgeMap em(m);
    CHECK(edge_hit(em, 1, 1) == 1);
    CHECK(edge_hit(em, 2, 2) == 0);
    CHECK(edge_hit(em, -1, 5) == 0);
    CHECK(edge_hit(em, 5, 1) == 0);
}

TEST_CASE("scores lie in [0, 1] and never improve when edges are removed") {
    Rng rng(31);
    BinaryImage m(64, 64);
    const auto ring = rasterize(Ellipse{32, 30, 18, 11, 0.4}, {64, 64});
    for (const auto& p : ring.points) m.set(p.x, p.y, true);
    for (int i = 0; i < 60; ++i) m.set(int(rng.below(64)), int(rng.below(64)), true);
    const EdgeMap em(m);
    const auto n = em.size();

    BinaryImage removed(64, 64);
    for (const auto& p : em.points()) {
        if (rng.uniform() < 0.3) removed.set(p.x, p.y, true);
    }
    const EdgeMap fewer = em.without(removed);

    std::size_t valid = 0;
    for (int t = 0; t < 3000; ++t) {
        Candidate c;
        for (auto& g : c.genes) g = 1 + static_cast<std::int64_t>(rng.below(n));
        const auto full = evaluate(c, em);
        if (full.is_penalty()) continue;
        ++valid;
        REQUIRE(full.j >= 0.0);
        REQUIRE(full.j <= 1.0);
        REQUIRE(full.j == 1.0 - double(full.matched) / double(full.n_s));
        // Same ellipse scored against the reduced edge set.
        const auto e = decode(c, em);
        REQUIRE(e.has_value());
        const auto reduced = FitnessEvaluator(fewer).score(*e);
        REQUIRE(reduced.j >= full.j);
        REQUIRE(evaluate(c, em).j == full.j);
    }
    CHECK(valid > 100);
}

TEST_CASE("edge tolerance accepts a ring shifted by one pixel") {
    const Ellipse e{32, 32, 15, 9, 0.2};
    BinaryImage m(64, 64);
    for (const auto& p : rasterize(e, {64, 64}).points) m.set(p.x + 1, p.y, true);
    const EdgeMap em(m);
    const FitnessValue exact = FitnessEvaluator(em).score(e);
    FitnessOptions loose;
    loose.edge_tolerance = 1;
    const FitnessValue tolerant = FitnessEvaluator(em, loose).score(e);
    CHECK(exact.j > 0.3);
    CHECK(tolerant.j == 0.0);
}
