#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wbcde/detector.hpp"
#include "wbcde/error.hpp"
#include "wbcde/raster.hpp"
#include "wbcde/rng.hpp"
#include "wbcde/synth.hpp"

using namespace wbcde;

namespace {

EdgeMap ring_edges(std::initializer_list<Ellipse> shapes, int w, int h) {
    BinaryImage m(w, h);
    for (const auto& e : shapes) {
        for (const auto& p : rasterize(e, {w, h}).points) m.set(p.x, p.y, true);
    }
    return EdgeMap(m);
}

Scene three_cells() {
    SceneSpec spec;
    spec.width = 200;
    spec.height = 160;
    spec.ellipses = {{{50, 50, 22, 15, 0.3}, 60}, {{145, 45, 18, 14, -0.8}, 60}, {{100, 115, 24, 16, 1.2}, 60}};
    return generate(spec);
}

}  // namespace

TEST_CASE("single ellipse is recovered within a pixel") {
    SceneSpec spec;
    spec.width = spec.height = 120;
    const Ellipse truth{60, 60, 20, 12, 0.5};
    spec.ellipses = {{truth, 60}};
    const Scene scene = generate(spec);
    const DetectionReport r = detect(scene.image, DetectorConfig{});
    REQUIRE(r.ellipses.size() == 1);
    const Ellipse& e = r.ellipses[0].ellipse;
    CHECK(std::hypot(e.x0 - truth.x0, e.y0 - truth.y0) <= 1.0);
    CHECK(std::abs(e.r_max - truth.r_max) <= 1.0);
    CHECK(std::abs(e.r_min - truth.r_min) <= 1.0);
    CHECK(orientation_distance(e.theta, truth.theta) <= 0.05);
}

TEST_CASE("blank image gives an empty report") {
    const DetectionReport r = detect(GrayImage(64, 64, 200), DetectorConfig{});
    CHECK(r.ellipses.empty());
    CHECK(r.rounds == 0);
    CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("three disjoint cells are each matched at IoU 0.8") {
    const Scene scene = three_cells();
    const DetectionReport r = detect(scene.image, DetectorConfig{});
    REQUIRE(r.ellipses.size() == 3);
    for (const auto& t : scene.truth) {
        double best = 0.0;
        for (const auto& d : r.ellipses) best = std::max(best, mask_iou(d.ellipse, t, 200, 160));
        CHECK(best >= 0.8);
    }
}

TEST_CASE("an edge map that is one raster is accepted with j = 0") {
    // Axis-aligned with integer center and axes, so the four extremes are
    // exact lattice points and some fifth raster point completes a perfect fit.
    const EdgeMap em = ring_edges({{40, 35, 17, 10, 0}}, 80, 70);
    const auto index = [&](Pixel p) {
        const auto& pts = em.points();
        return static_cast<std::int64_t>(std::find(pts.begin(), pts.end(), p) - pts.begin()) + 1;
    };
    bool reachable = false;
    for (std::int64_t k = 1; k <= static_cast<std::int64_t>(em.size()); ++k) {
        const Candidate c{{index({57, 35}), index({23, 35}), index({40, 45}), index({40, 25}), k}};
        reachable = reachable || evaluate(c, em).j == 0.0;
    }
    REQUIRE(reachable);
    const DetectionReport r = detect_on_edges(em, DetectorConfig{});
    REQUIRE(r.ellipses.size() == 1);
    CHECK(r.ellipses[0].fitness.j == 0.0);
}

TEST_CASE("concentric circles give both radii") {
    const EdgeMap em = ring_edges({{40, 40, 10, 10, 0}, {40, 40, 20, 20, 0}}, 80, 80);
    const DetectionReport r = detect_on_edges(em, DetectorConfig{});
    REQUIRE(r.ellipses.size() == 2);
    std::vector<double> radii;
    for (const auto& d : r.ellipses) {
        CHECK(std::abs(d.ellipse.r_max - d.ellipse.r_min) <= 1.0);
        CHECK(std::hypot(d.ellipse.x0 - 40, d.ellipse.y0 - 40) <= 1.0);
        radii.push_back(0.5 * (d.ellipse.r_max + d.ellipse.r_min));
    }
    std::sort(radii.begin(), radii.end());
    CHECK(std::abs(radii[0] - 10) <= 1.0);
    CHECK(std::abs(radii[1] - 20) <= 1.0);
}

TEST_CASE("five scattered pixels are not accepted") {
    BinaryImage m(64, 64);
    for (Pixel p : {Pixel{5, 9}, Pixel{50, 3}, Pixel{33, 40}, Pixel{12, 58}, Pixel{60, 44}}) m.set(p.x, p.y, true);
    const EdgeMap em(m);
    const DetectorConfig cfg;
    // Every candidate with distinct genes is a permutation of the same five points.
    const FitnessValue only = evaluate(Candidate{{1, 2, 3, 4, 5}}, em);
    CHECK(only.j > cfg.accept_threshold);
    const DetectionReport r = detect_on_edges(em, cfg);
    CHECK(r.ellipses.empty());
    CHECK_THROWS_AS(detect_on_edges(EdgeMap(BinaryImage(8, 8)), cfg), InsufficientEdges);
}

TEST_CASE("accepted ellipses meet the coincidence bound") {
    Rng rng(6);
    for (int t = 0; t < 6; ++t) {
        SceneSpec spec = random_scene(RandomSceneParams{}, rng.next_u64());
        const Scene scene = generate(spec);
        DetectorConfig cfg;
        cfg.de.rng_seed = 100 + t;
        const DetectionReport r = detect(scene.image, cfg);
        CHECK(r.ellipses.size() <= cfg.max_ellipses);
        for (const auto& d : r.ellipses) {
            const auto need = static_cast<std::size_t>(std::ceil((1.0 - cfg.accept_threshold) * d.fitness.n_s - 1e-9));
            CHECK(d.fitness.matched >= need);
            CHECK(d.ellipse.r_min >= cfg.min_axis);
        }
    }
}

TEST_CASE("detection is deterministic for a fixed seed") {
    const Scene scene = three_cells();
    DetectorConfig cfg;
    cfg.de.rng_seed = 31;
    const auto a = to_json(detect(scene.image, cfg));
    const auto b = to_json(detect(scene.image, cfg));
    CHECK(a.dump() == b.dump());
}

TEST_CASE("max_ellipses caps the number of acceptances") {
    DetectorConfig cfg;
    cfg.max_ellipses = 1;
    const DetectionReport r = detect(three_cells().image, cfg);
    CHECK(r.ellipses.size() == 1);
    CHECK(r.diagnostic == "max_ellipses reached");
    cfg.max_ellipses = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("residual edges after detection yield nothing more") {
    const Scene scene = three_cells();
    DetectorConfig cfg;
    const DetectionReport r = detect(scene.image, cfg);
    REQUIRE(r.ellipses.size() == 3);
    EdgeMap residual = morphological_edges(wbc_mask(segment(scene.image, cfg.seg), cfg.seg));
    for (const auto& d : r.ellipses) residual = residual.without(suppression_mask(residual, d.ellipse, cfg.suppression_radius));
    if (residual.size() >= 5) CHECK(detect_on_edges(residual, cfg).ellipses.empty());
}

TEST_CASE("suppression removes pixels near the perimeter only") {
    const Ellipse e{30, 30, 12, 8, 0.2};
    BinaryImage m(64, 64, true);
    const EdgeMap em(m);
    const BinaryImage s = suppression_mask(em, e, 2);
    const auto ring = rasterize(e, {64, 64});
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            bool near = false;
            for (const auto& p : ring.points) near = near || (std::abs(p.x - x) <= 2 && std::abs(p.y - y) <= 2);
            REQUIRE(s.at(x, y) == near);
        }
    }
}

TEST_CASE("edge components are ordered by size") {
    const EdgeMap em = ring_edges({{15, 15, 5, 5, 0}, {50, 40, 12, 9, 0}}, 80, 60);
    const auto parts = edge_components(em);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].size() > parts[1].size());
    CHECK(parts[0].size() + parts[1].size() == em.size());
}

TEST_CASE("config overrides from key=value text") {
    DetectorConfig cfg;
    apply_config(cfg, parse_key_values("population = 30\nthreshold = 0.25\nselection = lt\nwbc_class = 2\n"
                                       "partition = none\nedge_tolerance = 1\nmin_variance = 16\nseed = 9\n"));
    CHECK(cfg.de.population_size == 30);
    CHECK(cfg.accept_threshold == 0.25);
    CHECK(cfg.de.selection == SelectionRule::Strict);
    CHECK(cfg.seg.wbc_class == ClassSelector{ClassIndex{2}});
    CHECK(cfg.partition == EdgePartition::None);
    CHECK(cfg.fitness.edge_tolerance == 1);
    CHECK(cfg.seg.min_variance == 16.0);
    CHECK(cfg.de.rng_seed == 9);
    CHECK_THROWS_AS(apply_config(cfg, parse_key_values("colour = red\n")), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, parse_key_values("population = 2\n")), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, parse_key_values("iterations = -1\n")), ConfigError);
    CHECK_THROWS_AS(apply_config(cfg, parse_key_values("threshold = abc\n")), ConfigError);
}

TEST_CASE("report JSON") {
    const Scene scene = three_cells();
    DetectorConfig cfg;
    cfg.de.rng_seed = 4;
    const auto r = detect(scene.image, cfg);
    const auto j = to_json(r);
    for (const char* key : {"ellipses", "rounds", "config", "seed"}) CHECK(j.contains(key));
    CHECK_FALSE(j.contains("wall_time_ms"));
    const auto back = detections_from_json(j);
    REQUIRE(back.size() == r.ellipses.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].ellipse.x0 == r.ellipses[i].ellipse.x0);
        CHECK(back[i].ellipse.theta == r.ellipses[i].ellipse.theta);
    }
    CHECK(round_seed(1, 0) != round_seed(1, 1));
    CHECK(round_seed(1, 2, 0) != round_seed(1, 2, 1));
}
