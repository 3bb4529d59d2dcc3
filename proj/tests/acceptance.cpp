// Acceptance run: one PASS/FAIL line per criterion with its runtime.
// Exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "wbcde/de.hpp"
#include "wbcde/fitness.hpp"
#include "wbcde/geometry.hpp"
#include "wbcde/raster.hpp"
#include "wbcde/rng.hpp"
#include "wbcde/segmentation.hpp"
#include "wbcde/synth.hpp"

using namespace wbcde;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok = true;
    std::string detail;
};

int failures = 0;

// Runs `body`, then requires both its verdict and runtime <= limit_ms.
// `prior_ms` adds work measured before the call.
void criterion(const char* name, double limit_ms, const std::function<Outcome()>& body, double prior_ms = 0.0) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double ms = prior_ms + std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    const bool in_time = ms <= limit_ms;
    const bool pass = o.ok && in_time;
    if (!pass) ++failures;
    std::printf("%s  %-34s %10.1f ms (limit %.0f ms)  %s%s\n", pass ? "PASS" : "FAIL", name, ms, limit_ms,
                o.detail.c_str(), in_time ? "" : " [over time limit]");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::string percent(double v) { return fmt("%.2f", v * 100.0); }

Outcome fitness_arithmetic() {
    const FitnessValue v = FitnessValue::from_counts(35, 52);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", v.j);
    const bool ok = v.j == 1.0 - 35.0 / 52.0 && v.matched == 35 && v.n_s == 52 && std::string(buf) == "0.327";
    return {ok, std::string("J = ") + fmt("%.5f", v.j) + " printed " + buf};
}

Outcome conic_round_trip() {
    using std::numbers::pi;
    Rng rng(2024);
    double worst_pos = 0.0, worst_axis = 0.0, worst_theta = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double r_min = 3.0 + 47.0 * rng.uniform();
        const double r_max = r_min * (1.0 + rng.uniform());
        const Ellipse truth{1000.0 * rng.uniform(), 1000.0 * rng.uniform(), r_max, r_min,
                            normalize_orientation(pi * rng.uniform() - pi / 2)};
        const double base = 2.0 * pi * rng.uniform();
        std::array<Point2, 5> pts;
        for (int i = 0; i < 5; ++i) pts[i] = truth.point_at(base + 2.0 * pi * i / 5.0);
        const Ellipse e = ellipse_params(conic_from_5_points(pts));
        worst_pos = std::max({worst_pos, std::abs(e.x0 - truth.x0), std::abs(e.y0 - truth.y0)});
        worst_axis = std::max({worst_axis, std::abs(e.r_max - truth.r_max), std::abs(e.r_min - truth.r_min)});
        worst_theta = std::max(worst_theta, orientation_distance(e.theta, truth.theta));
    }
    const bool ok = worst_pos < 1e-6 && worst_axis < 1e-6 && worst_theta < 1e-6;
    return {ok, fmt("max errors: center %.2e, axes %.2e, theta %.2e", worst_pos, worst_axis, worst_theta)};
}

Outcome raster_oracle_equivalence() {
    int mismatches = 0, cases = 0;
    for (int a = 1; a <= 30; ++a) {
        for (int b = 1; b <= a; ++b) {
            ++cases;
            const auto ps = rasterize_unclipped({0, 0, double(a), double(b), 0});
            const std::set<Pixel> got(ps.points.begin(), ps.points.end());
            if (got.size() != ps.size() || got != testing::raster_oracle(a, b)) ++mismatches;
        }
    }
    return {mismatches == 0, fmt("%.0f axis pairs, %.0f mismatches", cases, mismatches)};
}

Outcome de_monotone_deterministic() {
    SceneSpec spec;
    spec.width = spec.height = 120;
    spec.ellipses = {{{60, 60, 20, 12, 0.5}, 60}};
    const SegmentationConfig seg;
    const EdgeMap em = morphological_edges(wbc_mask(segment(generate(spec).image, seg), seg));
    const FitnessEvaluator ev(em);
    const auto objective = [&](const Candidate& c) { return ev(c); };
    int non_monotone = 0, irreproducible = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        DEConfig cfg;
        cfg.rng_seed = seed;
        const auto a = run(cfg, objective, em.size());
        const auto b = run(cfg, objective, em.size());
        for (std::size_t t = 1; t < a.history.size(); ++t) {
            if (a.history[t] > a.history[t - 1]) {
                ++non_monotone;
                break;
            }
        }
        if (a.history != b.history) ++irreproducible;
    }
    return {non_monotone == 0 && irreproducible == 0,
            fmt("100 runs: %.0f non-monotone, %.0f irreproducible", non_monotone, irreproducible)};
}

struct BenchData {
    BenchResult result;
    std::size_t cells = 0;
    std::size_t cells_in_pairs = 0;
    bool sizes_ok = true;
    bool distractors_ok = true;
    double ms = 0.0;
};

BenchData run_desk_bench() {
    BenchData d;
    const RandomSceneParams params;
    const auto scenes = random_bench_scenes(20, 2024, params);
    for (const auto& s : scenes) {
        const auto n = s.spec.ellipses.size();
        d.sizes_ok = d.sizes_ok && n >= 3 && n <= 6;
        d.distractors_ok = d.distractors_ok && s.spec.distractors == 2;
        std::vector<Ellipse> truth;
        for (const auto& g : s.spec.ellipses) truth.push_back(g.shape);
        std::set<std::size_t> paired;
        for (const auto& [i, j] : overlapping_pairs(truth, s.spec.width, s.spec.height)) {
            paired.insert(i);
            paired.insert(j);
        }
        d.cells += n;
        d.cells_in_pairs += paired.size();
    }
    BenchOptions options;
    options.detector = bench_detector_config(params);
    options.conditions = standard_conditions();
    options.seed = 2024;
    const auto start = Clock::now();
    d.result = run_bench(scenes, options);
    d.ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    std::fputs(format_table(d.result.rows).c_str(), stdout);
    return d;
}

Outcome desk_benchmark(const BenchData& d) {
    const EvalResult& clean = d.result.rows.at(0).result;
    const double pair_share = static_cast<double>(d.cells_in_pairs) / static_cast<double>(d.cells);
    const bool ok = d.sizes_ok && d.distractors_ok && pair_share >= 0.30 && clean.dr >= 0.95 && clean.far <= 0.05;
    return {ok, "DR " + percent(clean.dr) + "%, FAR " + percent(clean.far) + "%, " + std::to_string(d.cells) +
                    " cells, " + percent(pair_share) + "% in overlapping pairs"};
}

Outcome noise_ordering(const BenchData& d) {
    const auto dr = [&](std::size_t i) { return d.result.rows.at(i).result.dr; };
    const double clean = dr(0), sp5 = dr(1), sp10 = dr(2), g5 = dr(3), g10 = dr(4);
    const bool ok = clean >= sp5 && sp5 >= sp10 && clean >= g5 && g5 >= g10 && sp10 >= 0.80 && g10 >= 0.82;
    return {ok, "DR clean " + percent(clean) + ", S&P 5/10% " + percent(sp5) + "/" + percent(sp10) +
                    ", sigma 5/10 " + percent(g5) + "/" + percent(g10)};
}

Outcome morphological_edges_check() {
    BinaryImage block(20, 20);
    for (int y = 5; y < 15; ++y)
        for (int x = 5; x < 15; ++x) block.set(x, y, true);
    const std::size_t ring = morphological_edges(block).size();

    Rng rng(123);
    int violations = 0;
    for (int t = 0; t < 500; ++t) {
        const int w = 3 + static_cast<int>(rng.below(30)), h = 3 + static_cast<int>(rng.below(30));
        const double density = rng.uniform();
        BinaryImage m(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) m.set(x, y, rng.uniform() < density);
        const BinaryImage er = testing::brute_erode(m);
        const EdgeMap em = morphological_edges(m);
        std::size_t expected = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) expected += m.at(x, y) && !er.at(x, y);
        bool bad = em.size() != expected;
        for (const auto& p : em.points()) bad = bad || !m.at(p.x, p.y);
        violations += bad;
    }
    return {ring == 36 && violations == 0, fmt("10x10 ring %.0f pixels, %.0f of 500 masks violate", ring, violations)};
}

Outcome metric_arithmetic() {
    const EvalResult r = EvalResult::from_counts(508, 517, 14);
    const bool ok = percent(r.dr) == "98.26" && percent(r.far) == "2.71";
    return {ok, "DR " + percent(r.dr) + "%, FAR " + percent(r.far) + "%"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "wbcde");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome reproducibility() {
    testing::TempDir dir;
    const Scene scene = generate(random_scene(RandomSceneParams{}, 31));
    save_image(scene.image, dir / "smear.pgm");
    for (const char* out : {"a", "b"}) {
        if (invoke({"detect", (dir / "smear.pgm").string(), (dir / out).string(), "--seed", "7"}) != cli::kExitOk)
            return {false, "detect failed"};
    }
    const std::string ja = slurp(dir / "a" / "report.json"), jb = slurp(dir / "b" / "report.json");
    const std::string pa = slurp(dir / "a" / "overlay.ppm"), pb = slurp(dir / "b" / "overlay.ppm");
    const bool ok = !ja.empty() && !pa.empty() && ja == jb && pa == pb;
    return {ok, fmt("report %.0f bytes, overlay %.0f bytes, identical: ", double(ja.size()), double(pa.size())) +
                    (ok ? "yes" : "no")};
}

}  // namespace

int main() {
    criterion("fitness arithmetic (35 of 52)", 1.0, fitness_arithmetic);
    criterion("conic round-trip", 1000.0, conic_round_trip);
    criterion("raster oracle equivalence", 10000.0, raster_oracle_equivalence);
    criterion("DE monotonicity and determinism", 30000.0, de_monotone_deterministic);

    std::puts("running 20-scene benchmark (5 conditions)...");
    const BenchData bench = run_desk_bench();
    // Both criteria come from the same run; each is held to the full run time.
    criterion("desk-scale detection benchmark", 5 * 60000.0, [&] { return desk_benchmark(bench); }, bench.ms);
    criterion("noise robustness ordering", 15 * 60000.0, [&] { return noise_ordering(bench); }, bench.ms);

    criterion("morphological edge correctness", 1000.0, morphological_edges_check);
    criterion("metric arithmetic", 1.0, metric_arithmetic);
    criterion("reproducibility", 60000.0, reproducibility);

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
