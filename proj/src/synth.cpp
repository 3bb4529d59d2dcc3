#include "wbcde/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wbcde/config.hpp"
#include "wbcde/error.hpp"
#include "wbcde/rng.hpp"

namespace wbcde {

namespace {

constexpr int kPlacementAttempts = 100;
constexpr double kPi = std::numbers::pi;

struct Box {
    int x0, y0, x1, y1;  // inclusive
};

// Axis-aligned bounding box of an ellipse, clipped to the frame.
Box bounds(const Ellipse& e, int width, int height, double grow = 0.0) {
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    const double hx = std::sqrt(e.r_max * e.r_max * c * c + e.r_min * e.r_min * s * s) + grow;
    const double hy = std::sqrt(e.r_max * e.r_max * s * s + e.r_min * e.r_min * c * c) + grow;
    return {std::max(0, static_cast<int>(std::floor(e.x0 - hx)) - 1),
            std::max(0, static_cast<int>(std::floor(e.y0 - hy)) - 1),
            std::min(width - 1, static_cast<int>(std::ceil(e.x0 + hx)) + 1),
            std::min(height - 1, static_cast<int>(std::ceil(e.y0 + hy)) + 1)};
}

bool fits_frame(const Ellipse& e, int width, int height, double margin) {
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    const double hx = std::sqrt(e.r_max * e.r_max * c * c + e.r_min * e.r_min * s * s);
    const double hy = std::sqrt(e.r_max * e.r_max * s * s + e.r_min * e.r_min * c * c);
    return e.x0 - hx >= margin && e.y0 - hy >= margin && e.x0 + hx <= width - 1 - margin &&
           e.y0 + hy <= height - 1 - margin;
}

std::size_t intersection_count(const Ellipse& a, const Ellipse& b, int width, int height) {
    const Box ba = bounds(a, width, height), bb = bounds(b, width, height);
    const int x0 = std::max(ba.x0, bb.x0), x1 = std::min(ba.x1, bb.x1);
    const int y0 = std::max(ba.y0, bb.y0), y1 = std::min(ba.y1, bb.y1);
    std::size_t n = 0;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) n += (a.contains(x, y) && b.contains(x, y)) ? 1 : 0;
    return n;
}

// Gap check between two shapes grown by `gap` pixels.
bool separated(const Ellipse& a, const Ellipse& b, double gap, int width, int height) {
    Ellipse ga = a, gb = b;
    ga.r_max += gap / 2.0;
    ga.r_min += gap / 2.0;
    gb.r_max += gap / 2.0;
    gb.r_min += gap / 2.0;
    return intersection_count(ga, gb, width, height) == 0;
}

// Polar radius of an ellipse along direction phi.
double polar_radius(const Ellipse& e, double phi) {
    const double d = phi - e.theta;
    const double c = std::cos(d) / e.r_max, s = std::sin(d) / e.r_min;
    return 1.0 / std::sqrt(c * c + s * s);
}

// Smooth radial jitter, bounded by `amplitude` in normalized radius units.
struct Jitter {
    std::array<double, 3> amp{};
    std::array<double, 3> phase{};

    double at(double phi) const {
        double v = 0.0;
        for (std::size_t k = 0; k < amp.size(); ++k) v += amp[k] * std::cos(static_cast<double>(k + 2) * phi + phase[k]);
        return v;
    }
};

Jitter make_jitter(double amplitude, Rng& rng) {
    Jitter j;
    double budget = amplitude;
    for (std::size_t k = 0; k < j.amp.size(); ++k) {
        j.amp[k] = budget * (k + 1 == j.amp.size() ? 1.0 : rng.uniform());
        budget -= j.amp[k];
        j.phase[k] = 2.0 * kPi * rng.uniform();
    }
    return j;
}

void paint_ellipse(GrayImage& img, const Ellipse& e, std::uint8_t fill, const Jitter* jitter) {
    const double grow = jitter ? e.r_max * 0.15 : 0.0;
    const Box b = bounds(e, img.width(), img.height(), grow);
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    for (int y = b.y0; y <= b.y1; ++y) {
        for (int x = b.x0; x <= b.x1; ++x) {
            const double dx = x - e.x0, dy = y - e.y0;
            const double u = (dx * c + dy * s) / e.r_max;
            const double v = (-dx * s + dy * c) / e.r_min;
            const double rho = std::sqrt(u * u + v * v);
            const double limit = jitter ? 1.0 + jitter->at(std::atan2(v, u)) : 1.0;
            if (rho <= limit) img.set(x, y, fill);
        }
    }
}

// Distractor geometry: a plus-shaped cross or a triangle, in a local frame.
struct Blob {
    enum class Kind { Cross, Triangle } kind;
    double cx, cy, size, angle;

    bool contains(double x, double y) const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double u = (x - cx) * c + (y - cy) * s;
        const double v = -(x - cx) * s + (y - cy) * c;
        if (kind == Kind::Cross) {
            const double arm = size, half = size * 0.22;
            return (std::abs(u) <= arm && std::abs(v) <= half) || (std::abs(v) <= arm && std::abs(u) <= half);
        }
        // equilateral triangle with circumradius `size`
        for (int k = 0; k < 3; ++k) {
            const double a = 2.0 * kPi * k / 3.0;
            if (u * std::cos(a) + v * std::sin(a) > size * 0.5) return false;
        }
        return true;
    }

    Ellipse hull() const { return {cx, cy, size + 1.0, size + 1.0, 0.0}; }
};

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

void SceneSpec::validate() const {
    if (width < 16 || height < 16) throw ConfigError("scene frame must be at least 16x16");
    if (!(deform >= 0.0 && deform <= 0.1)) throw ConfigError("deform must lie in [0, 0.1]");
    for (const auto& gt : ellipses) {
        const auto& e = gt.shape;
        if (!(e.r_min >= min_axis) || !(e.r_max >= e.r_min)) throw ConfigError("scene ellipse axes below min_axis");
        if (!fits_frame(e, width, height, 0.0)) throw ConfigError("scene ellipse extends outside the frame");
    }
}

Scene generate(const SceneSpec& spec) {
    spec.validate();
    Rng rng(spec.rng_seed);
    Scene scene{GrayImage(spec.width, spec.height, spec.background), {}};
    const int w = spec.width, h = spec.height;

    std::vector<Ellipse> occupied;
    for (const auto& gt : spec.ellipses) occupied.push_back(gt.shape);

    // red cells first, so everything else paints over them
    std::vector<Ellipse> reds;
    for (std::size_t i = 0; i < spec.red_cells; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
            const double r = 7.0 + 4.0 * rng.uniform();
            const Ellipse e{r + 2.0 + rng.uniform() * (w - 2 * r - 4.0), r + 2.0 + rng.uniform() * (h - 2 * r - 4.0),
                            r, r, 0.0};
            if (!fits_frame(e, w, h, 1.0)) continue;
            bool clear = true;
            for (const auto& o : occupied) clear = clear && separated(e, o, 4.0, w, h);
            for (const auto& o : reds) clear = clear && separated(e, o, 2.0, w, h);
            if (!clear) continue;
            reds.push_back(e);
            placed = true;
        }
        if (!placed) throw GenerationError("could not place red cell " + std::to_string(i));
    }
    for (const auto& e : reds) paint_ellipse(scene.image, e, spec.red_cell_fill, nullptr);

    for (std::size_t i = 0; i < spec.distractors; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
            const double size = 9.0 + 6.0 * rng.uniform();
            const Blob blob{i % 2 == 0 ? Blob::Kind::Cross : Blob::Kind::Triangle,
                            size + 2.0 + rng.uniform() * (w - 2 * size - 4.0),
                            size + 2.0 + rng.uniform() * (h - 2 * size - 4.0), size, rng.uniform() * kPi};
            const Ellipse hull = blob.hull();
            if (!fits_frame(hull, w, h, 1.0)) continue;
            bool clear = true;
            for (const auto& o : occupied) clear = clear && separated(hull, o, 4.0, w, h);
            if (!clear) continue;
            occupied.push_back(hull);
            const Box b = bounds(hull, w, h);
            for (int y = b.y0; y <= b.y1; ++y)
                for (int x = b.x0; x <= b.x1; ++x)
                    if (blob.contains(x, y)) scene.image.set(x, y, spec.distractor_fill);
            placed = true;
        }
        if (!placed) throw GenerationError("could not place distractor " + std::to_string(i));
    }

    for (const auto& gt : spec.ellipses) {
        if (spec.deform > 0.0) {
            const Jitter j = make_jitter(spec.deform * gt.shape.r_min / gt.shape.r_max, rng);
            paint_ellipse(scene.image, gt.shape, gt.fill, &j);
        } else {
            paint_ellipse(scene.image, gt.shape, gt.fill, nullptr);
        }
        scene.truth.push_back(gt.shape);
    }
    return scene;
}

SceneSpec random_scene(const RandomSceneParams& p, std::uint64_t seed) {
    Rng rng(seed);
    SceneSpec spec;
    spec.width = p.width;
    spec.height = p.height;
    spec.distractors = p.distractors;
    spec.red_cells = p.red_cells;
    spec.deform = p.deform;
    spec.rng_seed = derive_seed(seed, 1);

    const std::size_t n = p.min_cells + rng.below(p.max_cells - p.min_cells + 1);
    std::vector<Ellipse> cells;
    std::vector<bool> paired;

    // Overlaps are kept pairwise: a new cell may touch one unpaired cell and
    // must keep a gap to every other cell.
    auto try_place = [&](bool overlap) {
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
            Ellipse e;
            e.r_max = p.min_radius + (p.max_radius - p.min_radius) * rng.uniform();
            e.r_min = std::max(e.r_max / (1.0 + (p.max_eccentricity_ratio - 1.0) * rng.uniform()), spec.min_axis);
            e.theta = normalize_orientation(kPi * rng.uniform() - kPi / 2.0);
            std::size_t partner = cells.size();
            if (overlap) {
                std::vector<std::size_t> free;
                for (std::size_t k = 0; k < cells.size(); ++k)
                    if (!paired[k]) free.push_back(k);
                if (free.empty()) return false;
                partner = free[rng.below(free.size())];
                const double phi = 2.0 * kPi * rng.uniform();
                const double d = (polar_radius(cells[partner], phi) + polar_radius(e, phi + kPi)) *
                                 (0.80 + 0.15 * rng.uniform());
                e.x0 = cells[partner].x0 + d * std::cos(phi);
                e.y0 = cells[partner].y0 + d * std::sin(phi);
            } else {
                e.x0 = e.r_max + 2.0 + rng.uniform() * (p.width - 2.0 * e.r_max - 4.0);
                e.y0 = e.r_max + 2.0 + rng.uniform() * (p.height - 2.0 * e.r_max - 4.0);
            }
            if (!fits_frame(e, p.width, p.height, 2.0)) continue;
            bool ok = true;
            for (std::size_t k = 0; k < cells.size() && ok; ++k) {
                if (k == partner) {
                    const auto inter = static_cast<double>(intersection_count(e, cells[k], p.width, p.height));
                    const double smaller = std::min(e.area(), cells[k].area());
                    ok = inter > 0.0 && inter <= p.max_overlap_fraction * smaller;
                } else {
                    ok = separated(e, cells[k], 6.0, p.width, p.height);
                }
            }
            if (!ok) continue;
            const bool has_partner = partner < cells.size();
            if (has_partner) paired[partner] = true;
            cells.push_back(e);
            paired.push_back(has_partner);
            return true;
        }
        return false;
    };

    for (std::size_t i = 0; i < n; ++i) {
        const bool want_overlap = !cells.empty() && rng.uniform() < p.overlap_probability;
        if (want_overlap && try_place(true)) continue;
        if (!try_place(false)) throw GenerationError("could not place cell " + std::to_string(i));
    }
    for (const auto& c : cells) spec.ellipses.push_back({c, static_cast<std::uint8_t>(50 + rng.below(21))});
    return spec;
}

}  // namespace wbcde

namespace wbcde {

std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(const std::vector<Ellipse>& truth, int width,
                                                                   int height) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < truth.size(); ++i)
        for (std::size_t j = i + 1; j < truth.size(); ++j)
            if (intersection_count(truth[i], truth[j], width, height) > 0) out.emplace_back(i, j);
    return out;
}

void NoiseSpec::validate() const {
    if (kind == NoiseKind::SaltPepper && !(level >= 0.0 && level <= 1.0)) {
        throw ConfigError("salt & pepper density must lie in [0, 1]");
    }
    if (kind == NoiseKind::Gaussian && !(level >= 0.0)) throw ConfigError("gaussian sigma must be non-negative");
}

DetectorConfig bench_detector_config(const RandomSceneParams& params) {
    DetectorConfig cfg;
    cfg.seg.diffusion_steps = 6;
    cfg.seg.min_variance = 64.0;
    cfg.fitness.edge_tolerance = 1;
    cfg.accept_threshold = 0.2;
    cfg.round_restarts = 4;
    cfg.min_axis = 0.8 * params.min_radius / params.max_eccentricity_ratio;
    return cfg;
}

std::string NoiseSpec::label() const {
    if (level == 0.0) return "clean";
    char buf[64];
    if (kind == NoiseKind::SaltPepper) {
        std::snprintf(buf, sizeof buf, "salt&pepper %g%%", level * 100.0);
    } else {
        std::snprintf(buf, sizeof buf, "gaussian sigma=%g", level);
    }
    return buf;
}

NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "salt_pepper" || s == "sp" || s == "salt-pepper") return NoiseKind::SaltPepper;
    if (s == "gaussian" || s == "gauss") return NoiseKind::Gaussian;
    throw ConfigError("unknown noise kind '" + s + "'");
}

std::string to_string(NoiseKind k) { return k == NoiseKind::SaltPepper ? "salt_pepper" : "gaussian"; }

std::vector<NoiseSpec> standard_conditions() {
    return {{NoiseKind::SaltPepper, 0.0, 0},
            {NoiseKind::SaltPepper, 0.05, 0},
            {NoiseKind::SaltPepper, 0.10, 0},
            {NoiseKind::Gaussian, 5.0, 0},
            {NoiseKind::Gaussian, 10.0, 0}};
}

GrayImage add_noise(const GrayImage& img, const NoiseSpec& spec) {
    spec.validate();
    GrayImage out = img;
    Rng rng(spec.rng_seed);
    auto px = out.pixels();
    if (spec.kind == NoiseKind::SaltPepper) {
        for (auto& v : px) {
            if (rng.uniform() < spec.level) v = rng.uniform() < 0.5 ? 0 : 255;
        }
    } else {
        for (auto& v : px) {
            const double n = static_cast<double>(v) + spec.level * rng.normal();
            v = static_cast<std::uint8_t>(std::clamp(std::round(n), 0.0, 255.0));
        }
    }
    return out;
}

BinaryImage fill_mask(const Ellipse& e, int width, int height) {
    BinaryImage out(width, height);
    const Box b = bounds(e, width, height);
    for (int y = b.y0; y <= b.y1; ++y)
        for (int x = b.x0; x <= b.x1; ++x)
            if (e.contains(x, y)) out.set(x, y, true);
    return out;
}

double mask_iou(const Ellipse& a, const Ellipse& b, int width, int height) {
    const Box ba = bounds(a, width, height), bb = bounds(b, width, height);
    const int x0 = std::min(ba.x0, bb.x0), x1 = std::max(ba.x1, bb.x1);
    const int y0 = std::min(ba.y0, bb.y0), y1 = std::max(ba.y1, bb.y1);
    std::size_t inter = 0, uni = 0;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const bool in_a = a.contains(x, y), in_b = b.contains(x, y);
            inter += (in_a && in_b) ? 1 : 0;
            uni += (in_a || in_b) ? 1 : 0;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

EvalResult EvalResult::from_counts(std::size_t detected, std::size_t ground_truth, std::size_t false_alarms) {
    if (detected > ground_truth) throw std::invalid_argument("detected exceeds ground truth");
    EvalResult r;
    r.ground_truth = ground_truth;
    r.detected = detected;
    r.missing = ground_truth - detected;
    r.false_alarms = false_alarms;
    if (ground_truth > 0) {
        r.dr = static_cast<double>(detected) / static_cast<double>(ground_truth);
        r.far = static_cast<double>(false_alarms) / static_cast<double>(ground_truth);
    }
    return r;
}

EvalResult& EvalResult::operator+=(const EvalResult& other) {
    auto sum = from_counts(detected + other.detected, ground_truth + other.ground_truth,
                           false_alarms + other.false_alarms);
    sum.matches = std::move(matches);
    *this = std::move(sum);
    return *this;
}

EvalResult evaluate(const std::vector<Ellipse>& detections, const std::vector<Ellipse>& truth, int width, int height,
                    double iou_threshold) {
    std::vector<MatchEntry> candidates;
    for (std::size_t d = 0; d < detections.size(); ++d) {
        for (std::size_t t = 0; t < truth.size(); ++t) {
            const double iou = mask_iou(detections[d], truth[t], width, height);
            if (iou >= iou_threshold) candidates.push_back({d, t, iou});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const MatchEntry& l, const MatchEntry& r) {
        if (l.iou != r.iou) return l.iou > r.iou;
        if (l.detection != r.detection) return l.detection < r.detection;
        return l.truth < r.truth;
    });
    std::vector<bool> det_used(detections.size()), truth_used(truth.size());
    std::vector<MatchEntry> matches;
    for (const auto& c : candidates) {
        if (det_used[c.detection] || truth_used[c.truth]) continue;
        det_used[c.detection] = truth_used[c.truth] = true;
        matches.push_back(c);
    }
    auto r = EvalResult::from_counts(matches.size(), truth.size(), detections.size() - matches.size());
    r.matches = std::move(matches);
    return r;
}

EvalResult evaluate(const DetectionReport& report, const std::vector<Ellipse>& truth, int width, int height,
                    double iou_threshold) {
    std::vector<Ellipse> dets;
    for (const auto& d : report.ellipses) dets.push_back(d.ellipse);
    return evaluate(dets, truth, width, height, iou_threshold);
}

nlohmann::json to_json(const EvalResult& r) {
    nlohmann::json matches = nlohmann::json::array();
    for (const auto& m : r.matches) matches.push_back({{"detection", m.detection}, {"truth", m.truth}, {"iou", m.iou}});
    return {{"ground_truth", r.ground_truth}, {"detected", r.detected}, {"missing", r.missing},
            {"false_alarms", r.false_alarms}, {"DR", r.dr},         {"FAR", r.far},
            {"matches", std::move(matches)}};
}

BenchResult run_bench(const std::vector<BenchScene>& scenes, const BenchOptions& options) {
    options.detector.validate();
    BenchResult out;
    std::vector<EvalResult> totals(options.conditions.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const auto& bs = scenes[i];
        const Scene scene = generate(bs.spec);
        const std::uint64_t scene_seed = derive_seed(options.seed, i);
        for (std::size_t c = 0; c < options.conditions.size(); ++c) {
            NoiseSpec noise = options.conditions[c];
            noise.rng_seed = derive_seed(scene_seed, c + 1);
            const GrayImage img = noise.level > 0.0 ? add_noise(scene.image, noise) : scene.image;
            DetectorConfig cfg = options.detector;
            cfg.de.rng_seed = scene_seed;
            const DetectionReport report = detect(img, cfg);
            EvalResult r = evaluate(report, scene.truth, bs.spec.width, bs.spec.height, options.iou_threshold);
            totals[c] += r;
            out.scenes.push_back({bs.name, noise.label(), std::move(r)});
        }
    }
    for (std::size_t c = 0; c < options.conditions.size(); ++c) {
        out.rows.push_back({options.conditions[c].label(), totals[c]});
    }
    return out;
}

std::vector<BenchScene> random_bench_scenes(std::size_t count, std::uint64_t seed, const RandomSceneParams& params) {
    std::vector<BenchScene> scenes;
    scenes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%03zu", i);
        scenes.push_back({name, random_scene(params, derive_seed(seed, i))});
    }
    return scenes;
}

nlohmann::json to_json(const BenchResult& r) {
    nlohmann::json conditions = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json j = to_json(row.result);
        j.erase("matches");
        j["condition"] = row.condition;
        conditions.push_back(std::move(j));
    }
    nlohmann::json scenes = nlohmann::json::array();
    for (const auto& s : r.scenes) {
        nlohmann::json j = to_json(s.result);
        j["scene"] = s.scene;
        j["condition"] = s.condition;
        scenes.push_back(std::move(j));
    }
    return {{"conditions", conditions}, {"scenes", scenes}};
}

std::string format_table(const std::vector<TableRow>& rows) {
    std::size_t width = std::string("Condition").size();
    for (const auto& row : rows) width = std::max(width, row.condition.size());
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %8s  %12s  %8s  %8s\n", static_cast<int>(width), "Condition",
                  "Truth", "Detected", "Missing", "False alarms", "DR", "FAR");
    out << buf;
    for (const auto& row : rows) {
        const auto& r = row.result;
        std::snprintf(buf, sizeof buf, "%-*s  %8zu  %8zu  %8zu  %12zu  %7.2f%%  %7.2f%%\n", static_cast<int>(width),
                      row.condition.c_str(), r.ground_truth, r.detected, r.missing, r.false_alarms, r.dr * 100.0,
                      r.far * 100.0);
        out << buf;
    }
    return out.str();
}

std::string to_text(const SceneSpec& spec) {
    std::ostringstream out;
    out << "# synthetic smear scene\n";
    out << "width = " << spec.width << "\n";
    out << "height = " << spec.height << "\n";
    out << "background = " << int(spec.background) << "\n";
    out << "distractors = " << spec.distractors << "\n";
    out << "distractor_fill = " << int(spec.distractor_fill) << "\n";
    out << "red_cells = " << spec.red_cells << "\n";
    out << "red_cell_fill = " << int(spec.red_cell_fill) << "\n";
    out << "allow_overlap = " << (spec.allow_overlap ? "true" : "false") << "\n";
    out << "deform = " << format_double(spec.deform) << "\n";
    out << "min_axis = " << format_double(spec.min_axis) << "\n";
    out << "seed = " << spec.rng_seed << "\n";
    out << "# ellipse = x0 y0 r_max r_min theta fill\n";
    for (const auto& gt : spec.ellipses) {
        const auto& e = gt.shape;
        out << "ellipse = " << format_double(e.x0) << ' ' << format_double(e.y0) << ' ' << format_double(e.r_max)
            << ' ' << format_double(e.r_min) << ' ' << format_double(e.theta) << ' ' << int(gt.fill) << "\n";
    }
    return out.str();
}

namespace {

std::uint8_t parse_intensity(const std::string& key, const std::string& value) {
    const auto v = parse_int(key, value);
    if (v < 0 || v > 255) throw ConfigError("'" + key + "' must lie in [0, 255]");
    return static_cast<std::uint8_t>(v);
}

}  // namespace

SceneSpec scene_from_text(const std::string& text) {
    SceneSpec spec;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "width") {
            spec.width = static_cast<int>(parse_int(key, value));
        } else if (key == "height") {
            spec.height = static_cast<int>(parse_int(key, value));
        } else if (key == "background") {
            spec.background = parse_intensity(key, value);
        } else if (key == "distractors") {
            spec.distractors = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "distractor_fill") {
            spec.distractor_fill = parse_intensity(key, value);
        } else if (key == "red_cells") {
            spec.red_cells = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "red_cell_fill") {
            spec.red_cell_fill = parse_intensity(key, value);
        } else if (key == "allow_overlap") {
            spec.allow_overlap = parse_bool(key, value);
        } else if (key == "deform") {
            spec.deform = parse_double(key, value);
        } else if (key == "min_axis") {
            spec.min_axis = parse_double(key, value);
        } else if (key == "seed") {
            spec.rng_seed = parse_u64(key, value);
        } else if (key == "ellipse") {
            std::istringstream in(value);
            std::array<std::string, 6> f;
            for (auto& tok : f)
                if (!(in >> tok)) throw FormatError("ellipse needs: x0 y0 r_max r_min theta fill");
            GroundTruthEllipse gt;
            gt.shape = {parse_double(key, f[0]), parse_double(key, f[1]), parse_double(key, f[2]),
                        parse_double(key, f[3]), normalize_orientation(parse_double(key, f[4]))};
            gt.fill = parse_intensity(key, f[5]);
            spec.ellipses.push_back(gt);
        } else {
            throw ConfigError("unknown scene key '" + key + "'");
        }
    }
    spec.validate();
    if (!spec.allow_overlap && !overlapping_pairs([&] {
            std::vector<Ellipse> v;
            for (const auto& gt : spec.ellipses) v.push_back(gt.shape);
            return v;
        }(), spec.width, spec.height).empty()) {
        throw ConfigError("scene has overlapping ellipses but allow_overlap is false");
    }
    return spec;
}

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return scene_from_text(ss.str());
}

std::string to_text(const NoiseSpec& spec) {
    return "kind = " + to_string(spec.kind) + "\nlevel = " + format_double(spec.level) +
           "\nseed = " + std::to_string(spec.rng_seed) + "\n";
}

NoiseSpec noise_from_text(const std::string& text) {
    NoiseSpec spec;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "kind") {
            spec.kind = parse_noise_kind(value);
        } else if (key == "level") {
            spec.level = parse_double(key, value);
        } else if (key == "seed") {
            spec.rng_seed = parse_u64(key, value);
        } else {
            throw ConfigError("unknown noise key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

nlohmann::json truth_to_json(const std::vector<Ellipse>& truth, int width, int height) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : truth) list.push_back(to_json(e));
    return {{"width", width}, {"height", height}, {"ellipses", std::move(list)}};
}

}  // namespace wbcde
