#include "wbcde/detector.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>

#include "wbcde/error.hpp"
#include "wbcde/rng.hpp"

namespace wbcde {

void DetectorConfig::validate() const {
    de.validate();
    seg.validate();
    if (!(accept_threshold > 0.0 && accept_threshold < 1.0)) throw ConfigError("accept threshold must lie in (0, 1)");
    if (max_ellipses < 1) throw ConfigError("max_ellipses must be at least 1");
    if (suppression_radius < 1) throw ConfigError("suppression_radius must be at least 1");
    if (!(min_axis >= 0.0)) throw ConfigError("min_axis must be non-negative");
    if (fitness.edge_tolerance < 0) throw ConfigError("edge_tolerance must be non-negative");
}

std::uint64_t round_seed(std::uint64_t master, std::size_t round, std::size_t attempt) noexcept {
    return derive_seed(master, (static_cast<std::uint64_t>(round) << 16) | attempt);
}

BinaryImage suppression_mask(const EdgeMap& em, const Ellipse& e, int radius) {
    BinaryImage out(em.width(), em.height());
    const auto perimeter = rasterize_unclipped(e);
    for (const auto& p : perimeter.points) {
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                const int x = p.x + dx, y = p.y + dy;
                if (out.contains(x, y) && em.contains(x, y)) out.set(x, y, true);
            }
        }
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::vector<EdgeMap> edge_components(const EdgeMap& em) {
    const int w = em.width(), h = em.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::vector<Pixel>> comps;
    std::vector<Pixel> stack;
    for (const auto& seed : em.points()) {
        if (label[static_cast<std::size_t>(seed.y) * w + seed.x] >= 0) continue;
        const int id = static_cast<int>(comps.size());
        comps.emplace_back();
        stack.push_back(seed);
        label[static_cast<std::size_t>(seed.y) * w + seed.x] = id;
        while (!stack.empty()) {
            const Pixel p = stack.back();
            stack.pop_back();
            comps.back().push_back(p);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = p.x + dx, y = p.y + dy;
                    if (!em.contains(x, y)) continue;
                    auto& l = label[static_cast<std::size_t>(y) * w + x];
                    if (l >= 0) continue;
                    l = id;
                    stack.push_back({x, y});
                }
            }
        }
    }
    // comps are created in row-major order of their first pixel
    std::vector<std::size_t> order(comps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return comps[l].size() > comps[r].size(); });
    std::vector<EdgeMap> out;
    out.reserve(comps.size());
    for (auto i : order) {
        BinaryImage mask(w, h);
        for (const auto& p : comps[i]) mask.set(p.x, p.y, true);
        out.emplace_back(mask);
    }
    return out;
}

namespace {

// Peels ellipses off one edge map until a round fails. Returns false when
// the global ellipse budget is exhausted.
bool peel(EdgeMap working, const DetectorConfig& cfg, std::size_t& round, DetectionReport& report) {
    while (report.ellipses.size() < cfg.max_ellipses) {
        if (working.size() < Candidate::kGenes) return true;
        const FitnessEvaluator evaluator(working, cfg.fitness);
        const Objective objective = [&evaluator](const Candidate& c) { return evaluator(c); };

        std::optional<Detection> accepted;
        for (std::size_t attempt = 0; attempt <= cfg.round_restarts && !accepted; ++attempt) {
            DEConfig de = cfg.de;
            de.rng_seed = round_seed(cfg.de.rng_seed, round, attempt);
            const DEResult result = run(de, objective, working.size());
            ++report.rounds;
            report.history.push_back(result.history);
            if (result.fitness.j > cfg.accept_threshold) continue;
            const auto ellipse = decode(result.best, working);
            if (!ellipse || ellipse->r_min < cfg.min_axis) continue;
            accepted = Detection{*ellipse, result.fitness};
        }
        ++round;
        if (!accepted) return true;
        report.ellipses.push_back(*accepted);
        working = working.without(suppression_mask(working, accepted->ellipse, cfg.suppression_radius));
    }
    return false;
}

}  // namespace

DetectionReport detect_on_edges(const EdgeMap& em, const DetectorConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    if (em.size() < Candidate::kGenes) {
        throw InsufficientEdges("edge map has " + std::to_string(em.size()) + " pixels, need at least 5");
    }

    DetectionReport report;
    report.config = cfg;
    report.seed = cfg.de.rng_seed;
    report.edge_count = em.size();

    std::size_t round = 0;
    if (cfg.partition == EdgePartition::None) {
        peel(em, cfg, round, report);
    } else {
        for (const auto& component : edge_components(em)) {
            if (component.size() < Candidate::kGenes) break;
            if (!peel(component, cfg, round, report)) break;
        }
    }
    report.diagnostic = report.ellipses.size() >= cfg.max_ellipses ? "max_ellipses reached" : "search exhausted";
    report.wall_time_ms = elapsed_ms(start);
    return report;
}

DetectionReport detect(const GrayImage& img, const DetectorConfig& cfg) {
    cfg.validate();
    if (img.width() < 16 || img.height() < 16) throw std::invalid_argument("detect: image must be at least 16x16");
    const auto start = Clock::now();
    const ClassMap cmap = segment(img, cfg.seg);
    const EdgeMap edges = morphological_edges(wbc_mask(cmap, cfg.seg));
    if (edges.size() < Candidate::kGenes) {
        DetectionReport report;
        report.config = cfg;
        report.seed = cfg.de.rng_seed;
        report.edge_count = edges.size();
        report.diagnostic = cmap.degenerate ? "single-intensity image; no foreground class"
                                            : "insufficient edge pixels after preprocessing";
        report.wall_time_ms = elapsed_ms(start);
        return report;
    }
    DetectionReport report = detect_on_edges(edges, cfg);
    report.wall_time_ms = elapsed_ms(start);
    return report;
}

nlohmann::json to_json(const DetectorConfig& cfg) {
    nlohmann::json seg_class;
    if (const auto* idx = std::get_if<ClassIndex>(&cfg.seg.wbc_class)) {
        seg_class = idx->index;
    } else {
        seg_class = "lowest-mean";
    }
    return {
        {"population", cfg.de.population_size},
        {"factor", cfg.de.mutation_factor},
        {"crossover", cfg.de.crossover_rate},
        {"iterations", cfg.de.iterations},
        {"selection", cfg.de.selection == SelectionRule::LessOrEqual ? "le" : "lt"},
        {"threshold", cfg.accept_threshold},
        {"max_ellipses", cfg.max_ellipses},
        {"suppression_radius", cfg.suppression_radius},
        {"min_axis", cfg.min_axis},
        {"round_restarts", cfg.round_restarts},
        {"partition", cfg.partition == EdgePartition::None ? "none" : "components"},
        {"edge_tolerance", cfg.fitness.edge_tolerance},
        {"max_radius", cfg.fitness.max_radius},
        {"num_classes", cfg.seg.num_classes},
        {"em_iterations", cfg.seg.em_iterations},
        {"diffusion_steps", cfg.seg.diffusion_steps},
        {"diffusion_lambda", cfg.seg.diffusion_lambda},
        {"min_variance", cfg.seg.min_variance},
        {"wbc_class", seg_class},
        {"seg_seed", cfg.seg.rng_seed},
    };
}

void apply_config(DetectorConfig& cfg, const KeyValues& kv) {
    auto count = [](const std::string& k, const std::string& v) {
        const long long n = parse_int(k, v);
        if (n < 0) throw ConfigError(k + ": must be non-negative");
        return static_cast<std::size_t>(n);
    };
    for (const auto& [key, value] : kv) {
        if (key == "population") {
            cfg.de.population_size = count(key, value);
        } else if (key == "factor") {
            cfg.de.mutation_factor = parse_double(key, value);
        } else if (key == "crossover") {
            cfg.de.crossover_rate = parse_double(key, value);
        } else if (key == "iterations") {
            cfg.de.iterations = count(key, value);
        } else if (key == "selection") {
            if (value == "le") {
                cfg.de.selection = SelectionRule::LessOrEqual;
            } else if (value == "lt") {
                cfg.de.selection = SelectionRule::Strict;
            } else {
                throw ConfigError("selection: expected le or lt, got '" + value + "'");
            }
        } else if (key == "seed") {
            cfg.de.rng_seed = parse_u64(key, value);
        } else if (key == "threshold") {
            cfg.accept_threshold = parse_double(key, value);
        } else if (key == "max_ellipses") {
            cfg.max_ellipses = count(key, value);
        } else if (key == "suppression_radius") {
            cfg.suppression_radius = static_cast<int>(parse_int(key, value));
        } else if (key == "min_axis") {
            cfg.min_axis = parse_double(key, value);
        } else if (key == "round_restarts") {
            cfg.round_restarts = count(key, value);
        } else if (key == "partition") {
            if (value == "none") {
                cfg.partition = EdgePartition::None;
            } else if (value == "components") {
                cfg.partition = EdgePartition::Components;
            } else {
                throw ConfigError("partition: expected none or components, got '" + value + "'");
            }
        } else if (key == "edge_tolerance") {
            cfg.fitness.edge_tolerance = static_cast<int>(parse_int(key, value));
        } else if (key == "max_radius") {
            cfg.fitness.max_radius = parse_double(key, value);
        } else if (key == "num_classes") {
            cfg.seg.num_classes = count(key, value);
        } else if (key == "em_iterations") {
            cfg.seg.em_iterations = count(key, value);
        } else if (key == "diffusion_steps") {
            cfg.seg.diffusion_steps = count(key, value);
        } else if (key == "diffusion_lambda") {
            cfg.seg.diffusion_lambda = parse_double(key, value);
        } else if (key == "min_variance") {
            cfg.seg.min_variance = parse_double(key, value);
        } else if (key == "wbc_class") {
            if (value == "lowest-mean") {
                cfg.seg.wbc_class = LowestMean{};
            } else {
                cfg.seg.wbc_class = ClassIndex{count(key, value)};
            }
        } else if (key == "seg_seed") {
            cfg.seg.rng_seed = parse_u64(key, value);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

nlohmann::json to_json(const Ellipse& e) {
    return {{"x0", e.x0}, {"y0", e.y0}, {"r_max", e.r_max}, {"r_min", e.r_min}, {"theta", e.theta}};
}

nlohmann::json to_json(const DetectionReport& report) {
    nlohmann::json ellipses = nlohmann::json::array();
    for (const auto& d : report.ellipses) {
        auto j = to_json(d.ellipse);
        j["j"] = d.fitness.j;
        j["matched"] = d.fitness.matched;
        j["n_s"] = d.fitness.n_s;
        ellipses.push_back(std::move(j));
    }
    return {
        {"ellipses", std::move(ellipses)},
        {"seed", report.seed},
        {"rng", std::string(kRngAlgorithm)},
        {"config", to_json(report.config)},
        {"rounds", report.rounds},
        {"history", report.history},
        {"edge_count", report.edge_count},
        {"diagnostic", report.diagnostic},
    };
}

std::vector<Detection> detections_from_json(const nlohmann::json& j) {
    std::vector<Detection> out;
    for (const auto& e : j.at("ellipses")) {
        Detection d;
        d.ellipse = {e.at("x0").get<double>(), e.at("y0").get<double>(), e.at("r_max").get<double>(),
                     e.at("r_min").get<double>(), e.at("theta").get<double>()};
        d.fitness.j = e.at("j").get<double>();
        d.fitness.matched = e.value("matched", std::size_t{0});
        d.fitness.n_s = e.value("n_s", std::size_t{0});
        out.push_back(d);
    }
    return out;
}

}  // namespace wbcde
