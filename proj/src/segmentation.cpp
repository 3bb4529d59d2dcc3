#include "wbcde/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include "wbcde/error.hpp"
#include "wbcde/rng.hpp"

namespace wbcde {

namespace {

constexpr int kLevels = 256;

using Histogram = std::array<double, kLevels>;

struct Component {
    double mean;
    double var;
    double weight;
};

// log of weight * N(v; mean, var)
double log_density(const Component& c, double v) {
    const double d = v - c.mean;
    return std::log(c.weight) - 0.5 * std::log(2.0 * std::numbers::pi * c.var) - d * d / (2.0 * c.var);
}

// Posterior over components at intensity v, summing to 1.
void posterior(const std::vector<Component>& comps, double v, std::vector<double>& out) {
    out.resize(comps.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < comps.size(); ++k) {
        out[k] = comps[k].weight > 0.0 ? log_density(comps[k], v) : -std::numeric_limits<double>::infinity();
        mx = std::max(mx, out[k]);
    }
    double sum = 0.0;
    for (auto& p : out) {
        p = std::exp(p - mx);
        sum += p;
    }
    for (auto& p : out) p /= sum;
}

// Initial means at evenly spaced ranks among the occupied intensity levels,
// ignoring how many pixels each level holds. A dominant background level
// then claims one class instead of all of them.
std::vector<double> support_means(const Histogram& hist, std::size_t k_classes) {
    std::vector<int> levels;
    for (int v = 0; v < kLevels; ++v)
        if (hist[v] > 0.0) levels.push_back(v);
    const double last = static_cast<double>(levels.size() - 1);
    std::vector<double> means;
    for (std::size_t k = 0; k < k_classes; ++k) {
        const double q = static_cast<double>(2 * k + 1) / static_cast<double>(2 * k_classes);
        means.push_back(levels[static_cast<std::size_t>(std::lround(q * last))]);
    }
    return means;
}

}  // namespace

void SegmentationConfig::validate() const {
    if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
    if (num_classes > 255) throw ConfigError("num_classes must be at most 255");
    if (!(min_variance > 0.0)) throw ConfigError("min_variance must be positive");
    if (em_iterations < 1) throw ConfigError("em_iterations must be at least 1");
    if (!(diffusion_lambda >= 0.0 && diffusion_lambda <= 0.25)) throw ConfigError("diffusion_lambda must lie in [0, 0.25]");
    if (const auto* idx = std::get_if<ClassIndex>(&wbc_class); idx && idx->index >= num_classes) {
        throw ConfigError("wbc_class index " + std::to_string(idx->index) + " out of range");
    }
}

GrayImage diffuse(const GrayImage& img, std::size_t steps, double lambda) {
    if (steps == 0) return img;
    const int w = img.width(), h = img.height();
    std::vector<double> cur(img.pixels().begin(), img.pixels().end()), next(cur.size());
    auto at = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return cur[static_cast<std::size_t>(y) * w + x];
    };
    for (std::size_t s = 0; s < steps; ++s) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double c = at(x, y);
                const double lap = at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4.0 * c;
                next[static_cast<std::size_t>(y) * w + x] = c + lambda * lap;
            }
        }
        std::swap(cur, next);
    }
    std::vector<std::uint8_t> out(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i)
        out[i] = static_cast<std::uint8_t>(std::clamp(std::round(cur[i]), 0.0, 255.0));
    return GrayImage(w, h, std::move(out));
}

ClassMap segment(const GrayImage& input, const SegmentationConfig& cfg) {
    cfg.validate();
    if (input.empty()) throw std::invalid_argument("segment: empty image");
    const GrayImage img = diffuse(input, cfg.diffusion_steps, cfg.diffusion_lambda);
    const std::size_t K = cfg.num_classes;

    Histogram hist{};
    for (auto v : img.pixels()) hist[v] += 1.0;
    const double total = static_cast<double>(img.pixels().size());

    ClassMap out;
    out.width = img.width();
    out.height = img.height();
    out.labels.assign(img.pixels().size(), 0);

    const auto distinct = std::count_if(hist.begin(), hist.end(), [](double c) { return c > 0.0; });
    if (distinct <= 1) {
        const double v = static_cast<double>(img.pixels()[0]);
        out.class_means.assign(K, v);
        out.class_variances.assign(K, 0.0);
        out.class_weights.assign(K, 0.0);
        out.class_weights[0] = 1.0;
        out.degenerate = true;
        return out;
    }

    std::vector<double> init = support_means(hist, K);
    Rng rng(cfg.rng_seed);
    for (std::size_t k = 1; k < K; ++k) {
        if (init[k] <= init[k - 1]) {
            init[k] = init[k - 1] + (rng.below(2) == 0 ? 1.0 : -1.0);
            if (init[k] <= init[k - 1]) init[k] = init[k - 1] + 1.0;
        }
    }

    // Each class starts with the spread of the levels nearest its mean. A
    // shared global variance lets close classes absorb each other.
    std::vector<double> cnt(K, 0.0), ss(K, 0.0);
    for (int v = 0; v < kLevels; ++v) {
        if (hist[v] == 0.0) continue;
        std::size_t k = 0;
        for (std::size_t j = 1; j < K; ++j)
            if (std::abs(v - init[j]) < std::abs(v - init[k])) k = j;
        cnt[k] += hist[v];
        ss[k] += hist[v] * (v - init[k]) * (v - init[k]);
    }
    std::vector<Component> comps(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double var = cnt[k] > 0.0 ? ss[k] / cnt[k] : 0.0;
        comps[k] = {init[k], std::max(var, cfg.min_variance), 1.0 / static_cast<double>(K)};
    }

    std::vector<double> resp;
    std::vector<double> nk(K), sum1(K), sum2(K);
    for (std::size_t it = 0; it < cfg.em_iterations; ++it) {
        std::fill(nk.begin(), nk.end(), 0.0);
        std::fill(sum1.begin(), sum1.end(), 0.0);
        for (int v = 0; v < kLevels; ++v) {
            if (hist[v] == 0.0) continue;
            posterior(comps, v, resp);
            for (std::size_t k = 0; k < K; ++k) {
                nk[k] += hist[v] * resp[k];
                sum1[k] += hist[v] * resp[k] * v;
            }
        }
        std::vector<double> mu(K);
        for (std::size_t k = 0; k < K; ++k) mu[k] = nk[k] > 0.0 ? sum1[k] / nk[k] : comps[k].mean;
        std::fill(sum2.begin(), sum2.end(), 0.0);
        for (int v = 0; v < kLevels; ++v) {
            if (hist[v] == 0.0) continue;
            posterior(comps, v, resp);
            for (std::size_t k = 0; k < K; ++k) sum2[k] += hist[v] * resp[k] * (v - mu[k]) * (v - mu[k]);
        }
        for (std::size_t k = 0; k < K; ++k) {
            // empty components keep their previous parameters
            if (nk[k] <= 1e-9 * total) continue;
            comps[k].mean = mu[k];
            comps[k].var = std::max(sum2[k] / nk[k], cfg.min_variance);
            comps[k].weight = nk[k] / total;
        }
    }

    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return comps[l].mean < comps[r].mean; });
    std::vector<Component> sorted;
    for (auto k : order) sorted.push_back(comps[k]);
    for (const auto& c : sorted) {
        out.class_means.push_back(c.mean);
        out.class_variances.push_back(c.var);
        out.class_weights.push_back(c.weight);
    }

    std::array<std::uint8_t, kLevels> lut{};
    for (int v = 0; v < kLevels; ++v) {
        posterior(sorted, v, resp);
        std::size_t best = 0;
        for (std::size_t k = 1; k < K; ++k)
            if (resp[k] > resp[best]) best = k;
        lut[v] = static_cast<std::uint8_t>(best);
    }
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) out.labels[i] = lut[px[i]];
    return out;
}

BinaryImage wbc_mask(const ClassMap& cmap, const SegmentationConfig& cfg) {
    std::size_t cls = 0;
    if (const auto* idx = std::get_if<ClassIndex>(&cfg.wbc_class)) {
        if (idx->index >= cmap.class_means.size()) {
            throw ConfigError("wbc_class index " + std::to_string(idx->index) + " out of range");
        }
        cls = idx->index;
    }
    BinaryImage out(cmap.width, cmap.height);
    // a single-intensity image has no foreground class
    if (cmap.degenerate) return out;
    for (int y = 0; y < cmap.height; ++y)
        for (int x = 0; x < cmap.width; ++x) out.set(x, y, cmap.label(x, y) == cls);
    return out;
}

GrayImage label_image(const ClassMap& cmap) {
    const auto K = std::max<std::size_t>(cmap.class_means.size(), 2);
    GrayImage out(cmap.width, cmap.height);
    for (int y = 0; y < cmap.height; ++y)
        for (int x = 0; x < cmap.width; ++x)
            out.set(x, y, static_cast<std::uint8_t>(cmap.label(x, y) * 255 / (K - 1)));
    return out;
}

BinaryImage erode3x3(const BinaryImage& mask) {
    BinaryImage out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            bool all = true;
            for (int dy = -1; dy <= 1 && all; ++dy)
                for (int dx = -1; dx <= 1 && all; ++dx) all = mask.at(x + dx, y + dy);
            out.set(x, y, all);
        }
    }
    return out;
}

EdgeMap morphological_edges(const BinaryImage& mask) {
    if (mask.width() < 3 || mask.height() < 3) throw std::invalid_argument("morphological_edges: mask smaller than 3x3");
    const BinaryImage eroded = erode3x3(mask);
    BinaryImage edges(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) edges.set(x, y, mask.at(x, y) && !eroded.at(x, y));
    return EdgeMap(edges);
}

}  // namespace wbcde
