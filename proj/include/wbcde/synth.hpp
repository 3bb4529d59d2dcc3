#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbcde/detector.hpp"
#include "wbcde/geometry.hpp"
#include "wbcde/imaging.hpp"

namespace wbcde {

struct GroundTruthEllipse {
    Ellipse shape;
    std::uint8_t fill = 60;
};

struct SceneSpec {
    int width = 256;
    int height = 256;
    std::vector<GroundTruthEllipse> ellipses;
    std::uint8_t background = 210;
    /// Dark non-elliptical blobs (crosses and triangles) at `distractor_fill`.
    std::size_t distractors = 0;
    std::uint8_t distractor_fill = 60;
    /// Mid-intensity round blobs standing in for red cells.
    std::size_t red_cells = 0;
    std::uint8_t red_cell_fill = 140;
    /// Ellipses may overlap each other when set.
    bool allow_overlap = true;
    /// Radial boundary jitter as a fraction of r_min (at most 0.1).
    double deform = 0.0;
    double min_axis = 3.0;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct Scene {
    GrayImage image;
    std::vector<Ellipse> truth;
};

/// Renders the scene. Distractors and red cells are placed by rejection
/// sampling; each gets 100 attempts before GenerationError.
Scene generate(const SceneSpec& spec);

/// Knobs for drawing random scene specs.
struct RandomSceneParams {
    int width = 300;
    int height = 300;
    std::size_t min_cells = 3;
    std::size_t max_cells = 6;
    double min_radius = 14.0;
    double max_radius = 24.0;
    double max_eccentricity_ratio = 1.6;  // r_max / r_min
    /// Probability that a new cell is placed overlapping an earlier one.
    double overlap_probability = 0.4;
    /// Upper bound on the shared area of an overlapping pair, as a fraction
    /// of the smaller cell.
    double max_overlap_fraction = 0.06;
    std::size_t distractors = 2;
    std::size_t red_cells = 4;
    double deform = 0.0;
};

/// Random scene spec. Throws GenerationError when a cell cannot be placed
/// in 100 attempts.
SceneSpec random_scene(const RandomSceneParams& params, std::uint64_t seed);

/// Detector settings used for benchmarking on scenes drawn from `params`:
/// diffusion and a variance floor of 64 in segmentation, one pixel of edge
/// tolerance, J* = 0.2, four restarts per round and a minimum axis of 80%
/// of the smallest possible minor radius. DE parameters stay at their
/// defaults.
DetectorConfig bench_detector_config(const RandomSceneParams& params = {});

/// Indices (i, j), i < j, of truth ellipses whose filled masks intersect.
std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(const std::vector<Ellipse>& truth,
                                                                   int width, int height);

enum class NoiseKind { SaltPepper, Gaussian };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::SaltPepper;
    /// Density p for salt & pepper, sigma in intensity units for Gaussian.
    double level = 0.0;
    std::uint64_t rng_seed = 1;

    void validate() const;
    std::string label() const;
};

NoiseKind parse_noise_kind(const std::string& s);
std::string to_string(NoiseKind k);

/// Salt & pepper replaces each pixel with probability p by 0 or 255 with
/// equal odds. Gaussian adds N(0, sigma^2), rounds and clamps.
GrayImage add_noise(const GrayImage& img, const NoiseSpec& spec);

/// Clean, salt & pepper 5% and 10%, Gaussian sigma 5 and 10.
std::vector<NoiseSpec> standard_conditions();

/// Filled-pixel mask of an ellipse over a frame (pixel centers tested
/// against the implicit inequality).
BinaryImage fill_mask(const Ellipse& e, int width, int height);

/// Per-pixel intersection over union of two ellipse masks.
double mask_iou(const Ellipse& a, const Ellipse& b, int width, int height);

struct MatchEntry {
    std::size_t detection = 0;
    std::size_t truth = 0;
    double iou = 0.0;
};

struct EvalResult {
    std::size_t ground_truth = 0;
    std::size_t detected = 0;
    std::size_t missing = 0;
    std::size_t false_alarms = 0;
    double dr = 0.0;
    double far = 0.0;
    std::vector<MatchEntry> matches;

    /// DR = detected / truth, FAR = false_alarms / truth.
    static EvalResult from_counts(std::size_t detected, std::size_t ground_truth, std::size_t false_alarms);
    EvalResult& operator+=(const EvalResult& other);
};

/// Greedy one-to-one matching by descending IoU (ties: lower detection
/// index, then lower truth index). A pair matches when IoU >= threshold.
EvalResult evaluate(const std::vector<Ellipse>& detections, const std::vector<Ellipse>& truth,
                    int width, int height, double iou_threshold = 0.5);
EvalResult evaluate(const DetectionReport& report, const std::vector<Ellipse>& truth,
                    int width, int height, double iou_threshold = 0.5);

nlohmann::json to_json(const EvalResult& r);

struct TableRow {
    std::string condition;
    EvalResult result;
};

struct BenchScene {
    std::string name;
    SceneSpec spec;
};

struct BenchOptions {
    DetectorConfig detector;
    std::vector<NoiseSpec> conditions = standard_conditions();
    std::uint64_t seed = 1;
    double iou_threshold = 0.5;
};

struct BenchSceneResult {
    std::string scene;
    std::string condition;
    EvalResult result;
};

struct BenchResult {
    /// One aggregate row per condition, in the order given.
    std::vector<TableRow> rows;
    std::vector<BenchSceneResult> scenes;
};

/// Scene i uses detector seed derive_seed(seed, i) under every condition;
/// its noise for condition c is seeded with derive_seed(derive_seed(seed, i), c + 1).
BenchResult run_bench(const std::vector<BenchScene>& scenes, const BenchOptions& options);

/// `count` scenes from random_scene(params, derive_seed(seed, i)), named scene_000, scene_001, ...
std::vector<BenchScene> random_bench_scenes(std::size_t count, std::uint64_t seed,
                                            const RandomSceneParams& params = {});

nlohmann::json to_json(const BenchResult& r);

/// Aligned text table: condition, detected, missing, false alarms, DR, FAR.
std::string format_table(const std::vector<TableRow>& rows);

/// key=value text form ('#' starts a comment). Ellipses are written as
/// "ellipse = x0 y0 r_max r_min theta fill", one per line.
std::string to_text(const SceneSpec& spec);
SceneSpec scene_from_text(const std::string& text);
SceneSpec load_scene(const std::filesystem::path& path);

std::string to_text(const NoiseSpec& spec);
NoiseSpec noise_from_text(const std::string& text);

nlohmann::json truth_to_json(const std::vector<Ellipse>& truth, int width, int height);

}  // namespace wbcde
