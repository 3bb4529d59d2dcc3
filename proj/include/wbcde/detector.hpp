#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbcde/config.hpp"
#include "wbcde/de.hpp"
#include "wbcde/geometry.hpp"
#include "wbcde/segmentation.hpp"

namespace wbcde {

/// How the edge map is split before peeling.
enum class EdgePartition {
    None,        // one search over the whole edge map
    Components,  // one search per 8-connected component, largest first
};

struct DetectorConfig {
    DEConfig de;
    SegmentationConfig seg;
    double accept_threshold = 0.30;
    std::size_t max_ellipses = 12;
    int suppression_radius = 2;
    double min_axis = 3.0;
    /// Extra DE runs tried before a round is declared a failure.
    std::size_t round_restarts = 0;
    EdgePartition partition = EdgePartition::Components;
    FitnessOptions fitness;

    void validate() const;
};

struct Detection {
    Ellipse ellipse;
    FitnessValue fitness;
};

struct DetectionReport {
    std::vector<Detection> ellipses;
    std::size_t rounds = 0;
    DetectorConfig config;
    std::uint64_t seed = 0;
    /// Best-J history of every DE run, in execution order.
    std::vector<std::vector<double>> history;
    std::size_t edge_count = 0;
    std::string diagnostic;
    double wall_time_ms = 0.0;
};

/// Seed of DE run `attempt` in detection round `round`.
std::uint64_t round_seed(std::uint64_t master, std::size_t round, std::size_t attempt = 0) noexcept;

/// Pixels of `em` within Chebyshev distance `radius` of the perimeter of `e`.
BinaryImage suppression_mask(const EdgeMap& em, const Ellipse& e, int radius);

/// 8-connected components of an edge map, largest first (ties broken by
/// the row-major position of their first pixel).
std::vector<EdgeMap> edge_components(const EdgeMap& em);

/// Repeated detect-and-suppress on an edge map. Throws InsufficientEdges
/// when the map has fewer than five pixels.
DetectionReport detect_on_edges(const EdgeMap& em, const DetectorConfig& cfg);

/// Segmentation, edge extraction, then detect_on_edges. Images that leave
/// fewer than five edge pixels produce an empty report with a diagnostic.
DetectionReport detect(const GrayImage& img, const DetectorConfig& cfg);

nlohmann::json to_json(const DetectorConfig& cfg);

/// Overrides fields of `cfg` from key=value pairs, using the key names of
/// to_json(DetectorConfig) plus `seed` for the DE seed. Later keys win.
/// Throws ConfigError on unknown keys or bad values; the result is validated.
void apply_config(DetectorConfig& cfg, const KeyValues& kv);
nlohmann::json to_json(const Ellipse& e);
/// Deterministic part of the report; wall time is excluded.
nlohmann::json to_json(const DetectionReport& report);

/// Ellipses of a serialized report.
std::vector<Detection> detections_from_json(const nlohmann::json& j);

}  // namespace wbcde
