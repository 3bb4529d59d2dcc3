#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "wbcde/geometry.hpp"
#include "wbcde/imaging.hpp"

namespace wbcde {

/// Picks the class with the lowest fitted mean.
struct LowestMean {
    friend bool operator==(const LowestMean&, const LowestMean&) = default;
};

/// Picks a fixed class index (classes are ordered by ascending mean).
struct ClassIndex {
    std::size_t index = 0;
    friend bool operator==(const ClassIndex&, const ClassIndex&) = default;
};

using ClassSelector = std::variant<LowestMean, ClassIndex>;

struct SegmentationConfig {
    std::size_t num_classes = 3;
    std::size_t em_iterations = 10;
    std::size_t diffusion_steps = 0;
    double diffusion_lambda = 0.1;
    // Lower bound on each class variance during EM.
    double min_variance = 0.5;
    ClassSelector wbc_class = LowestMean{};
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct ClassMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;
    /// Ascending; labels index into this.
    std::vector<double> class_means;
    std::vector<double> class_variances;
    std::vector<double> class_weights;
    /// Set when the input has a single intensity; labels are all zero.
    bool degenerate = false;

    std::uint8_t label(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

/// Explicit heat diffusion: I += lambda * laplacian(I), 4-neighbour stencil,
/// replicated borders, rounded back to 8 bits after the last step.
GrayImage diffuse(const GrayImage& img, std::size_t steps, double lambda);

/// Gaussian-mixture EM over the intensity histogram, optionally preceded by
/// diffusion. Each pixel gets the class of maximum posterior; ties go to
/// the lower class index.
ClassMap segment(const GrayImage& img, const SegmentationConfig& cfg);

/// True where the pixel carries the selected class. Throws ConfigError
/// when a ClassIndex selector is out of range.
BinaryImage wbc_mask(const ClassMap& cmap, const SegmentationConfig& cfg);

/// Label image for inspection: class k is written as k * 255 / (K - 1).
GrayImage label_image(const ClassMap& cmap);

/// 3x3 erosion with out-of-frame treated as false.
BinaryImage erode3x3(const BinaryImage& mask);

/// mask AND NOT erode3x3(mask). Requires a frame of at least 3x3.
EdgeMap morphological_edges(const BinaryImage& mask);

}  // namespace wbcde
