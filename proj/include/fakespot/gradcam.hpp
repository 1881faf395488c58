#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fakespot/nn/model.hpp"
#include "fakespot/tensor.hpp"

namespace fakespot::gradcam {

/// Feature maps A^k of one conv layer for a single image, with the gradient of
/// the class score with respect to each of them. Both have shape (1, K, h, w).
template <typename T>
struct FeatureMapGradients {
    BasicTensor4<T> activations;
    BasicTensor4<T> gradients;
    std::size_t layer = 0;
};

/// Class score of the single-logit head: the logit z for REAL (1), -z for FAKE (0).
/// Gradients are taken with respect to the post-ReLU activations of conv layer
/// `layer`. `image` must be (1, C, H, W) matching the topology input.
/// Throws std::out_of_range listing the valid layers for a bad index.
template <typename T>
FeatureMapGradients<T> capture_gradients(const nn::ModelTopology& topology, const nn::Parameters<T>& params,
                                         const BasicTensor4<T>& image, int target_class, std::size_t layer);

FeatureMapGradients<float> capture_gradients(const nn::TrainedModel& model, const Tensor4& image, int target_class,
                                             std::size_t layer);

/// ReLU(sum_k alpha_k A^k) with alpha_k the spatial mean of the k-th gradient map.
/// Returns a (1, 1, h, w) map.
template <typename T>
BasicTensor4<T> gradcam_map(const FeatureMapGradients<T>& fg);

/// Min-max scaling to [0, 1]. An all-zero map stays zero; a constant non-zero
/// map becomes all ones.
Tensor4 normalize(const Tensor4& raw);

/// Affine placement of feature-map cells on the input grid: cell i is centred on
/// input pixel scale * i + offset (same along rows and columns).
struct CellGeometry {
    double scale = 1.0;
    double offset = 0.0;
};

/// Placement of conv layer `layer`'s output cells, following every valid
/// convolution (shift by (k - 1) / 2) and 2x2 pooling (scale 2, shift 0.5) below it.
CellGeometry layer_geometry(const nn::ModelTopology& topology, std::size_t layer);

/// normalize() followed by bilinear upsampling to out_size x out_size, clamped to
/// [0, 1]. Output pixel x samples the map at (x - offset) / scale, clamped to the
/// map edge. Without a geometry the map is stretched over the whole output with
/// half-pixel centres.
Tensor4 normalize_upsample(const Tensor4& raw, std::size_t out_size = 32,
                           std::optional<CellGeometry> geometry = std::nullopt);

struct Rgb {
    float r, g, b;
};

/// Three-stop linear ramp: black at 0, red at 0.5, yellow at 1.
Rgb colormap(float heat) noexcept;

/// out = (1 - alpha) * image + alpha * colormap(heat) per pixel. `image` is
/// (1, 3, H, W) and `heat` (1, 1, H, W). Throws std::invalid_argument for alpha
/// outside [0, 1] or mismatched extents.
Tensor4 render_overlay(const Tensor4& image, const Tensor4& heat, float alpha = 0.5f);

/// Colormapped heatmap as a (1, 3, H, W) RGB image.
Tensor4 render_heatmap(const Tensor4& heat);

struct Heatmap {
    Tensor4 raw;         // (1, 1, h, w), non-negative
    Tensor4 normalized;  // (1, 1, h, w) in [0, 1]
    Tensor4 upsampled;   // (1, 1, 32, 32) in [0, 1]
    int target_class = 1;
    std::size_t layer = 0;
};

/// End-to-end map for one image. Without `target_class` the predicted class is explained.
Heatmap explain(const nn::TrainedModel& model, const Tensor4& image, std::optional<int> target_class = std::nullopt,
                std::optional<std::size_t> layer = std::nullopt);

struct ExplainOptions {
    std::optional<std::size_t> layer;  // default: last conv layer
    std::optional<int> target_class;   // default: predicted class
    float alpha = 0.5f;
    std::size_t enlarge = 0;  // >1 also writes <id>.overlay.x<k>.png and <id>.heat.x<k>.png
};

struct ExplainInput {
    Tensor4 image;  // (1, 3, 32, 32)
    std::string source_id;
};

struct ExplainOutcome {
    std::string source_id;
    std::vector<std::filesystem::path> files;
    std::string error;  // empty on success
};

/// Writes `<id>.overlay.png` and `<id>.heat.png` per image into out_dir, where
/// <id> is the source id with every character outside [A-Za-z0-9._-] replaced by
/// '_'. Failures are reported per image and do not stop the batch.
std::vector<ExplainOutcome> explain_batch(const nn::TrainedModel& model, std::span<const ExplainInput> images,
                                          const std::filesystem::path& out_dir, const ExplainOptions& options = {});

std::string file_stem_for(const std::string& source_id);

/// Position (row, col) of the maximum of a (1, 1, h, w) map. Among tied maxima the
/// one nearest the centroid of all tied positions wins (first in row-major order
/// on equal distance), so a flat clamped border does not pin the peak to the edge.
std::pair<std::size_t, std::size_t> argmax(const Tensor4& map);

extern template FeatureMapGradients<float> capture_gradients<float>(const nn::ModelTopology&, const nn::Parameters<float>&,
                                                                    const Tensor4&, int, std::size_t);
extern template FeatureMapGradients<double> capture_gradients<double>(const nn::ModelTopology&,
                                                                      const nn::Parameters<double>&,
                                                                      const BasicTensor4<double>&, int, std::size_t);
extern template Tensor4 gradcam_map<float>(const FeatureMapGradients<float>&);
extern template BasicTensor4<double> gradcam_map<double>(const FeatureMapGradients<double>&);

}  // namespace fakespot::gradcam
