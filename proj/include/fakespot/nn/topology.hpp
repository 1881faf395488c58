#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace fakespot::nn {

struct ConvLayerSpec {
    std::size_t filters = 32;
    std::size_t kernel_h = 3;
    std::size_t kernel_w = 3;
    std::size_t stride = 1;  // only stride 1 is supported

    friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

struct DenseLayerSpec {
    std::size_t units = 64;

    friend bool operator==(const DenseLayerSpec&, const DenseLayerSpec&) = default;
};

/// Spatial extents of one conv stage as the input flows through it.
struct ConvStageGeometry {
    std::size_t in_channels, in_h, in_w;
    std::size_t out_h, out_w;    // after the convolution
    std::size_t pool_h, pool_w;  // after pooling (equal to out_* when pooling is off)
};

/// Declarative network description: conv(+ReLU)(+2x2 max-pool) stages, flatten,
/// ReLU dense layers, and one sigmoid output unit.
///
/// Textual descriptor, used in checkpoints and on the command line:
///
///     in=3x32x32;conv=32@3x3,32@3x3;pool=max2;dense=64
///
/// `pool` is `max2` or `none`; `dense=` may be empty (flatten feeds the output).
struct ModelTopology {
    std::size_t input_channels = 3;
    std::size_t input_h = 32;
    std::size_t input_w = 32;
    std::vector<ConvLayerSpec> conv_layers;
    bool pool_after_each_conv = true;
    std::vector<DenseLayerSpec> dense_layers;

    /// Throws std::invalid_argument when any stage would shrink below 1x1.
    void validate() const;

    std::vector<ConvStageGeometry> conv_geometry() const;

    /// Length of the flattened feature vector entering the dense head.
    std::size_t flat_features() const;

    /// Trainable scalars (weights + biases) including the output unit.
    std::size_t parameter_count() const;

    std::string descriptor() const;
    static ModelTopology parse(const std::string& descriptor);

    friend bool operator==(const ModelTopology&, const ModelTopology&) = default;
};

/// Valid stride-1 convolution output extent: (h - M + 1, w - N + 1).
/// Throws std::invalid_argument when the kernel exceeds the input.
std::pair<std::size_t, std::size_t> output_shape(std::size_t h, std::size_t w, std::size_t kernel_h,
                                                 std::size_t kernel_w);

/// 2x2 stride-2 pooling extent; odd trailing rows/columns are dropped.
constexpr std::pair<std::size_t, std::size_t> pooled_shape(std::size_t h, std::size_t w) noexcept
{
    return {h / 2, w / 2};
}

/// Convenience builder: `layers` identical conv layers followed by `dense` hidden layers.
ModelTopology make_topology(std::size_t filters, std::size_t conv_layers,
                            std::vector<std::size_t> dense_units = {}, std::size_t kernel = 3);

}  // namespace fakespot::nn
