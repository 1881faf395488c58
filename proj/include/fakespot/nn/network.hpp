#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fakespot/nn/layers.hpp"
#include "fakespot/nn/parameters.hpp"
#include "fakespot/nn/topology.hpp"

namespace fakespot::nn {

/// Everything the backward pass and Grad-CAM need from one forward call.
template <typename T>
struct ForwardCache {
    struct ConvStage {
        BasicTensor4<T> input;
        BasicTensor4<T> activation;  // post-ReLU feature maps A^k
        std::vector<std::size_t> pool_argmax;
        bool pooled = false;
    };

    std::vector<ConvStage> conv;
    std::vector<BasicTensor4<T>> dense_inputs;       // one per dense layer, output unit last
    std::vector<BasicTensor4<T>> dense_activations;  // post-ReLU outputs of hidden dense layers
    std::vector<T> logits;
    std::size_t batch = 0;
};

template <typename T>
struct ForwardResult {
    std::vector<T> probabilities;
    ForwardCache<T> cache;
};

/// Runs the network on an (n, C, H, W) batch matching the topology's input.
template <typename T>
ForwardResult<T> forward(const ModelTopology& topology, const Parameters<T>& params, const BasicTensor4<T>& batch);

template <typename T>
struct Backprop {
    Parameters<T> grads;
    /// d(objective)/d(post-ReLU activation) of every conv layer; only filled on request.
    std::vector<BasicTensor4<T>> activation_grads;
};

/// Chain rule from per-item logit gradients back through every layer.
template <typename T>
Backprop<T> backpropagate(const ModelTopology& topology, const Parameters<T>& params, const ForwardCache<T>& cache,
                          std::span<const T> logit_grads, bool keep_activation_grads = false);

/// Gradient of the mean binary cross-entropy over the batch, using the fused
/// sigmoid/BCE logit gradient (p - y) / n.
template <typename T>
Parameters<T> backward(const ModelTopology& topology, const Parameters<T>& params, const ForwardResult<T>& result,
                       std::span<const T> labels);

/// Logits obtained by resuming the forward pass from the post-ReLU activation of
/// conv layer `layer` (before its pooling).
template <typename T>
std::vector<T> logits_from_activation(const ModelTopology& topology, const Parameters<T>& params, std::size_t layer,
                                      const BasicTensor4<T>& activation);

/// Mean clamped BCE of probabilities against 0/1 labels, accumulated in double.
template <typename T>
double mean_bce(std::span<const T> probabilities, std::span<const T> labels);

#define FAKESPOT_DECLARE_NETWORK(T)                                                                              \
    extern template ForwardResult<T> forward<T>(const ModelTopology&, const Parameters<T>&, const BasicTensor4<T>&); \
    extern template Backprop<T> backpropagate<T>(const ModelTopology&, const Parameters<T>&, const ForwardCache<T>&, \
                                                 std::span<const T>, bool);                                        \
    extern template Parameters<T> backward<T>(const ModelTopology&, const Parameters<T>&, const ForwardResult<T>&,  \
                                              std::span<const T>);                                                 \
    extern template std::vector<T> logits_from_activation<T>(const ModelTopology&, const Parameters<T>&,            \
                                                             std::size_t, const BasicTensor4<T>&);                  \
    extern template double mean_bce<T>(std::span<const T>, std::span<const T>);

FAKESPOT_DECLARE_NETWORK(float)
FAKESPOT_DECLARE_NETWORK(double)
#undef FAKESPOT_DECLARE_NETWORK

}  // namespace fakespot::nn
