#pragma once

#include <cstddef>
#include <vector>

#include "fakespot/nn/topology.hpp"
#include "fakespot/rng.hpp"
#include "fakespot/tensor.hpp"

namespace fakespot::nn {

/// Weight and bias of one layer.
///
/// Conv: weight (filters, in_channels, M, N), bias (filters, 1, 1, 1).
/// Dense: weight (units, in_features, 1, 1), bias (units, 1, 1, 1).
template <typename T>
struct LayerParams {
    BasicTensor4<T> weight;
    BasicTensor4<T> bias;

    friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// All trainable tensors of a network. `dense` ends with the sigmoid output unit.
template <typename T>
struct Parameters {
    std::vector<LayerParams<T>> conv;
    std::vector<LayerParams<T>> dense;

    /// Every tensor in canonical order: conv layers (weight, bias), then dense layers.
    std::vector<BasicTensor4<T>*> tensors()
    {
        std::vector<BasicTensor4<T>*> out;
        for (auto& l : conv) out.insert(out.end(), {&l.weight, &l.bias});
        for (auto& l : dense) out.insert(out.end(), {&l.weight, &l.bias});
        return out;
    }
    std::vector<const BasicTensor4<T>*> tensors() const
    {
        std::vector<const BasicTensor4<T>*> out;
        for (const auto& l : conv) out.insert(out.end(), {&l.weight, &l.bias});
        for (const auto& l : dense) out.insert(out.end(), {&l.weight, &l.bias});
        return out;
    }

    std::size_t scalar_count() const
    {
        std::size_t n = 0;
        for (const auto* t : tensors()) n += t->size();
        return n;
    }

    template <typename U>
    Parameters<U> cast() const
    {
        Parameters<U> out;
        for (const auto& l : conv) out.conv.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
        for (const auto& l : dense) out.dense.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
        return out;
    }

    friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Zero-filled parameters shaped for `topology`.
template <typename T>
Parameters<T> zero_parameters(const ModelTopology& topology);

template <typename T>
bool same_shapes(const Parameters<T>& a, const Parameters<T>& b);

/// He-uniform weights in [-sqrt(6/fan_in), sqrt(6/fan_in)] and zero biases, drawn
/// layer by layer in canonical tensor order.
Parameters<float> init_parameters(const ModelTopology& topology, SeededRng& rng);

/// Fan-in of every layer in canonical order (conv: C*M*N, dense: in_features).
std::vector<std::size_t> fan_ins(const ModelTopology& topology);

extern template Parameters<float> zero_parameters<float>(const ModelTopology&);
extern template Parameters<double> zero_parameters<double>(const ModelTopology&);
extern template bool same_shapes<float>(const Parameters<float>&, const Parameters<float>&);
extern template bool same_shapes<double>(const Parameters<double>&, const Parameters<double>&);

}  // namespace fakespot::nn
