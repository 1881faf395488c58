#include "fakespot/nn/parameters.hpp"

#include <algorithm>
#include <cmath>

namespace fakespot::nn {

template <typename T>
Parameters<T> zero_parameters(const ModelTopology& topology)
{
    const auto stages = topology.conv_geometry();
    Parameters<T> p;
    for (std::size_t i = 0; i < topology.conv_layers.size(); ++i) {
        const auto& l = topology.conv_layers[i];
        p.conv.push_back({BasicTensor4<T>({l.filters, stages[i].in_channels, l.kernel_h, l.kernel_w}),
                          BasicTensor4<T>({l.filters, 1, 1, 1})});
    }
    std::size_t in = topology.flat_features();
    for (const auto& d : topology.dense_layers) {
        p.dense.push_back({BasicTensor4<T>({d.units, in, 1, 1}), BasicTensor4<T>({d.units, 1, 1, 1})});
        in = d.units;
    }
    p.dense.push_back({BasicTensor4<T>({1, in, 1, 1}), BasicTensor4<T>({1, 1, 1, 1})});
    return p;
}

template <typename T>
bool same_shapes(const Parameters<T>& a, const Parameters<T>& b)
{
    const auto ta = a.tensors();
    const auto tb = b.tensors();
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (!(ta[i]->shape() == tb[i]->shape())) return false;
    }
    return true;
}

std::vector<std::size_t> fan_ins(const ModelTopology& topology)
{
    std::vector<std::size_t> out;
    const auto stages = topology.conv_geometry();
    for (std::size_t i = 0; i < topology.conv_layers.size(); ++i) {
        const auto& l = topology.conv_layers[i];
        out.push_back(stages[i].in_channels * l.kernel_h * l.kernel_w);
    }
    std::size_t in = topology.flat_features();
    for (const auto& d : topology.dense_layers) {
        out.push_back(in);
        in = d.units;
    }
    out.push_back(in);
    return out;
}

Parameters<float> init_parameters(const ModelTopology& topology, SeededRng& rng)
{
    topology.validate();
    auto p = zero_parameters<float>(topology);
    const auto fans = fan_ins(topology);
    std::size_t layer = 0;
    auto fill = [&](LayerParams<float>& l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fans[layer++]));
        // Largest float not exceeding the bound; float rounding of a draw must not escape it.
        float limit = static_cast<float>(bound);
        if (limit > bound) limit = std::nextafter(limit, 0.0f);
        for (float& w : l.weight.data()) {
            const auto v = static_cast<float>(rng.uniform(-bound, bound));
            w = std::clamp(v, -limit, limit);
        }
    };
    for (auto& l : p.conv) fill(l);
    for (auto& l : p.dense) fill(l);
    return p;
}

template Parameters<float> zero_parameters<float>(const ModelTopology&);
template Parameters<double> zero_parameters<double>(const ModelTopology&);
template bool same_shapes<float>(const Parameters<float>&, const Parameters<float>&);
template bool same_shapes<double>(const Parameters<double>&, const Parameters<double>&);

}  // namespace fakespot::nn
