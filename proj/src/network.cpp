#include "fakespot/nn/network.hpp"

#include <stdexcept>

namespace fakespot::nn {

namespace {

// Every tensor must have the shape zero_parameters(topology) would give it.
template <typename T>
void check_params(const ModelTopology& topology, const Parameters<T>& params)
{
    bool ok = params.conv.size() == topology.conv_layers.size() && params.dense.size() == topology.dense_layers.size() + 1;
    if (ok) {
        const auto geometry = topology.conv_geometry();
        for (std::size_t l = 0; l < params.conv.size() && ok; ++l) {
            const auto& spec = topology.conv_layers[l];
            ok = params.conv[l].weight.shape() == Shape4{spec.filters, geometry[l].in_channels, spec.kernel_h, spec.kernel_w} &&
                 params.conv[l].bias.shape() == Shape4{spec.filters, 1, 1, 1};
        }
        std::size_t in = topology.flat_features();
        for (std::size_t l = 0; l < params.dense.size() && ok; ++l) {
            const std::size_t units = l < topology.dense_layers.size() ? topology.dense_layers[l].units : 1;
            ok = params.dense[l].weight.shape() == Shape4{units, in, 1, 1} && params.dense[l].bias.shape() == Shape4{units, 1, 1, 1};
            in = units;
        }
    }
    if (!ok) throw std::invalid_argument("network: parameters do not match topology " + topology.descriptor());
}

template <typename T>
void relu_inplace(BasicTensor4<T>& t)
{
    for (T& v : t.data()) v = v > T(0) ? v : T(0);
}

// Forward from conv stage `first` (whose input is `x`) to the logits. When
// `cache` is non-null every intermediate needed by backpropagation is kept.
template <typename T>
std::vector<T> run(const ModelTopology& topology, const Parameters<T>& params, std::size_t first, BasicTensor4<T> x,
                   ForwardCache<T>* cache)
{
    for (std::size_t l = first; l < params.conv.size(); ++l) {
        auto a = conv2d_forward(x, params.conv[l].weight, params.conv[l].bias);
        relu_inplace(a);
        typename ForwardCache<T>::ConvStage stage;
        BasicTensor4<T> next;
        if (topology.pool_after_each_conv) {
            auto pooled = maxpool2(a);
            next = std::move(pooled.output);
            stage.pool_argmax = std::move(pooled.argmax);
            stage.pooled = true;
        } else {
            next = a;
        }
        if (cache) {
            stage.input = std::move(x);
            stage.activation = std::move(a);
            cache->conv.push_back(std::move(stage));
        }
        x = std::move(next);
    }
    const std::size_t n = x.shape().n;
    x = x.reshaped({n, x.shape().item_size(), 1, 1});
    for (std::size_t l = 0; l + 1 < params.dense.size(); ++l) {
        auto z = dense_forward(x, params.dense[l].weight, params.dense[l].bias);
        relu_inplace(z);
        if (cache) {
            cache->dense_inputs.push_back(std::move(x));
            cache->dense_activations.push_back(z);
        }
        x = std::move(z);
    }
    const auto& out = params.dense.back();
    auto z = dense_forward(x, out.weight, out.bias);
    if (cache) cache->dense_inputs.push_back(std::move(x));
    return z.values();
}

}  // namespace

template <typename T>
ForwardResult<T> forward(const ModelTopology& topology, const Parameters<T>& params, const BasicTensor4<T>& batch)
{
    check_params(topology, params);
    const auto& s = batch.shape();
    if (s.c != topology.input_channels || s.h != topology.input_h || s.w != topology.input_w) {
        throw std::invalid_argument("forward: batch shape " + to_string(s) + " does not match topology input " +
                                    std::to_string(topology.input_channels) + "x" + std::to_string(topology.input_h) +
                                    "x" + std::to_string(topology.input_w));
    }
    ForwardResult<T> r;
    r.cache.batch = s.n;
    r.cache.logits = run(topology, params, 0, batch, &r.cache);
    r.probabilities.resize(r.cache.logits.size());
    for (std::size_t i = 0; i < r.probabilities.size(); ++i) r.probabilities[i] = sigmoid(r.cache.logits[i]);
    return r;
}

template <typename T>
Backprop<T> backpropagate(const ModelTopology& topology, const Parameters<T>& params, const ForwardCache<T>& cache,
                          std::span<const T> logit_grads, bool keep_activation_grads)
{
    check_params(topology, params);
    if (cache.conv.size() != params.conv.size() || cache.dense_inputs.size() != params.dense.size() ||
        cache.dense_activations.size() + 1 != params.dense.size() || cache.logits.size() != cache.batch) {
        throw std::invalid_argument("backpropagate: cache does not come from a forward pass of this network");
    }
    if (logit_grads.size() != cache.batch) {
        throw std::invalid_argument("backpropagate: expected " + std::to_string(cache.batch) + " logit gradients, got " +
                                    std::to_string(logit_grads.size()));
    }
    for (std::size_t l = 0; l < params.conv.size(); ++l) {
        if (cache.conv[l].input.shape().c != params.conv[l].weight.shape().c) {
            throw std::invalid_argument("backpropagate: stale cache for conv layer " + std::to_string(l));
        }
    }

    Backprop<T> out;
    out.grads.conv.resize(params.conv.size());
    out.grads.dense.resize(params.dense.size());
    if (keep_activation_grads) out.activation_grads.resize(params.conv.size());

    BasicTensor4<T> up({cache.batch, 1, 1, 1}, std::vector<T>(logit_grads.begin(), logit_grads.end()));
    for (std::size_t l = params.dense.size(); l-- > 0;) {
        if (l + 1 < params.dense.size()) up = relu_backward(cache.dense_activations[l], up);
        auto g = dense_backward(cache.dense_inputs[l], params.dense[l].weight, up);
        out.grads.dense[l] = {std::move(g.weight), std::move(g.bias)};
        up = std::move(g.input);
    }
    for (std::size_t l = params.conv.size(); l-- > 0;) {
        const auto& stage = cache.conv[l];
        if (stage.pooled) {
            const auto& a = stage.activation.shape();
            const auto [ph, pw] = pooled_shape(a.h, a.w);
            up = maxpool2_backward(stage.pool_argmax, a, up.reshaped({a.n, a.c, ph, pw}));
        } else {
            up = up.reshaped(stage.activation.shape());
        }
        if (keep_activation_grads) out.activation_grads[l] = up;
        up = relu_backward(stage.activation, up);
        auto g = conv2d_backward(stage.input, params.conv[l].weight, up, l > 0);
        out.grads.conv[l] = {std::move(g.kernel), std::move(g.bias)};
        up = std::move(g.input);
    }
    return out;
}

template <typename T>
Parameters<T> backward(const ModelTopology& topology, const Parameters<T>& params, const ForwardResult<T>& result,
                       std::span<const T> labels)
{
    const auto n = result.probabilities.size();
    if (labels.size() != n) throw std::invalid_argument("backward: labels do not match batch size");
    std::vector<T> dz(n);
    for (std::size_t i = 0; i < n; ++i) dz[i] = (result.probabilities[i] - labels[i]) / static_cast<T>(n);
    return backpropagate<T>(topology, params, result.cache, dz).grads;
}

template <typename T>
std::vector<T> logits_from_activation(const ModelTopology& topology, const Parameters<T>& params, std::size_t layer,
                                      const BasicTensor4<T>& activation)
{
    check_params(topology, params);
    if (layer >= params.conv.size()) throw std::invalid_argument("logits_from_activation: no conv layer " + std::to_string(layer));
    BasicTensor4<T> x = topology.pool_after_each_conv ? maxpool2(activation).output : activation;
    return run<T>(topology, params, layer + 1, std::move(x), nullptr);
}

template <typename T>
double mean_bce(std::span<const T> probabilities, std::span<const T> labels)
{
    if (probabilities.size() != labels.size()) throw std::invalid_argument("mean_bce: size mismatch");
    if (probabilities.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        sum += bce_loss(static_cast<double>(probabilities[i]), labels[i] > T(0.5) ? 1 : 0);
    }
    return sum / static_cast<double>(probabilities.size());
}

#define FAKESPOT_INSTANTIATE_NETWORK(T)                                                                           \
    template ForwardResult<T> forward<T>(const ModelTopology&, const Parameters<T>&, const BasicTensor4<T>&);      \
    template Backprop<T> backpropagate<T>(const ModelTopology&, const Parameters<T>&, const ForwardCache<T>&,      \
                                          std::span<const T>, bool);                                              \
    template Parameters<T> backward<T>(const ModelTopology&, const Parameters<T>&, const ForwardResult<T>&,       \
                                       std::span<const T>);                                                       \
    template std::vector<T> logits_from_activation<T>(const ModelTopology&, const Parameters<T>&, std::size_t,     \
                                                      const BasicTensor4<T>&);                                     \
    template double mean_bce<T>(std::span<const T>, std::span<const T>);

FAKESPOT_INSTANTIATE_NETWORK(float)
FAKESPOT_INSTANTIATE_NETWORK(double)

}  // namespace fakespot::nn
