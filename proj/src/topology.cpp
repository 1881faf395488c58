#include "fakespot/nn/topology.hpp"

#include <charconv>
#include <stdexcept>
#include <string_view>
#include <tuple>

namespace fakespot::nn {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::size_t parse_count(std::string_view text, std::string_view what)
{
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || value == 0) {
        throw std::invalid_argument("topology: bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

std::pair<std::size_t, std::size_t> parse_extent(std::string_view text, std::string_view what)
{
    const auto parts = split(text, 'x');
    if (parts.size() != 2) throw std::invalid_argument("topology: bad " + std::string(what) + " '" + std::string(text) + "'");
    return {parse_count(parts[0], what), parse_count(parts[1], what)};
}

}  // namespace

std::pair<std::size_t, std::size_t> output_shape(std::size_t h, std::size_t w, std::size_t kernel_h,
                                                 std::size_t kernel_w)
{
    if (kernel_h == 0 || kernel_w == 0) throw std::invalid_argument("output_shape: empty kernel");
    if (kernel_h > h || kernel_w > w) {
        throw std::invalid_argument("output_shape: kernel " + std::to_string(kernel_h) + "x" +
                                    std::to_string(kernel_w) + " larger than input " + std::to_string(h) +
                                    "x" + std::to_string(w));
    }
    return {h - kernel_h + 1, w - kernel_w + 1};
}

std::vector<ConvStageGeometry> ModelTopology::conv_geometry() const
{
    std::vector<ConvStageGeometry> stages;
    std::size_t c = input_channels, h = input_h, w = input_w;
    for (std::size_t i = 0; i < conv_layers.size(); ++i) {
        const auto& layer = conv_layers[i];
        if (layer.stride != 1) throw std::invalid_argument("topology: only stride 1 is supported");
        if (layer.filters == 0) throw std::invalid_argument("topology: conv layer with zero filters");
        ConvStageGeometry g{c, h, w, 0, 0, 0, 0};
        try {
            std::tie(g.out_h, g.out_w) = output_shape(h, w, layer.kernel_h, layer.kernel_w);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("topology: conv layer " + std::to_string(i) + ": " + e.what());
        }
        if (pool_after_each_conv) {
            std::tie(g.pool_h, g.pool_w) = pooled_shape(g.out_h, g.out_w);
            if (g.pool_h == 0 || g.pool_w == 0) {
                throw std::invalid_argument("topology: pooling after conv layer " + std::to_string(i) +
                                            " leaves an empty feature map");
            }
        } else {
            g.pool_h = g.out_h;
            g.pool_w = g.out_w;
        }
        stages.push_back(g);
        c = layer.filters;
        h = g.pool_h;
        w = g.pool_w;
    }
    return stages;
}

void ModelTopology::validate() const
{
    if (input_channels == 0 || input_h == 0 || input_w == 0) throw std::invalid_argument("topology: empty input");
    (void)conv_geometry();
    for (const auto& d : dense_layers) {
        if (d.units == 0) throw std::invalid_argument("topology: dense layer with zero units");
    }
}

std::size_t ModelTopology::flat_features() const
{
    const auto stages = conv_geometry();
    if (stages.empty()) return input_channels * input_h * input_w;
    return conv_layers.back().filters * stages.back().pool_h * stages.back().pool_w;
}

std::size_t ModelTopology::parameter_count() const
{
    std::size_t count = 0;
    const auto stages = conv_geometry();
    for (std::size_t i = 0; i < conv_layers.size(); ++i) {
        const auto& l = conv_layers[i];
        count += l.filters * stages[i].in_channels * l.kernel_h * l.kernel_w + l.filters;
    }
    std::size_t in = flat_features();
    for (const auto& d : dense_layers) {
        count += d.units * in + d.units;
        in = d.units;
    }
    return count + in + 1;
}

std::string ModelTopology::descriptor() const
{
    std::string out = "in=" + std::to_string(input_channels) + "x" + std::to_string(input_h) + "x" +
                      std::to_string(input_w) + ";conv=";
    for (std::size_t i = 0; i < conv_layers.size(); ++i) {
        if (i) out += ',';
        const auto& l = conv_layers[i];
        out += std::to_string(l.filters) + "@" + std::to_string(l.kernel_h) + "x" + std::to_string(l.kernel_w);
    }
    out += pool_after_each_conv ? ";pool=max2" : ";pool=none";
    out += ";dense=";
    for (std::size_t i = 0; i < dense_layers.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(dense_layers[i].units);
    }
    return out;
}

ModelTopology ModelTopology::parse(const std::string& descriptor)
{
    ModelTopology t;
    t.conv_layers.clear();
    bool seen_in = false, seen_conv = false, seen_pool = false, seen_dense = false;
    for (auto field : split(descriptor, ';')) {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("topology: field without '=': '" + std::string(field) + "'");
        }
        const auto key = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        if (key == "in") {
            const auto parts = split(value, 'x');
            if (parts.size() != 3) throw std::invalid_argument("topology: bad input extent '" + std::string(value) + "'");
            t.input_channels = parse_count(parts[0], "input channels");
            t.input_h = parse_count(parts[1], "input height");
            t.input_w = parse_count(parts[2], "input width");
            seen_in = true;
        } else if (key == "conv") {
            if (!value.empty()) {
                for (auto layer : split(value, ',')) {
                    const auto at = layer.find('@');
                    if (at == std::string_view::npos) {
                        throw std::invalid_argument("topology: conv layer needs filters@MxN, got '" + std::string(layer) + "'");
                    }
                    ConvLayerSpec spec;
                    spec.filters = parse_count(layer.substr(0, at), "filter count");
                    std::tie(spec.kernel_h, spec.kernel_w) = parse_extent(layer.substr(at + 1), "kernel");
                    t.conv_layers.push_back(spec);
                }
            }
            seen_conv = true;
        } else if (key == "pool") {
            if (value == "max2") {
                t.pool_after_each_conv = true;
            } else if (value == "none") {
                t.pool_after_each_conv = false;
            } else {
                throw std::invalid_argument("topology: unknown pool '" + std::string(value) + "'");
            }
            seen_pool = true;
        } else if (key == "dense") {
            if (!value.empty()) {
                for (auto units : split(value, ',')) t.dense_layers.push_back({parse_count(units, "dense units")});
            }
            seen_dense = true;
        } else {
            throw std::invalid_argument("topology: unknown field '" + std::string(key) + "'");
        }
    }
    if (!seen_in || !seen_conv || !seen_pool || !seen_dense) {
        throw std::invalid_argument("topology: descriptor must name in, conv, pool and dense: '" + descriptor + "'");
    }
    t.validate();
    return t;
}

ModelTopology make_topology(std::size_t filters, std::size_t conv_layers, std::vector<std::size_t> dense_units,
                            std::size_t kernel)
{
    ModelTopology t;
    for (std::size_t i = 0; i < conv_layers; ++i) t.conv_layers.push_back({filters, kernel, kernel, 1});
    for (auto u : dense_units) t.dense_layers.push_back({u});
    t.validate();
    return t;
}

}  // namespace fakespot::nn
