#include "fakespot/gradcam.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "fakespot/data/image.hpp"

namespace fakespot::gradcam {

namespace fs = std::filesystem;

template <typename T>
FeatureMapGradients<T> capture_gradients(const nn::ModelTopology& topology, const nn::Parameters<T>& params,
                                         const BasicTensor4<T>& image, int target_class, std::size_t layer)
{
    if (layer >= topology.conv_layers.size()) {
        std::string valid = topology.conv_layers.empty() ? "none" : "0.." + std::to_string(topology.conv_layers.size() - 1);
        throw std::out_of_range("grad-cam: conv layer " + std::to_string(layer) + " does not exist (valid layers: " + valid + ")");
    }
    if (target_class != 0 && target_class != 1) throw std::invalid_argument("grad-cam: target class must be 0 or 1");
    if (image.shape().n != 1) throw std::invalid_argument("grad-cam: expected a single image, got " + to_string(image.shape()));

    const auto fwd = nn::forward(topology, params, image);
    const T seed = target_class == 1 ? T(1) : T(-1);
    auto bp = nn::backpropagate<T>(topology, params, fwd.cache, std::span<const T>(&seed, 1), true);
    return {fwd.cache.conv[layer].activation, std::move(bp.activation_grads[layer]), layer};
}

FeatureMapGradients<float> capture_gradients(const nn::TrainedModel& model, const Tensor4& image, int target_class,
                                             std::size_t layer)
{
    return capture_gradients<float>(model.topology, model.params, image, target_class, layer);
}

template <typename T>
BasicTensor4<T> gradcam_map(const FeatureMapGradients<T>& fg)
{
    const auto& s = fg.activations.shape();
    if (!(s == fg.gradients.shape())) throw std::invalid_argument("grad-cam: activation and gradient shapes differ");
    BasicTensor4<T> map({1, 1, s.h, s.w});
    if (s.n == 0) return map;
    const double z = static_cast<double>(s.plane_size());
    for (std::size_t k = 0; k < s.c; ++k) {
        double sum = 0.0;
        for (T g : fg.gradients.plane(0, k)) sum += static_cast<double>(g);
        const auto alpha = static_cast<T>(sum / z);
        const auto a = fg.activations.plane(0, k);
        auto m = map.data();
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += alpha * a[i];
    }
    for (T& v : map.data()) v = v > T(0) ? v : T(0);
    return map;
}

Tensor4 normalize(const Tensor4& raw)
{
    Tensor4 out(raw.shape());
    if (raw.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(raw.data().begin(), raw.data().end());
    const float lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        if (hi != 0.0f) std::fill(out.data().begin(), out.data().end(), 1.0f);
        return out;
    }
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
    return out;
}

CellGeometry layer_geometry(const nn::ModelTopology& topology, std::size_t layer)
{
    if (layer >= topology.conv_layers.size()) throw std::out_of_range("grad-cam: no conv layer " + std::to_string(layer));
    CellGeometry g;
    for (std::size_t l = 0; l <= layer; ++l) {
        const auto& spec = topology.conv_layers[l];
        // Rows and columns share one placement; square kernels keep them identical.
        g.offset += g.scale * (static_cast<double>(spec.kernel_h) - 1.0) / 2.0;
        if (l < layer && topology.pool_after_each_conv) {
            g.offset += g.scale * 0.5;
            g.scale *= 2.0;
        }
    }
    return g;
}

Tensor4 normalize_upsample(const Tensor4& raw, std::size_t out_size, std::optional<CellGeometry> geometry)
{
    const auto norm = normalize(raw);
    const auto& s = norm.shape();
    if (s.n != 1 || s.c != 1 || s.h == 0 || s.w == 0) throw std::invalid_argument("normalize_upsample: expected a (1,1,h,w) map");
    auto sample_axis = [&](std::size_t cells, std::size_t x) {
        double scale, offset;
        if (geometry) {
            scale = geometry->scale;
            offset = geometry->offset;
        } else {
            scale = static_cast<double>(out_size) / static_cast<double>(cells);
            offset = (scale - 1.0) / 2.0;
        }
        const double src = std::clamp((static_cast<double>(x) - offset) / scale, 0.0, static_cast<double>(cells - 1));
        const auto lo = static_cast<std::size_t>(src);
        return std::tuple{lo, std::min(lo + 1, cells - 1), static_cast<float>(src - static_cast<double>(lo))};
    };
    Tensor4 up({1, 1, out_size, out_size});
    for (std::size_t y = 0; y < out_size; ++y) {
        const auto [y0, y1, fy] = sample_axis(s.h, y);
        for (std::size_t x = 0; x < out_size; ++x) {
            const auto [x0, x1, fx] = sample_axis(s.w, x);
            const float top = norm(0, 0, y0, x0) + fx * (norm(0, 0, y0, x1) - norm(0, 0, y0, x0));
            const float bot = norm(0, 0, y1, x0) + fx * (norm(0, 0, y1, x1) - norm(0, 0, y1, x0));
            up(0, 0, y, x) = std::clamp(top + fy * (bot - top), 0.0f, 1.0f);
        }
    }
    return up;
}

Rgb colormap(float heat) noexcept
{
    const float h = std::clamp(heat, 0.0f, 1.0f);
    return {std::min(1.0f, 2.0f * h), std::max(0.0f, 2.0f * h - 1.0f), 0.0f};
}

Tensor4 render_heatmap(const Tensor4& heat)
{
    const auto& s = heat.shape();
    if (s.n != 1 || s.c != 1) throw std::invalid_argument("render_heatmap: expected a (1,1,H,W) map");
    Tensor4 out({1, 3, s.h, s.w});
    for (std::size_t y = 0; y < s.h; ++y) {
        for (std::size_t x = 0; x < s.w; ++x) {
            const auto c = colormap(heat(0, 0, y, x));
            out(0, 0, y, x) = c.r;
            out(0, 1, y, x) = c.g;
            out(0, 2, y, x) = c.b;
        }
    }
    return out;
}

Tensor4 render_overlay(const Tensor4& image, const Tensor4& heat, float alpha)
{
    if (!(alpha >= 0.0f && alpha <= 1.0f)) throw std::invalid_argument("render_overlay: alpha must lie in [0, 1]");
    const auto& s = image.shape();
    const auto& hs = heat.shape();
    if (s.n != 1 || s.c != 3 || hs.n != 1 || hs.c != 1 || hs.h != s.h || hs.w != s.w) {
        throw std::invalid_argument("render_overlay: image " + to_string(s) + " and heatmap " + to_string(hs) + " disagree");
    }
    const auto colors = render_heatmap(heat);
    Tensor4 out(s);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0f - alpha) * image[i] + alpha * colors[i];
    return out;
}

Heatmap explain(const nn::TrainedModel& model, const Tensor4& image, std::optional<int> target_class,
                std::optional<std::size_t> layer)
{
    if (model.topology.conv_layers.empty()) throw std::invalid_argument("grad-cam: model has no conv layers");
    const std::size_t l = layer.value_or(model.topology.conv_layers.size() - 1);
    const int cls = target_class ? *target_class : nn::predict_label(model.predict(image).front());
    Heatmap h;
    h.raw = gradcam_map(capture_gradients(model, image, cls, l));
    h.normalized = normalize(h.raw);
    h.upsampled = normalize_upsample(h.raw, image.shape().h, layer_geometry(model.topology, l));
    h.target_class = cls;
    h.layer = l;
    return h;
}

std::string file_stem_for(const std::string& source_id)
{
    std::string out = source_id;
    for (char& ch : out) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '.' ||
                        ch == '_' || ch == '-';
        if (!ok) ch = '_';
    }
    return out.empty() ? "_" : out;
}

std::vector<ExplainOutcome> explain_batch(const nn::TrainedModel& model, std::span<const ExplainInput> images,
                                          const fs::path& out_dir, const ExplainOptions& options)
{
    std::vector<ExplainOutcome> outcomes;
    if (images.empty()) return outcomes;
    fs::create_directories(out_dir);
    for (const auto& in : images) {
        ExplainOutcome o;
        o.source_id = in.source_id;
        try {
            const auto h = explain(model, in.image, options.target_class, options.layer);
            const auto overlay = render_overlay(in.image, h.upsampled, options.alpha);
            const auto heat = render_heatmap(h.upsampled);
            const auto stem = file_stem_for(in.source_id);
            auto emit = [&](const std::string& name, const Tensor4& img) {
                const auto path = out_dir / name;
                data::write_png(path, img);
                o.files.push_back(path);
            };
            emit(stem + ".overlay.png", overlay);
            emit(stem + ".heat.png", heat);
            if (options.enlarge > 1) {
                const auto k = std::to_string(options.enlarge);
                emit(stem + ".overlay.x" + k + ".png", data::enlarge_nearest(overlay, options.enlarge));
                emit(stem + ".heat.x" + k + ".png", data::enlarge_nearest(heat, options.enlarge));
            }
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

std::pair<std::size_t, std::size_t> argmax(const Tensor4& map)
{
    const auto& s = map.shape();
    if (map.empty() || s.n != 1 || s.c != 1) throw std::invalid_argument("argmax: expected a non-empty (1,1,h,w) map");
    const float peak = *std::max_element(map.data().begin(), map.data().end());
    double sum_r = 0.0, sum_c = 0.0, count = 0.0;
    for (std::size_t y = 0; y < s.h; ++y) {
        for (std::size_t x = 0; x < s.w; ++x) {
            if (map(0, 0, y, x) != peak) continue;
            sum_r += static_cast<double>(y);
            sum_c += static_cast<double>(x);
            count += 1.0;
        }
    }
    const double cr = sum_r / count, cc = sum_c / count;
    std::pair<std::size_t, std::size_t> best{0, 0};
    double best_d = -1.0;
    for (std::size_t y = 0; y < s.h; ++y) {
        for (std::size_t x = 0; x < s.w; ++x) {
            if (map(0, 0, y, x) != peak) continue;
            const double dr = static_cast<double>(y) - cr, dc = static_cast<double>(x) - cc;
            const double d = dr * dr + dc * dc;
            if (best_d < 0.0 || d < best_d) {
                best = {y, x};
                best_d = d;
            }
        }
    }
    return best;
}

template FeatureMapGradients<float> capture_gradients<float>(const nn::ModelTopology&, const nn::Parameters<float>&,
                                                             const Tensor4&, int, std::size_t);
template FeatureMapGradients<double> capture_gradients<double>(const nn::ModelTopology&, const nn::Parameters<double>&,
                                                               const BasicTensor4<double>&, int, std::size_t);
template Tensor4 gradcam_map<float>(const FeatureMapGradients<float>&);
template BasicTensor4<double> gradcam_map<double>(const FeatureMapGradients<double>&);

}  // namespace fakespot::gradcam
