#include "fakespot/nn/layers.hpp"

#include <algorithm>
#include <stdexcept>

#include "fakespot/nn/topology.hpp"

namespace fakespot::nn {

namespace {

// Fixed 8-lane dot product: vectorizable without reassociating, so the result
// does not depend on compiler flags.
template <typename T>
T dot(const T* a, const T* b, std::size_t n)
{
    T lanes[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t l = 0; l < 8; ++l) lanes[l] += a[i + l] * b[i + l];
    }
    for (std::size_t l = 0; i < n; ++i, ++l) lanes[l] += a[i] * b[i];
    T sum = T(0);
    for (T v : lanes) sum += v;
    return sum;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

template <typename T>
BasicTensor4<T> conv2d_forward(const BasicTensor4<T>& x, const BasicTensor4<T>& kernel, const BasicTensor4<T>& bias)
{
    const auto& xs = x.shape();
    const auto& ks = kernel.shape();
    if (xs.c != ks.c) {
        throw std::invalid_argument("conv2d: input has " + std::to_string(xs.c) + " channels, kernel expects " +
                                    std::to_string(ks.c));
    }
    if (bias.size() != ks.n) throw std::invalid_argument("conv2d: bias length does not match filter count");
    const auto [oh, ow] = output_shape(xs.h, xs.w, ks.h, ks.w);

    BasicTensor4<T> out({xs.n, ks.n, oh, ow});
    for (std::size_t n = 0; n < xs.n; ++n) {
        for (std::size_t f = 0; f < ks.n; ++f) {
            auto plane = out.plane(n, f);
            std::fill(plane.begin(), plane.end(), bias[f]);
            for (std::size_t c = 0; c < xs.c; ++c) {
                const T* xp = x.plane(n, c).data();
                for (std::size_t m = 0; m < ks.h; ++m) {
                    for (std::size_t k = 0; k < ks.w; ++k) {
                        const T w = kernel(f, c, m, k);
                        for (std::size_t i = 0; i < oh; ++i) {
                            axpy(w, xp + (i + m) * xs.w + k, plane.data() + i * ow, ow);
                        }
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor4<T>& x, const BasicTensor4<T>& kernel,
                             const BasicTensor4<T>& upstream, bool input_grad)
{
    const auto& xs = x.shape();
    const auto& ks = kernel.shape();
    const auto& us = upstream.shape();
    if (xs.c != ks.c || us.n != xs.n || us.c != ks.n || us.h != xs.h - ks.h + 1 || us.w != xs.w - ks.w + 1) {
        throw std::invalid_argument("conv2d_backward: inconsistent shapes " + to_string(xs) + " " + to_string(ks) +
                                    " " + to_string(us));
    }
    const std::size_t oh = us.h, ow = us.w;

    ConvGrads<T> g{input_grad ? BasicTensor4<T>(xs) : BasicTensor4<T>{}, BasicTensor4<T>(ks),
                   BasicTensor4<T>({ks.n, 1, 1, 1})};
    std::vector<T> acc(ow);
    for (std::size_t n = 0; n < xs.n; ++n) {
        for (std::size_t f = 0; f < ks.n; ++f) {
            const T* up = upstream.plane(n, f).data();
            T bsum = T(0);
            for (std::size_t i = 0; i < oh * ow; ++i) bsum += up[i];
            g.bias[f] += bsum;
            for (std::size_t c = 0; c < xs.c; ++c) {
                const T* xp = x.plane(n, c).data();
                T* dxp = input_grad ? g.input.plane(n, c).data() : nullptr;
                for (std::size_t m = 0; m < ks.h; ++m) {
                    for (std::size_t k = 0; k < ks.w; ++k) {
                        std::fill(acc.begin(), acc.end(), T(0));
                        for (std::size_t i = 0; i < oh; ++i) {
                            const T* xr = xp + (i + m) * xs.w + k;
                            const T* ur = up + i * ow;
                            for (std::size_t j = 0; j < ow; ++j) acc[j] += ur[j] * xr[j];
                        }
                        T s = T(0);
                        for (T v : acc) s += v;
                        g.kernel(f, c, m, k) += s;
                        if (dxp) {
                            const T w = kernel(f, c, m, k);
                            for (std::size_t i = 0; i < oh; ++i) axpy(w, up + i * ow, dxp + (i + m) * xs.w + k, ow);
                        }
                    }
                }
            }
        }
    }
    return g;
}

template <typename T>
BasicTensor4<T> relu(const BasicTensor4<T>& x)
{
    return map_elementwise(x, [](T v) { return v > T(0) ? v : T(0); });
}

template <typename T>
BasicTensor4<T> relu_backward(const BasicTensor4<T>& x, const BasicTensor4<T>& upstream)
{
    if (!(x.shape() == upstream.shape())) throw std::invalid_argument("relu_backward: shape mismatch");
    BasicTensor4<T> out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? upstream[i] : T(0);
    return out;
}

template <typename T>
PoolResult<T> maxpool2(const BasicTensor4<T>& x)
{
    const auto& s = x.shape();
    const auto [ph, pw] = pooled_shape(s.h, s.w);
    if (ph == 0 || pw == 0) throw std::invalid_argument("maxpool2: input " + to_string(s) + " too small to pool");
    PoolResult<T> r{BasicTensor4<T>({s.n, s.c, ph, pw}), std::vector<std::size_t>(s.n * s.c * ph * pw), s};
    std::size_t o = 0;
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t i = 0; i < ph; ++i) {
                for (std::size_t j = 0; j < pw; ++j, ++o) {
                    std::size_t best = x.offset(n, c, 2 * i, 2 * j);
                    for (std::size_t di = 0; di < 2; ++di) {
                        for (std::size_t dj = 0; dj < 2; ++dj) {
                            const auto at = x.offset(n, c, 2 * i + di, 2 * j + dj);
                            if (x[at] > x[best]) best = at;
                        }
                    }
                    r.output[o] = x[best];
                    r.argmax[o] = best;
                }
            }
        }
    }
    return r;
}

template <typename T>
BasicTensor4<T> maxpool2_backward(const std::vector<std::size_t>& argmax, const Shape4& input_shape,
                                  const BasicTensor4<T>& upstream)
{
    if (argmax.size() != upstream.size()) throw std::invalid_argument("maxpool2_backward: index/upstream size mismatch");
    BasicTensor4<T> dx(input_shape);
    for (std::size_t o = 0; o < argmax.size(); ++o) {
        if (argmax[o] >= dx.size()) throw std::invalid_argument("maxpool2_backward: index out of range");
        dx[argmax[o]] += upstream[o];
    }
    return dx;
}

template <typename T>
BasicTensor4<T> dense_forward(const BasicTensor4<T>& x, const BasicTensor4<T>& weight, const BasicTensor4<T>& bias)
{
    const std::size_t units = weight.shape().n;
    const std::size_t in = weight.shape().c;
    const std::size_t batch = x.shape().n;
    if (x.shape().item_size() != in) {
        throw std::invalid_argument("dense: input width " + std::to_string(x.shape().item_size()) +
                                    " does not match weight columns " + std::to_string(in));
    }
    if (bias.size() != units) throw std::invalid_argument("dense: bias length does not match units");
    BasicTensor4<T> out({batch, units, 1, 1});
    const T* w = weight.data().data();
    for (std::size_t n = 0; n < batch; ++n) {
        const T* xr = x.item(n).data();
        for (std::size_t o = 0; o < units; ++o) out(n, o, 0, 0) = bias[o] + dot(w + o * in, xr, in);
    }
    return out;
}

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor4<T>& x, const BasicTensor4<T>& weight, const BasicTensor4<T>& upstream)
{
    const std::size_t units = weight.shape().n;
    const std::size_t in = weight.shape().c;
    const std::size_t batch = x.shape().n;
    if (x.shape().item_size() != in || upstream.shape().n != batch || upstream.shape().item_size() != units) {
        throw std::invalid_argument("dense_backward: dimension mismatch");
    }
    DenseGrads<T> g{BasicTensor4<T>(x.shape()), BasicTensor4<T>(weight.shape()), BasicTensor4<T>({units, 1, 1, 1})};
    const T* w = weight.data().data();
    T* dw = g.weight.data().data();
    for (std::size_t n = 0; n < batch; ++n) {
        const T* xr = x.item(n).data();
        const T* ur = upstream.item(n).data();
        T* dxr = g.input.item(n).data();
        for (std::size_t o = 0; o < units; ++o) {
            const T u = ur[o];
            g.bias[o] += u;
            if (u == T(0)) continue;
            axpy(u, xr, dw + o * in, in);
            axpy(u, w + o * in, dxr, in);
        }
    }
    return g;
}

double bce_loss(double p, int y)
{
    const double q = std::clamp(p, kBceClip, 1.0 - kBceClip);
    return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

#define FAKESPOT_INSTANTIATE_LAYERS(T)                                                                          \
    template BasicTensor4<T> conv2d_forward<T>(const BasicTensor4<T>&, const BasicTensor4<T>&,                 \
                                               const BasicTensor4<T>&);                                        \
    template ConvGrads<T> conv2d_backward<T>(const BasicTensor4<T>&, const BasicTensor4<T>&,                   \
                                             const BasicTensor4<T>&, bool);                                    \
    template BasicTensor4<T> relu<T>(const BasicTensor4<T>&);                                                  \
    template BasicTensor4<T> relu_backward<T>(const BasicTensor4<T>&, const BasicTensor4<T>&);                 \
    template PoolResult<T> maxpool2<T>(const BasicTensor4<T>&);                                                \
    template BasicTensor4<T> maxpool2_backward<T>(const std::vector<std::size_t>&, const Shape4&,              \
                                                  const BasicTensor4<T>&);                                     \
    template BasicTensor4<T> dense_forward<T>(const BasicTensor4<T>&, const BasicTensor4<T>&,                  \
                                              const BasicTensor4<T>&);                                         \
    template DenseGrads<T> dense_backward<T>(const BasicTensor4<T>&, const BasicTensor4<T>&,                   \
                                             const BasicTensor4<T>&);

FAKESPOT_INSTANTIATE_LAYERS(float)
FAKESPOT_INSTANTIATE_LAYERS(double)

}  // namespace fakespot::nn
