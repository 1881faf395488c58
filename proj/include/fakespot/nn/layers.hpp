#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fakespot/tensor.hpp"

namespace fakespot::nn {

// Valid (no padding), stride-1 convolution in the cross-correlation form
//   out(n,f,i,j) = bias(f) + sum_c sum_m sum_k x(n,c,i+m,j+k) * kernel(f,c,m,k)
// with 0-based indices. No activation is applied.
template <typename T>
BasicTensor4<T> conv2d_forward(const BasicTensor4<T>& x, const BasicTensor4<T>& kernel,
                               const BasicTensor4<T>& bias);

template <typename T>
struct ConvGrads {
    BasicTensor4<T> input;   // empty when not requested
    BasicTensor4<T> kernel;
    BasicTensor4<T> bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor4<T>& x, const BasicTensor4<T>& kernel,
                             const BasicTensor4<T>& upstream, bool input_grad = true);

template <typename T>
BasicTensor4<T> relu(const BasicTensor4<T>& x);

/// Passes upstream where x > 0 and zero elsewhere (subgradient 0 at x == 0).
/// x may be either the pre- or the post-activation tensor.
template <typename T>
BasicTensor4<T> relu_backward(const BasicTensor4<T>& x, const BasicTensor4<T>& upstream);

template <typename T>
struct PoolResult {
    BasicTensor4<T> output;
    std::vector<std::size_t> argmax;  // flat offset into the pooled input, one per output element
    Shape4 input_shape;
};

/// 2x2 stride-2 max pooling. Odd trailing rows/columns are dropped; ties keep
/// the first maximum in row-major window order.
template <typename T>
PoolResult<T> maxpool2(const BasicTensor4<T>& x);

template <typename T>
BasicTensor4<T> maxpool2_backward(const std::vector<std::size_t>& argmax, const Shape4& input_shape,
                                  const BasicTensor4<T>& upstream);

/// Affine map of every batch item: out(n, o) = bias(o) + sum_i weight(o, i) * x(n, i).
/// `x` may have any shape whose item size equals the weight's input width; the
/// result has shape (n, units, 1, 1).
template <typename T>
BasicTensor4<T> dense_forward(const BasicTensor4<T>& x, const BasicTensor4<T>& weight,
                              const BasicTensor4<T>& bias);

template <typename T>
struct DenseGrads {
    BasicTensor4<T> input;  // same shape as the forward input
    BasicTensor4<T> weight;
    BasicTensor4<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor4<T>& x, const BasicTensor4<T>& weight,
                             const BasicTensor4<T>& upstream);

/// Logistic function. The branch on sign keeps exp() from overflowing, and any
/// negative input maps strictly below 0.5 so thresholding the probability at 0.5
/// agrees with the sign of the logit.
template <typename T>
T sigmoid(T z)
{
    if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
    const T e = std::exp(z);
    const T s = e / (T(1) + e);
    return s < T(0.5) ? s : std::nextafter(T(0.5), T(0));
}

inline constexpr double kBceClip = 1e-7;

/// -[y ln p + (1 - y) ln(1 - p)] with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y);

/// Gradient of the loss with respect to the pre-sigmoid logit: p - y.
inline double bce_logit_grad(double p, int y) { return p - static_cast<double>(y); }

/// 1 when p >= 0.5, else 0.
inline int predict_label(double p) { return p >= 0.5 ? 1 : 0; }

}  // namespace fakespot::nn
