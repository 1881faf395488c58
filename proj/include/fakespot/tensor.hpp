#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fakespot {

/// Extent of a rank-4 (batch, channels, height, width) tensor.
struct Shape4 {
    std::size_t n = 0;
    std::size_t c = 0;
    std::size_t h = 0;
    std::size_t w = 0;

    constexpr std::size_t size() const noexcept { return n * c * h * w; }
    /// Elements per batch item (c * h * w).
    constexpr std::size_t item_size() const noexcept { return c * h * w; }
    constexpr std::size_t plane_size() const noexcept { return h * w; }

    friend constexpr bool operator==(const Shape4&, const Shape4&) = default;
};

std::string to_string(const Shape4& shape);

/// Dense rank-4 array stored row-major with w fastest: offset = ((n*C + c)*H + h)*W + w.
///
/// The element count always equals shape().size(). Storage is a plain vector so
/// tensors behave as values: copies are deep, moves are cheap.
template <typename T>
class BasicTensor4 {
public:
    using value_type = T;

    BasicTensor4() = default;

    explicit BasicTensor4(Shape4 shape, T fill = T{0}) : shape_(shape), data_(shape.size(), fill) {}

    BasicTensor4(Shape4 shape, std::vector<T> values) : shape_(shape), data_(std::move(values))
    {
        if (data_.size() != shape_.size()) {
            throw std::invalid_argument("tensor: " + std::to_string(data_.size()) +
                                        " values supplied for shape " + to_string(shape_));
        }
    }

    static BasicTensor4 zeros(Shape4 shape) { return BasicTensor4(shape); }
    static BasicTensor4 constant(Shape4 shape, T value) { return BasicTensor4(shape, value); }
    static BasicTensor4 from_values(Shape4 shape, std::vector<T> values)
    {
        return BasicTensor4(shape, std::move(values));
    }

    const Shape4& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept
    {
        return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }

    T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) noexcept
    {
        return data_[offset(n, c, h, w)];
    }
    const T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept
    {
        return data_[offset(n, c, h, w)];
    }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    /// The c*h*w elements of batch item n.
    std::span<T> item(std::size_t n) noexcept
    {
        return std::span<T>(data_).subspan(n * shape_.item_size(), shape_.item_size());
    }
    std::span<const T> item(std::size_t n) const noexcept
    {
        return std::span<const T>(data_).subspan(n * shape_.item_size(), shape_.item_size());
    }

    /// The h*w elements of channel c of item n.
    std::span<T> plane(std::size_t n, std::size_t c) noexcept
    {
        return std::span<T>(data_).subspan((n * shape_.c + c) * shape_.plane_size(), shape_.plane_size());
    }
    std::span<const T> plane(std::size_t n, std::size_t c) const noexcept
    {
        return std::span<const T>(data_).subspan((n * shape_.c + c) * shape_.plane_size(),
                                                 shape_.plane_size());
    }

    /// Same data viewed under another shape with equal element count.
    BasicTensor4 reshaped(Shape4 shape) const
    {
        if (shape.size() != shape_.size()) {
            throw std::invalid_argument("tensor: cannot reshape " + to_string(shape_) + " to " +
                                        to_string(shape));
        }
        return BasicTensor4(shape, data_);
    }

    template <typename U>
    BasicTensor4<U> cast() const
    {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return BasicTensor4<U>(shape_, std::move(out));
    }

    friend bool operator==(const BasicTensor4&, const BasicTensor4&) = default;

private:
    Shape4 shape_{};
    std::vector<T> data_;
};

using Tensor4 = BasicTensor4<float>;

template <typename T, typename F>
BasicTensor4<T> map_elementwise(const BasicTensor4<T>& t, F&& f)
{
    BasicTensor4<T> out(t.shape());
    auto src = t.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(f(src[i]));
    return out;
}

/// Concatenation of every item's (c, h, w) values, w fastest. Items follow each
/// other, so item i occupies [i*L, (i+1)*L) with L = c*h*w.
template <typename T>
std::vector<T> flatten(const BasicTensor4<T>& t)
{
    return t.values();
}

/// Values of item n as a length c*h*w vector.
template <typename T>
std::vector<T> flatten_item(const BasicTensor4<T>& t, std::size_t n)
{
    auto s = t.item(n);
    return std::vector<T>(s.begin(), s.end());
}

template <typename T>
BasicTensor4<T> unflatten(std::vector<T> values, Shape4 shape)
{
    return BasicTensor4<T>(shape, std::move(values));
}

/// True when every element is finite.
template <typename T>
bool all_finite(const BasicTensor4<T>& t);

extern template bool all_finite<float>(const BasicTensor4<float>&);
extern template bool all_finite<double>(const BasicTensor4<double>&);

}  // namespace fakespot
