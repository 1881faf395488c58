#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "fakespot/tensor.hpp"

namespace fakespot::data {

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decodes an 8-bit RGB or RGBA PNG into a (1, 3, H, W) tensor scaled by 1/255.
/// Alpha is discarded. Throws ImageError naming the path on failure.
Tensor4 read_png(const std::filesystem::path& path);

/// Encodes a (1, 3, H, W) tensor as 8-bit RGB PNG, each value mapped to
/// round(clamp(v, 0, 1) * 255). The file is written to a temporary sibling and
/// renamed into place.
void write_png(const std::filesystem::path& path, const Tensor4& image);

/// Bilinear resampling of every item and channel with half-pixel centres:
/// source coordinate = (dst + 0.5) * in/out - 0.5, clamped to the image edge.
Tensor4 resize_bilinear(const Tensor4& image, std::size_t out_h, std::size_t out_w);

/// Nearest-neighbour enlargement by an integer factor.
Tensor4 enlarge_nearest(const Tensor4& image, std::size_t factor);

/// Quantises to the 8-bit grid used by write_png.
unsigned char to_byte(float v) noexcept;

}  // namespace fakespot::data
