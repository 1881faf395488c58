#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fakespot/data/dataset.hpp"
#include "fakespot/rng.hpp"

namespace fakespot::data {

struct SquarePlacement {
    std::size_t row = 0;  // top-left corner
    std::size_t col = 0;
    static constexpr std::size_t side = 8;

    bool contains(std::size_t r, std::size_t c) const noexcept
    {
        return r >= row && r < row + side && c >= col && c < col + side;
    }
};

struct SquareCorpus {
    std::vector<LabeledImage> images;
    std::vector<std::optional<SquarePlacement>> squares;  // parallel to images
};

struct SquareCorpusOptions {
    double noise_mean = 0.5;
    double noise_std = 0.15;
    float square_value = 1.0f;
};

/// Dataset-free two-class corpus. Label 0 images are Gaussian noise texture
/// (clamped to [0, 1]); label 1 images are the same kind of texture with an
/// 8x8 square of `square_value` pasted at a uniformly random position.
/// Images alternate label 0, label 1, ...; ids are "square/<label>/<index>".
SquareCorpus make_square_corpus(std::size_t per_class, SeededRng& rng, const SquareCorpusOptions& options = {});

}  // namespace fakespot::data
