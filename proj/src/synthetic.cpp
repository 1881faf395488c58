#include "fakespot/data/synthetic.hpp"

#include <algorithm>

namespace fakespot::data {

SquareCorpus make_square_corpus(std::size_t per_class, SeededRng& rng, const SquareCorpusOptions& options)
{
    SquareCorpus corpus;
    const Shape4 shape{1, kImageChannels, kImageSide, kImageSide};
    const std::size_t span = kImageSide - SquarePlacement::side + 1;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int label = static_cast<int>(i % 2);
        LabeledImage img;
        img.pixels = sample_normal(rng, shape, options.noise_mean, options.noise_std);
        for (float& v : img.pixels.data()) v = std::clamp(v, 0.0f, 1.0f);
        img.label = label;
        img.source_id = "square/" + std::to_string(label) + "/" + std::to_string(i / 2);
        std::optional<SquarePlacement> square;
        if (label == 1) {
            SquarePlacement sq{static_cast<std::size_t>(rng.below(span)), static_cast<std::size_t>(rng.below(span))};
            for (std::size_t c = 0; c < kImageChannels; ++c) {
                for (std::size_t r = 0; r < SquarePlacement::side; ++r) {
                    for (std::size_t k = 0; k < SquarePlacement::side; ++k) img.pixels(0, c, sq.row + r, sq.col + k) = options.square_value;
                }
            }
            square = sq;
        }
        corpus.images.push_back(std::move(img));
        corpus.squares.push_back(square);
    }
    return corpus;
}

}  // namespace fakespot::data
