#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fakespot/rng.hpp"
#include "fakespot/tensor.hpp"

namespace fakespot::data {

inline constexpr int kFake = 0;
inline constexpr int kReal = 1;
inline constexpr std::size_t kImageSide = 32;
inline constexpr std::size_t kImageChannels = 3;

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One 32x32 RGB image in [0, 1] with its binary label (FAKE = 0, REAL = 1).
struct LabeledImage {
    Tensor4 pixels;  // (1, 3, 32, 32)
    int label = kReal;
    std::string source_id;
};

struct ClassCounts {
    std::size_t fake = 0;
    std::size_t real = 0;

    std::size_t total() const noexcept { return fake + real; }
    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts count_classes(std::span<const LabeledImage> images);

struct DatasetSplit {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> test;
    ClassCounts train_counts;
    ClassCounts test_counts;
};

/// CIFAR-10 binary batch: 3073-byte records of one class byte followed by
/// 1024 R, 1024 G and 1024 B bytes, each plane row-major. Every record becomes
/// a REAL image; source_id is "<file>#<record>:class=<byte>".
std::vector<LabeledImage> load_cifar10_binary(const std::filesystem::path& path);

struct PngTreeOptions {
    std::map<std::string, int> label_map{{"FAKE", kFake}, {"REAL", kReal}};
    /// Skip undecodable files (with a diagnostic) instead of failing.
    bool lenient = false;
};

/// Loads `<root>/<dir>/*.png` for every subdirectory `dir` of root. Directories
/// and files are visited in lexicographic order; images that are not 32x32 are
/// resized bilinearly. Non-PNG files are ignored. Diagnostics (skipped files,
/// empty tree) are appended to `diagnostics` when given.
std::vector<LabeledImage> load_png_tree(const std::filesystem::path& root, const PngTreeOptions& options = {},
                                        std::vector<std::string>* diagnostics = nullptr);

/// Loads the published layout `<root>/{train,test}/{REAL,FAKE}/*.png` as-is.
DatasetSplit load_dataset_tree(const std::filesystem::path& root, const PngTreeOptions& options = {},
                               std::vector<std::string>* diagnostics = nullptr);

/// Stratified split: within each class the images are shuffled with `rng` and
/// round(test_fraction * count) of them go to the test set.
/// Throws DatasetError if a class present in `images` would leave either side
/// empty for a fraction strictly between 0 and 1, or on duplicate source ids.
DatasetSplit make_split(std::vector<LabeledImage> images, double test_fraction, SeededRng& rng);

/// Split from explicit train/test lists; validates disjointness by source_id.
DatasetSplit make_split(std::vector<LabeledImage> train, std::vector<LabeledImage> test);

/// Keeps at most `per_class` images of each class, chosen by a seeded shuffle
/// but returned in their original relative order. 0 keeps everything.
std::vector<LabeledImage> subsample_per_class(std::vector<LabeledImage> images, std::size_t per_class, SeededRng& rng);

struct Batch {
    Tensor4 images;              // (n, 3, 32, 32)
    std::vector<float> labels;   // 0 or 1
    std::vector<std::size_t> indices;
};

/// Reshuffled index order for one epoch, cut into batches of `batch_size`
/// (the final batch may be short).
std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t batch_size, SeededRng& rng);

Batch gather_batch(std::span<const LabeledImage> images, std::span<const std::size_t> indices);

/// Consecutive batches in stored order, no shuffling.
std::vector<std::vector<std::size_t>> sequential_batches(std::size_t count, std::size_t batch_size);

/// One epoch of shuffled batches materialised at once.
std::vector<Batch> batches(std::span<const LabeledImage> images, std::size_t batch_size, SeededRng& rng);

/// Converts an arbitrary (1, 3, H, W) decoded image into the network's 32x32 input.
Tensor4 to_network_input(const Tensor4& image);

}  // namespace fakespot::data
