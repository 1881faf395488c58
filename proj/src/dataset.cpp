#include "fakespot/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>

#include "fakespot/data/image.hpp"

namespace fakespot::data {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kCifarPixels = kImageSide * kImageSide * kImageChannels;
constexpr std::size_t kCifarRecord = kCifarPixels + 1;

bool is_png(const fs::path& p)
{
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png";
}

std::vector<fs::path> sorted_entries(const fs::path& dir)
{
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    return entries;
}

void check_disjoint(std::span<const LabeledImage> a, std::span<const LabeledImage> b)
{
    std::set<std::string> ids;
    for (const auto& img : a) {
        if (!ids.insert(img.source_id).second) throw DatasetError("duplicate source id '" + img.source_id + "'");
    }
    for (const auto& img : b) {
        if (ids.count(img.source_id)) throw DatasetError("image '" + img.source_id + "' is in both train and test");
    }
    std::set<std::string> test_ids;
    for (const auto& img : b) {
        if (!test_ids.insert(img.source_id).second) throw DatasetError("duplicate source id '" + img.source_id + "'");
    }
}

DatasetSplit finish(std::vector<LabeledImage> train, std::vector<LabeledImage> test)
{
    DatasetSplit s;
    s.train_counts = count_classes(train);
    s.test_counts = count_classes(test);
    s.train = std::move(train);
    s.test = std::move(test);
    return s;
}

}  // namespace

ClassCounts count_classes(std::span<const LabeledImage> images)
{
    ClassCounts c;
    for (const auto& img : images) (img.label == kReal ? c.real : c.fake)++;
    return c;
}

std::vector<LabeledImage> load_cifar10_binary(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open CIFAR-10 file " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % kCifarRecord != 0) {
        throw DatasetError("CIFAR-10 file " + path.string() + " has " + std::to_string(bytes.size()) +
                           " bytes, not a multiple of " + std::to_string(kCifarRecord));
    }
    std::vector<LabeledImage> images;
    images.reserve(bytes.size() / kCifarRecord);
    for (std::size_t r = 0; r < bytes.size() / kCifarRecord; ++r) {
        const unsigned char* rec = bytes.data() + r * kCifarRecord;
        LabeledImage img;
        img.pixels = Tensor4({1, kImageChannels, kImageSide, kImageSide});
        auto px = img.pixels.data();
        // The record's plane order (R, G, B; rows; columns) is already our layout.
        for (std::size_t i = 0; i < kCifarPixels; ++i) px[i] = static_cast<float>(rec[1 + i]) / 255.0f;
        img.label = kReal;
        img.source_id = path.filename().string() + "#" + std::to_string(r) + ":class=" + std::to_string(rec[0]);
        images.push_back(std::move(img));
    }
    return images;
}

Tensor4 to_network_input(const Tensor4& image)
{
    const auto& s = image.shape();
    if (s.n != 1 || s.c != kImageChannels) throw DatasetError("expected a (1,3,H,W) image, got " + to_string(s));
    if (s.h == kImageSide && s.w == kImageSide) return image;
    auto out = resize_bilinear(image, kImageSide, kImageSide);
    for (float& v : out.data()) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

std::vector<LabeledImage> load_png_tree(const fs::path& root, const PngTreeOptions& options,
                                        std::vector<std::string>* diagnostics)
{
    if (!fs::is_directory(root)) throw DatasetError("image directory " + root.string() + " does not exist");
    std::vector<LabeledImage> images;
    const auto base = root.filename().empty() ? root.parent_path().filename() : root.filename();
    for (const auto& dir : sorted_entries(root)) {
        if (!fs::is_directory(dir)) continue;
        const auto name = dir.filename().string();
        const auto label = options.label_map.find(name);
        if (label == options.label_map.end()) {
            throw DatasetError("unknown class directory '" + name + "' under " + root.string());
        }
        for (const auto& file : sorted_entries(dir)) {
            if (!fs::is_regular_file(file) || !is_png(file)) continue;
            try {
                images.push_back({to_network_input(read_png(file)), label->second, (base / name / file.filename()).generic_string()});
            } catch (const ImageError& e) {
                if (!options.lenient) throw DatasetError(e.what());
                if (diagnostics) diagnostics->push_back(std::string("skipped: ") + e.what());
            }
        }
    }
    if (images.empty() && diagnostics) diagnostics->push_back("warning: no PNG images found under " + root.string());
    return images;
}

DatasetSplit load_dataset_tree(const fs::path& root, const PngTreeOptions& options,
                               std::vector<std::string>* diagnostics)
{
    const auto train_dir = root / "train";
    const auto test_dir = root / "test";
    if (!fs::is_directory(train_dir) || !fs::is_directory(test_dir)) {
        throw DatasetError("dataset root " + root.string() + " must contain train/ and test/ directories");
    }
    auto train = load_png_tree(train_dir, options, diagnostics);
    auto test = load_png_tree(test_dir, options, diagnostics);
    return make_split(std::move(train), std::move(test));
}

DatasetSplit make_split(std::vector<LabeledImage> train, std::vector<LabeledImage> test)
{
    check_disjoint(train, test);
    return finish(std::move(train), std::move(test));
}

DatasetSplit make_split(std::vector<LabeledImage> images, double test_fraction, SeededRng& rng)
{
    if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) throw DatasetError("test fraction must lie in [0, 1]");
    check_disjoint(images, {});

    std::vector<LabeledImage> train, test;
    for (int label : {kFake, kReal}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (images[i].label == label) members.push_back(i);
        }
        if (members.empty()) continue;
        const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
        if (test_fraction > 0.0 && test_fraction < 1.0 && (n_test == 0 || n_test == members.size())) {
            throw DatasetError("class " + std::to_string(label) + " has too few images (" +
                               std::to_string(members.size()) + ") for test fraction " + std::to_string(test_fraction));
        }
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t k = 0; k < members.size(); ++k) {
            (k < n_test ? test : train).push_back(std::move(images[members[k]]));
        }
    }
    return finish(std::move(train), std::move(test));
}

std::vector<LabeledImage> subsample_per_class(std::vector<LabeledImage> images, std::size_t per_class, SeededRng& rng)
{
    if (per_class == 0) return images;
    std::vector<char> keep(images.size(), 0);
    for (int label : {kFake, kReal}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (images[i].label == label) members.push_back(i);
        }
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t k = 0; k < std::min(per_class, members.size()); ++k) keep[members[k]] = 1;
    }
    std::vector<LabeledImage> out;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (keep[i]) out.push_back(std::move(images[i]));
    }
    return out;
}

std::vector<std::vector<std::size_t>> sequential_batches(std::size_t count, std::size_t batch_size)
{
    if (batch_size == 0) throw DatasetError("batch size must be at least 1");
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < count; start += batch_size) {
        std::vector<std::size_t> b(std::min(batch_size, count - start));
        std::iota(b.begin(), b.end(), start);
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t batch_size, SeededRng& rng)
{
    if (batch_size == 0) throw DatasetError("batch size must be at least 1");
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < count; start += batch_size) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(count, start + batch_size)));
    }
    return out;
}

Batch gather_batch(std::span<const LabeledImage> images, std::span<const std::size_t> indices)
{
    Batch b;
    b.images = Tensor4({indices.size(), kImageChannels, kImageSide, kImageSide});
    b.labels.reserve(indices.size());
    b.indices.assign(indices.begin(), indices.end());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto& img = images[indices[k]];
        if (img.pixels.size() != b.images.shape().item_size()) {
            throw DatasetError("image '" + img.source_id + "' is not 3x32x32");
        }
        std::copy(img.pixels.data().begin(), img.pixels.data().end(), b.images.item(k).begin());
        b.labels.push_back(static_cast<float>(img.label));
    }
    return b;
}

std::vector<Batch> batches(std::span<const LabeledImage> images, std::size_t batch_size, SeededRng& rng)
{
    std::vector<Batch> out;
    for (const auto& idx : batch_indices(images.size(), batch_size, rng)) out.push_back(gather_batch(images, idx));
    return out;
}

}  // namespace fakespot::data
