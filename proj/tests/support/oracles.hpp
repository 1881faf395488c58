#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fakespot/nn/parameters.hpp"
#include "fakespot/nn/topology.hpp"
#include "fakespot/rng.hpp"
#include "fakespot/tensor.hpp"

// Reference implementations written directly from the definitions, sharing
// no code with the library beyond tensor storage.
namespace fakespot::testing {

class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

BasicTensor4<double> random_tensor(SeededRng& rng, Shape4 shape, double lo = -1.0, double hi = 1.0);

/// out(n,f,i,j) = b(f) + sum_c sum_m sum_n x(n,c,i+m,j+n) * k(f,c,m,n)
BasicTensor4<double> naive_conv(const BasicTensor4<double>& x, const BasicTensor4<double>& k, const BasicTensor4<double>& b);

/// 2x2 stride-2 max over complete windows.
BasicTensor4<double> naive_maxpool(const BasicTensor4<double>& x);

/// out(n,u) = b(u) + sum_i W(u,i) * x(n,i), x flattened per item.
BasicTensor4<double> naive_dense(const BasicTensor4<double>& x, const BasicTensor4<double>& w, const BasicTensor4<double>& b);

/// |a - n| / max(|a|, |n|, 1e-6)
double rel_error(double analytic, double numeric);

inline constexpr double kFdStep = 1e-5;

struct GradCheckStats {
    std::string name;
    std::size_t trials = 0;
    std::size_t rejected = 0;  // instances redrawn for sitting too close to a kink
    std::size_t checked_values = 0;
    double max_rel_error = 0.0;
};

/// Central finite differences in double against every analytic backward pass
/// (conv, ReLU, max-pool, dense, sigmoid+BCE) and the full network on random
/// small topologies (inputs <= 8x8, <= 4 channels).
std::vector<GradCheckStats> gradient_check_suite(std::uint64_t seed, std::size_t trials);

/// Random toy topology with 1 or 2 conv layers on an input of at most 8x8x4.
nn::ModelTopology random_toy_topology(SeededRng& rng);
nn::Parameters<double> random_parameters(const nn::ModelTopology& topology, SeededRng& rng, double scale = 0.8);

struct PlainMetrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Per-item recount; 0/0 ratios are 0.
PlainMetrics brute_force_metrics(std::span<const int> predicted, std::span<const int> truth);

/// ReLU(sum_k alpha_k A^k) with alpha_k = (1/Z) sum_i sum_j G^k(i,j), as nested loops.
BasicTensor4<double> brute_force_gradcam(const BasicTensor4<double>& activations, const BasicTensor4<double>& gradients);

/// Writes a standard CIFAR-10 binary file of `records` records: class byte r % 10
/// and pixel byte (r * 7 + i) % 256 at pixel offset i.
std::vector<unsigned char> cifar_fixture_bytes(std::size_t records);
unsigned char cifar_fixture_pixel(std::size_t record, std::size_t offset);

/// Single-colour side x side PNG at `path` (parent directories are created).
void write_solid_png(const std::filesystem::path& path, std::size_t side, float r, float g, float b);

/// Small PNG dataset tree: <root>/{train,test}/{FAKE,REAL}; FAKE images are dark
/// noise, REAL images bright noise. Deterministic in `seed`.
void write_toy_tree(const std::filesystem::path& root, std::size_t train_per_class, std::size_t test_per_class,
                    std::uint64_t seed = 7);

}  // namespace fakespot::testing
