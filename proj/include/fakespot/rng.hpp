#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

#include "fakespot/tensor.hpp"

namespace fakespot {

/// Deterministic random source shared by every module.
///
/// Algorithm "fakespot-rng/1":
///   engine   std::mt19937_64 seeded with the 64-bit seed (fully specified by the
///            C++ standard, so the raw stream is identical on every platform).
///   uniform  (u64 >> 11) * 2^-53, a double in [0, 1).
///   below(n) rejection sampling on the raw u64 to remove modulo bias.
///   normal   Box-Muller: u1 = 1 - uniform(), u2 = uniform(),
///            r = sqrt(-2 ln u1); returns r*cos(2 pi u2), then r*sin(2 pi u2)
///            on the next call.
///
/// The standard library distributions are deliberately not used because their
/// output differs between standard library implementations.
class SeededRng {
public:
    static constexpr std::string_view algorithm = "fakespot-rng/1";

    explicit SeededRng(std::uint64_t seed = 1) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Independent stream for worker `index`: seeded with seed + index.
    SeededRng split(std::uint64_t index) const { return SeededRng(seed_ + index); }

    std::uint64_t next_u64() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    double normal();

    template <typename T>
    void shuffle(std::span<T> values)
    {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// I.i.d. Gaussian draws, mean + std * normal(), filled in storage order.
/// Throws std::invalid_argument for negative std.
Tensor4 sample_normal(SeededRng& rng, Shape4 shape, double mean, double std);

}  // namespace fakespot
