#include "fakespot/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fakespot {

std::uint64_t SeededRng::below(std::uint64_t n)
{
    if (n == 0) throw std::invalid_argument("SeededRng::below: empty range");
    // Largest multiple of n representable in 64 bits; draws at or above it are rejected.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

double SeededRng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

Tensor4 sample_normal(SeededRng& rng, Shape4 shape, double mean, double std)
{
    if (!(std >= 0.0)) throw std::invalid_argument("sample_normal: std must be non-negative");
    Tensor4 out(shape);
    for (float& v : out.data()) v = static_cast<float>(mean + std * rng.normal());
    return out;
}

}  // namespace fakespot
