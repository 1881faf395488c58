#include "fakespot/data/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <system_error>
#include <vector>

#include "fakespot/atomic_file.hpp"

namespace fakespot::data {

unsigned char to_byte(float v) noexcept
{
    const float c = std::clamp(std::isnan(v) ? 0.0f : v, 0.0f, 1.0f);
    return static_cast<unsigned char>(std::lround(c * 255.0f));
}

Tensor4 read_png(const std::filesystem::path& path)
{
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw ImageError("cannot decode PNG " + path.string() + ": " + img.message);
    }
    img.format = PNG_FORMAT_RGBA;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = img.message;
        png_image_free(&img);
        throw ImageError("cannot decode PNG " + path.string() + ": " + msg);
    }
    const std::size_t h = img.height, w = img.width;
    Tensor4 out({1, 3, h, w});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const png_byte* px = buffer.data() + (y * w + x) * 4;
            for (std::size_t c = 0; c < 3; ++c) out(0, c, y, x) = static_cast<float>(px[c]) / 255.0f;
        }
    }
    return out;
}

void write_png(const std::filesystem::path& path, const Tensor4& image)
{
    const auto& s = image.shape();
    if (s.n != 1 || s.c != 3) throw ImageError("write_png: expected a (1,3,H,W) image, got " + to_string(s));
    std::vector<png_byte> buffer(s.h * s.w * 3);
    for (std::size_t y = 0; y < s.h; ++y) {
        for (std::size_t x = 0; x < s.w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) buffer[(y * s.w + x) * 3 + c] = to_byte(image(0, c, y, x));
        }
    }
    write_atomically(path, [&](const std::filesystem::path& tmp) {
        png_image img;
        std::memset(&img, 0, sizeof img);
        img.version = PNG_IMAGE_VERSION;
        img.width = static_cast<png_uint_32>(s.w);
        img.height = static_cast<png_uint_32>(s.h);
        img.format = PNG_FORMAT_RGB;
        if (!png_image_write_to_file(&img, tmp.c_str(), 0, buffer.data(), 0, nullptr)) {
            throw ImageError("cannot write PNG " + path.string() + ": " + img.message);
        }
    });
}

Tensor4 resize_bilinear(const Tensor4& image, std::size_t out_h, std::size_t out_w)
{
    const auto& s = image.shape();
    if (out_h == 0 || out_w == 0 || s.h == 0 || s.w == 0) throw ImageError("resize_bilinear: empty extent");
    if (s.h == out_h && s.w == out_w) return image;

    struct Tap {
        std::size_t lo, hi;
        float frac;
    };
    auto taps = [](std::size_t in, std::size_t out) {
        std::vector<Tap> t(out);
        const double scale = static_cast<double>(in) / static_cast<double>(out);
        for (std::size_t d = 0; d < out; ++d) {
            double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
            src = std::clamp(src, 0.0, static_cast<double>(in - 1));
            const auto lo = static_cast<std::size_t>(std::floor(src));
            const auto hi = std::min(lo + 1, in - 1);
            t[d] = {lo, hi, static_cast<float>(src - static_cast<double>(lo))};
        }
        return t;
    };
    const auto ty = taps(s.h, out_h);
    const auto tx = taps(s.w, out_w);

    Tensor4 out({s.n, s.c, out_h, out_w});
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t y = 0; y < out_h; ++y) {
                const auto& a = ty[y];
                for (std::size_t x = 0; x < out_w; ++x) {
                    const auto& b = tx[x];
                    const float top = image(n, c, a.lo, b.lo) + b.frac * (image(n, c, a.lo, b.hi) - image(n, c, a.lo, b.lo));
                    const float bot = image(n, c, a.hi, b.lo) + b.frac * (image(n, c, a.hi, b.hi) - image(n, c, a.hi, b.lo));
                    out(n, c, y, x) = top + a.frac * (bot - top);
                }
            }
        }
    }
    return out;
}

Tensor4 enlarge_nearest(const Tensor4& image, std::size_t factor)
{
    if (factor == 0) throw ImageError("enlarge_nearest: factor must be positive");
    const auto& s = image.shape();
    Tensor4 out({s.n, s.c, s.h * factor, s.w * factor});
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t y = 0; y < s.h * factor; ++y) {
                for (std::size_t x = 0; x < s.w * factor; ++x) out(n, c, y, x) = image(n, c, y / factor, x / factor);
            }
        }
    }
    return out;
}

}  // namespace fakespot::data
