#ifndef SLICEFIND_IMAGE_HPP
#define SLICEFIND_IMAGE_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "slicefind/error.hpp"

namespace slicefind {

/// 8-bit single-channel raster, row-major, origin top-left.
/// x indexes columns, y indexes rows, pixel centers sit at integer
/// coordinates. Treated as immutable once built; copying is cheap enough
/// for the slice sizes this library works with.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;

    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h) {
        if (w < 1 || h < 1)
            raise(Errc::zero_dimension,
                  "image dimensions must be >= 1, got " + std::to_string(w) +
                      "x" + std::to_string(h));
        data.assign(static_cast<std::size_t>(w) * h, fill);
    }

    std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return data[static_cast<std::size_t>(y) * width + x];
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }

    std::size_t pixel_count() const { return data.size(); }

    bool operator==(const GrayImage&) const = default;
};

/// Round-half-up into [0,255].
inline std::uint8_t clamp_u8(double v) {
    double r = std::floor(v + 0.5);
    if (r < 0.0) return 0;
    if (r > 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

/// Bilinear sample; coordinates outside the raster read as 0.
inline double sample_bilinear_zero(const GrayImage& img, double x, double y) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;
    auto px = [&](int xi, int yi) -> double {
        return img.in_bounds(xi, yi) ? img.at(xi, yi) : 0.0;
    };
    return px(x0, y0) * (1 - fx) * (1 - fy) + px(x0 + 1, y0) * fx * (1 - fy) +
           px(x0, y0 + 1) * (1 - fx) * fy + px(x0 + 1, y0 + 1) * fx * fy;
}

/// Bilinear sample with edge clamping (used where content must not bleed
/// to black, e.g. uniform upscaling).
inline double sample_bilinear_clamp(const GrayImage& img, double x, double y) {
    auto clampi = [](int v, int lo, int hi) {
        return v < lo ? lo : (v > hi ? hi : v);
    };
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;
    auto px = [&](int xi, int yi) -> double {
        return img.at(clampi(xi, 0, img.width - 1), clampi(yi, 0, img.height - 1));
    };
    return px(x0, y0) * (1 - fx) * (1 - fy) + px(x0 + 1, y0) * fx * (1 - fy) +
           px(x0, y0 + 1) * (1 - fx) * fy + px(x0 + 1, y0 + 1) * fx * fy;
}

} // namespace slicefind

#endif
