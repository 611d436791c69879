#include "slicefind/degrade.hpp"

#include <cmath>
#include <cstdio>

#include "detail/normal.hpp"
#include "slicefind/error.hpp"

namespace slicefind {

bool Degradation::is_noop() const {
    switch (kind) {
    case DegradationKind::rotation: return rotation_deg == 0.0;
    case DegradationKind::scaling: return scale_factor == 1.0;
    case DegradationKind::noise: return noise_std == 0.0;
    }
    return true;
}

namespace {

std::string trimmed_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace

std::string Degradation::label() const {
    switch (kind) {
    case DegradationKind::rotation:
        return "rotation(" + trimmed_number(rotation_deg) + ")";
    case DegradationKind::scaling:
        return "scaling(" + trimmed_number(scale_factor) + ")";
    case DegradationKind::noise:
        return "noise(" + trimmed_number(noise_std) + ")";
    }
    return "none";
}

GrayImage rotate(const GrayImage& img, double deg) {
    deg = std::fmod(deg, 360.0);
    if (deg < 0.0) deg += 360.0;
    if (deg == 0.0) return img;

    // In y-down screen coordinates a clockwise turn by deg is the matrix
    // [[c,-s],[s,c]]; inverse mapping samples the source through its
    // transpose.
    const double rad = deg * std::acos(-1.0) / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;

    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double dy = y - cy;
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - cx;
            const double sx = cx + c * dx + s * dy;
            const double sy = cy - s * dx + c * dy;
            out.at(x, y) = clamp_u8(sample_bilinear_zero(img, sx, sy));
        }
    }
    return out;
}

GrayImage upscale(const GrayImage& img, double factor) {
    if (factor == 1.0) return img;
    if (!(factor > 0.0))
        raise(Errc::invalid_argument, "scale factor must be positive");

    const int out_w = static_cast<int>(std::llround(img.width * factor));
    const int out_h = static_cast<int>(std::llround(img.height * factor));
    if (out_w <= 0 || out_h <= 0)
        raise(Errc::zero_dimension, "scaled size is " + std::to_string(out_w) +
                                        "x" + std::to_string(out_h));

    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const double sy = (y + 0.5) / factor - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double sx = (x + 0.5) / factor - 0.5;
            out.at(x, y) = clamp_u8(sample_bilinear_clamp(img, sx, sy));
        }
    }
    return out;
}

GrayImage add_gaussian_noise(const GrayImage& img, double stddev,
                             std::uint64_t seed) {
    if (stddev == 0.0) return img;
    if (stddev < 0.0)
        raise(Errc::invalid_argument, "noise std must be non-negative");

    detail::NormalStream normal(seed);
    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = clamp_u8(img.data[i] + stddev * normal.next());
    return out;
}

GrayImage apply(const Degradation& degradation, const GrayImage& img) {
    switch (degradation.kind) {
    case DegradationKind::rotation: return rotate(img, degradation.rotation_deg);
    case DegradationKind::scaling: return upscale(img, degradation.scale_factor);
    case DegradationKind::noise:
        return add_gaussian_noise(img, degradation.noise_std, degradation.seed);
    }
    return img;
}

} // namespace slicefind
