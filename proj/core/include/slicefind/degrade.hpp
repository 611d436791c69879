#ifndef SLICEFIND_DEGRADE_HPP
#define SLICEFIND_DEGRADE_HPP

#include <cstdint>
#include <string>

#include "slicefind/image.hpp"

namespace slicefind {

enum class DegradationKind { rotation, scaling, noise };

/// One controlled degradation applied to a query slice before matching.
/// Exactly the fields of the active kind are meaningful.
struct Degradation {
    DegradationKind kind = DegradationKind::rotation;
    double rotation_deg = 0.0;
    double scale_factor = 1.0;
    double noise_std = 0.0;
    std::uint64_t seed = 0;

    static Degradation rotation(double deg) {
        Degradation d;
        d.kind = DegradationKind::rotation;
        d.rotation_deg = deg;
        return d;
    }
    static Degradation scaling(double factor) {
        Degradation d;
        d.kind = DegradationKind::scaling;
        d.scale_factor = factor;
        return d;
    }
    static Degradation gaussian_noise(double stddev, std::uint64_t seed) {
        Degradation d;
        d.kind = DegradationKind::noise;
        d.noise_std = stddev;
        d.seed = seed;
        return d;
    }

    /// Identity transform (rotation 0, scale 1, std 0)?
    bool is_noop() const;

    /// Short label for reports, e.g. "rotation(5)", "scaling(1.05)",
    /// "noise(30)".
    std::string label() const;
};

/// Rotate about the image center, clockwise positive, bilinear resampling,
/// out-of-bounds source reads as 0. Canvas keeps the input size. Angles are
/// normalized mod 360; an exact 0 returns the input unchanged.
GrayImage rotate(const GrayImage& img, double deg);

/// Uniform rescale to round(width*factor) x round(height*factor) with
/// bilinear, center-aligned sampling. factor 1.0 is the bit-exact identity.
/// Throws zero_dimension when a rounded output dimension is 0.
GrayImage upscale(const GrayImage& img, double factor);

/// Add an independent N(0, std^2) draw to each pixel, round, clamp to
/// [0,255]. Draws come from a fixed Box-Muller transform over mt19937_64 so
/// identical (img, std, seed) produce byte-identical output on every
/// platform. std 0 returns the input unchanged.
GrayImage add_gaussian_noise(const GrayImage& img, double stddev,
                             std::uint64_t seed);

GrayImage apply(const Degradation& degradation, const GrayImage& img);

} // namespace slicefind

#endif
