#ifndef SLICEFIND_PREPROCESS_HPP
#define SLICEFIND_PREPROCESS_HPP

#include <string>
#include <string_view>
#include <vector>

#include "slicefind/image.hpp"

namespace slicefind {

/// Preprocessing steps, single-letter codes:
///   r = rotation alignment, s = scaling alignment,
///   b = skull extraction, e = equalisation.
enum class PreprocStep : char {
    rotation = 'r',
    scaling = 's',
    skull_extraction = 'b',
    equalisation = 'e',
};

/// Ordered, duplicate-free list of steps. Application order is exactly the
/// listed order.
struct PreprocSpec {
    std::vector<PreprocStep> steps;

    /// Parse a code string such as "rebs". "" and "none" mean no steps.
    static PreprocSpec parse(std::string_view code);

    std::string code() const; // "none" when empty

    bool needs_reference() const;
    bool empty() const { return steps.empty(); }
};

/// Global histogram equalization over [0,255]. The intensity mapping is
/// monotone non-decreasing; a single-bin histogram leaves the image
/// unchanged.
GrayImage equalize(const GrayImage& img);

struct SkullExtraction {
    GrayImage image; ///< input with everything outside the mask set to 0
    GrayImage mask;  ///< binary mask, 255 inside
};

/// Brain mask via Otsu foreground -> largest 8-connected component ->
/// morphological closing (3x3 cross, 2 iterations) -> hole fill -> erosion
/// by a Euclidean margin of 4 px to shave the skull rim.
/// Throws empty_foreground when Otsu finds no foreground.
SkullExtraction skull_extract(const GrayImage& img);

struct Alignment {
    GrayImage image;     ///< moving resampled with the similarity transform
    double rotation_deg; ///< rotation applied to moving (clockwise positive)
    double scale_factor; ///< scale applied to moving
};

/// Moment-based rigid alignment of `moving` onto `fixed`: Otsu foreground
/// centroids and second-order central moments give principal-axis
/// orientations; rotation is their difference with the 180-degree ambiguity
/// resolved by mask-overlap maximization (ties toward smaller |rotation|);
/// scale is sqrt(area_fixed/area_moving). The moving image is resampled
/// about its centroid. Degenerate moments pin the rotation to 0.
Alignment align(const GrayImage& moving, const GrayImage& fixed);

/// One entry per executed step, parameters filled for r/s.
struct StepRecord {
    PreprocStep step;
    double rotation_deg = 0.0;
    double scale_factor = 1.0;
};

/// Apply steps in listed order. r/s align against `reference` and keep only
/// their own component; b and e need no reference. Throws missing_reference
/// when r or s appears without one.
GrayImage apply(const PreprocSpec& spec, const GrayImage& img,
                const GrayImage* reference = nullptr,
                std::vector<StepRecord>* trace = nullptr);

/// Otsu threshold maximizing between-class variance; foreground is the set
/// of pixels strictly above it. Exposed for inspection and tests.
int otsu_threshold(const GrayImage& img);

} // namespace slicefind

#endif
