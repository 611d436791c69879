#ifndef SLICEFIND_FEATURES_HPP
#define SLICEFIND_FEATURES_HPP

#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "slicefind/image.hpp"

namespace slicefind {

/// Orientation sentinel for detectors that do not assign one.
inline constexpr float kNoAngle = std::numeric_limits<float>::quiet_NaN();

struct Keypoint {
    float x = 0;        ///< sub-pixel column in the level-0 frame
    float y = 0;        ///< sub-pixel row in the level-0 frame
    float response = 0; ///< detector score, > 0 for detected points
    int octave = 0;     ///< pyramid level the point was found on
    float angle = kNoAngle; ///< degrees in [0,360), NaN when undefined
    float diameter = 7.0f;  ///< descriptor patch diameter in level-0 pixels

    bool has_angle() const { return !std::isnan(angle); }
};

struct DetectorConfig {
    int fast_threshold = 20;        ///< segment-test intensity delta
    double gftt_quality = 0.01;     ///< keep responses >= quality * max
    double gftt_min_distance = 8.0; ///< pixels between accepted corners
    int gftt_max_corners = 1000;
    int orb_n_features = 500;
    double orb_scale_factor = 1.2;
    int orb_n_levels = 8;

    void validate() const;
    static DetectorConfig from_json_file(const std::filesystem::path& path);
};

/// Segment-test corners (FAST-9 over the 16-pixel Bresenham circle): a
/// corner has >= 9 contiguous circle pixels all brighter than center+t or
/// all darker than center-t. The response is the largest threshold that
/// keeps the pixel a corner; 3x3 non-maximum suppression runs on that
/// response with raster-order tie-breaking so plateaus keep exactly one
/// point. Orientation is left undefined, octave 0.
std::vector<Keypoint> detect_agast(const GrayImage& img,
                                   const DetectorConfig& cfg = {});

/// Shi-Tomasi corners: min-eigenvalue of the structure tensor built from
/// 3x3 Sobel gradients under a 3x3 Gaussian window (sigma 1). Candidates
/// with response >= gftt_quality * max response are accepted greedily in
/// descending response, enforcing gftt_min_distance spacing, up to
/// gftt_max_corners. Orientation undefined.
std::vector<Keypoint> detect_gftt(const GrayImage& img,
                                  const DetectorConfig& cfg = {});

/// Pyramid oriented-FAST: FAST-9 per level (factor orb_scale_factor,
/// orb_n_levels levels), Harris re-ranking, global top orb_n_features.
/// Orientation is the intensity-centroid angle atan2(m01, m10) over a
/// radius-15 patch on the level image, reported in degrees [0,360).
/// Coordinates map back to the level-0 frame; diameter is 31 * level scale.
std::vector<Keypoint> detect_orb_keypoints(const GrayImage& img,
                                           const DetectorConfig& cfg = {});

/// Keypoint JSON: [{"x":f,"y":f,"response":f,"octave":i,"angle":f|null,
/// "diameter":f}, ...]
void save_keypoints(const std::vector<Keypoint>& kps,
                    const std::filesystem::path& path);
std::vector<Keypoint> load_keypoints(const std::filesystem::path& path);

} // namespace slicefind

#endif
