#ifndef SLICEFIND_DESCRIPTORS_HPP
#define SLICEFIND_DESCRIPTORS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "slicefind/features.hpp"
#include "slicefind/image.hpp"

namespace slicefind {

enum class DescriptorKind { float128, binary256 };

const char* to_string(DescriptorKind kind);

inline constexpr int kFloatDim = 128;
inline constexpr int kBinaryBits = 256;
inline constexpr int kBinaryWords = kBinaryBits / 64;

/// Descriptors aligned 1:1 with their keypoints. Float descriptors are
/// unit-norm except for degenerate (all-zero) ones, which stay in the set
/// to preserve alignment and are skipped by the matcher. Binary descriptors
/// pack bit i into word i/64 at bit position i%64.
struct DescriptorSet {
    DescriptorKind kind = DescriptorKind::float128;
    std::vector<Keypoint> keypoints;
    std::vector<float> floats;        ///< size() * 128 when float128
    std::vector<std::uint64_t> bits;  ///< size() * 4 when binary256

    std::size_t size() const { return keypoints.size(); }
    bool empty() const { return keypoints.empty(); }

    std::span<const float> float_vec(std::size_t i) const {
        return {floats.data() + i * kFloatDim, kFloatDim};
    }
    std::span<const std::uint64_t> bit_vec(std::size_t i) const {
        return {bits.data() + i * kBinaryWords, kBinaryWords};
    }

    /// Degenerate zero float descriptor (constant patch)?
    bool is_zero(std::size_t i) const;
};

struct DescribeStats {
    int dropped_border = 0; ///< keypoints whose sample window did not fit
    int degenerate = 0;     ///< zero-gradient patches kept as zero vectors
};

/// SIFT descriptor at each keypoint: 16x16 gradient samples (Sobel,
/// bilinear-interpolated), rotated by the keypoint angle when defined,
/// binned into 4x4 spatial cells x 8 orientation bins with trilinear
/// interpolation under a Gaussian window (sigma 8); L2-normalized, clamped
/// at 0.2, renormalized. Border keypoints are dropped, alignment kept.
DescriptorSet describe_sift(const GrayImage& img,
                            const std::vector<Keypoint>& kps,
                            DescribeStats* stats = nullptr);

/// Rotated-BRIEF: 256 fixed test pairs in a 31x31 patch, rotated by the
/// keypoint angle discretized to 12-degree steps, offsets scaled by
/// diameter/31 so pyramid keypoints sample at their own scale; the image is
/// box-smoothed 5x5 first; bit i = 1 iff intensity(p_i) < intensity(q_i).
/// Throws undefined_angle for keypoints without orientation; keypoints
/// whose patch does not fit are dropped with alignment kept.
DescriptorSet describe_rbrief(const GrayImage& img,
                              const std::vector<Keypoint>& kps,
                              DescribeStats* stats = nullptr);

/// One comparison-pair endpoint pair {px, py, qx, qy}.
using RBriefPair = std::array<int, 4>;

/// The fixed 256-pair test pattern: points drawn from N(0, (31/5)^2) via a
/// seeded generator (seed 0x5F1CEF1D), pairs redrawn while either endpoint
/// exceeds radius 13. Identical in every process; pinned by a golden test.
const std::array<RBriefPair, kBinaryBits>& rbrief_pattern();

/// External-feature JSON:
///   {"kind":"float128"|"binary256", "method":str, "slice_index":int,
///    "keypoints":[...], "descriptors":[[128 floats]|"64-hex-chars", ...]}
/// Float vectors off unit norm by more than 1e-3 are renormalized with a
/// warning; zero vectors are rejected (norm_violation).
DescriptorSet load_external(const std::filesystem::path& path);

/// Companion writer used by tooling and tests; `method` and `slice_index`
/// fill the schema fields.
void save_external(const DescriptorSet& set, const std::string& method,
                   int slice_index, const std::filesystem::path& path);

} // namespace slicefind

#endif
