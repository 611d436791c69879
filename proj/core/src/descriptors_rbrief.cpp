#include <cmath>
#include <vector>

#include "detail/normal.hpp"
#include "slicefind/descriptors.hpp"
#include "slicefind/error.hpp"

namespace slicefind {

namespace {

constexpr std::uint64_t kPatternSeed = 0x5F1CEF1D;
constexpr double kPatternSigma = 31.0 / 5.0;
constexpr int kPatternRadius = 13;
constexpr int kAngleSteps = 30; // 12-degree discretization

std::array<RBriefPair, kBinaryBits> generate_pattern() {
    detail::NormalStream normal(kPatternSeed);
    std::array<RBriefPair, kBinaryBits> pattern;
    for (auto& pair : pattern) {
        for (;;) {
            int v[4];
            for (int& coord : v)
                coord = static_cast<int>(
                    std::llround(kPatternSigma * normal.next()));
            if (v[0] * v[0] + v[1] * v[1] >
                    kPatternRadius * kPatternRadius ||
                v[2] * v[2] + v[3] * v[3] >
                    kPatternRadius * kPatternRadius)
                continue;
            pair = {v[0], v[1], v[2], v[3]};
            break;
        }
    }
    return pattern;
}

/// 5x5 box sums (full windows only; callers keep samples >= 2 px inside).
std::vector<std::int32_t> box5_sums(const GrayImage& img) {
    const int w = img.width, h = img.height;
    std::vector<std::int64_t> sat(static_cast<size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            sat[(y + 1) * (w + 1) + (x + 1)] =
                sat[y * (w + 1) + (x + 1)] + sat[(y + 1) * (w + 1) + x] -
                sat[y * (w + 1) + x] + img.at(x, y);

    std::vector<std::int32_t> sums(static_cast<size_t>(w) * h, 0);
    for (int y = 2; y < h - 2; ++y)
        for (int x = 2; x < w - 2; ++x) {
            const int x0 = x - 2, y0 = y - 2, x1 = x + 3, y1 = y + 3;
            sums[y * w + x] = static_cast<std::int32_t>(
                sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] -
                sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0]);
        }
    return sums;
}

} // namespace

const std::array<RBriefPair, kBinaryBits>& rbrief_pattern() {
    static const auto pattern = generate_pattern();
    return pattern;
}

DescriptorSet describe_rbrief(const GrayImage& img,
                              const std::vector<Keypoint>& kps,
                              DescribeStats* stats) {
    const auto& pattern = rbrief_pattern();
    const auto sums = box5_sums(img);
    DescriptorSet set;
    set.kind = DescriptorKind::binary256;
    DescribeStats local;

    // Rotated integer sample offsets per discretized angle step, built on
    // demand; scaling by diameter happens per keypoint.
    for (const auto& kp : kps) {
        if (!kp.has_angle())
            raise(Errc::undefined_angle,
                  "binary descriptor needs oriented keypoints");

        const int step =
            ((static_cast<int>(std::lround(kp.angle / 12.0)) % kAngleSteps) +
             kAngleSteps) %
            kAngleSteps;
        const double rad = step * 12.0 * std::acos(-1.0) / 180.0;
        const double c = std::cos(rad), s = std::sin(rad);
        const double scale = kp.diameter / 31.0;

        std::uint64_t words[kBinaryWords] = {};
        bool fits = true;
        for (int i = 0; i < kBinaryBits && fits; ++i) {
            const auto& [px, py, qx, qy] = pattern[i];
            // clockwise rotation, then per-keypoint scale
            const int sx_p = static_cast<int>(
                std::lround(kp.x + scale * (c * px - s * py)));
            const int sy_p = static_cast<int>(
                std::lround(kp.y + scale * (s * px + c * py)));
            const int sx_q = static_cast<int>(
                std::lround(kp.x + scale * (c * qx - s * qy)));
            const int sy_q = static_cast<int>(
                std::lround(kp.y + scale * (s * qx + c * qy)));
            if (sx_p < 2 || sy_p < 2 || sx_p >= img.width - 2 ||
                sy_p >= img.height - 2 || sx_q < 2 || sy_q < 2 ||
                sx_q >= img.width - 2 || sy_q >= img.height - 2) {
                fits = false;
                break;
            }
            if (sums[sy_p * img.width + sx_p] < sums[sy_q * img.width + sx_q])
                words[i / 64] |= std::uint64_t{1} << (i % 64);
        }
        if (!fits) {
            ++local.dropped_border;
            continue;
        }

        set.keypoints.push_back(kp);
        set.bits.insert(set.bits.end(), words, words + kBinaryWords);
    }

    if (stats) *stats = local;
    return set;
}

} // namespace slicefind
