#include <cmath>

#include "slicefind/descriptors.hpp"
#include "slicefind/error.hpp"

namespace slicefind {

const char* to_string(DescriptorKind kind) {
    return kind == DescriptorKind::float128 ? "float128" : "binary256";
}

bool DescriptorSet::is_zero(std::size_t i) const {
    if (kind != DescriptorKind::float128) return false;
    for (float v : float_vec(i))
        if (v != 0.0f) return false;
    return true;
}

namespace {

constexpr int kPatch = 18;         // intensity samples, 16x16 gradient core
constexpr double kSigma = 8.0;     // Gaussian window relative to center
constexpr double kClamp = 0.2;

/// Samples the 18x18 patch around (cx,cy) rotated by deg (clockwise).
/// Returns false when any sample falls outside the image.
bool sample_patch(const GrayImage& img, double cx, double cy, double deg,
                  double patch[kPatch][kPatch]) {
    const double rad = deg * std::acos(-1.0) / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    for (int j = 0; j < kPatch; ++j) {
        const double v = j - (kPatch - 1) / 2.0;
        for (int i = 0; i < kPatch; ++i) {
            const double u = i - (kPatch - 1) / 2.0;
            const double x = cx + c * u - s * v;
            const double y = cy + s * u + c * v;
            if (x < 0.0 || y < 0.0 || x > img.width - 1 || y > img.height - 1)
                return false;
            patch[j][i] = sample_bilinear_clamp(img, x, y);
        }
    }
    return true;
}

} // namespace

DescriptorSet describe_sift(const GrayImage& img,
                            const std::vector<Keypoint>& kps,
                            DescribeStats* stats) {
    DescriptorSet set;
    set.kind = DescriptorKind::float128;
    DescribeStats local;

    double patch[kPatch][kPatch];
    for (const auto& kp : kps) {
        const double deg = kp.has_angle() ? kp.angle : 0.0;
        if (!sample_patch(img, kp.x, kp.y, deg, patch)) {
            ++local.dropped_border;
            continue;
        }

        double hist[4][4][8] = {};
        for (int j = 1; j <= 16; ++j) {
            const double v = j - (kPatch - 1) / 2.0; // -7.5 .. 7.5
            for (int i = 1; i <= 16; ++i) {
                const double u = i - (kPatch - 1) / 2.0;
                // Sobel inside the (already rotated) patch frame.
                const double gx =
                    (patch[j - 1][i + 1] + 2 * patch[j][i + 1] +
                     patch[j + 1][i + 1]) -
                    (patch[j - 1][i - 1] + 2 * patch[j][i - 1] +
                     patch[j + 1][i - 1]);
                const double gy =
                    (patch[j + 1][i - 1] + 2 * patch[j + 1][i] +
                     patch[j + 1][i + 1]) -
                    (patch[j - 1][i - 1] + 2 * patch[j - 1][i] +
                     patch[j - 1][i + 1]);
                const double mag = std::hypot(gx, gy);
                if (mag == 0.0) continue;

                double theta = std::atan2(gy, gx) * 180.0 / std::acos(-1.0);
                if (theta < 0.0) theta += 360.0;
                const double obin = theta / 45.0;           // [0,8)
                const double cbin_x = (u + 8.0) / 4.0 - 0.5; // [-0.375,3.375]
                const double cbin_y = (v + 8.0) / 4.0 - 0.5;
                const double w =
                    mag * std::exp(-(u * u + v * v) / (2.0 * kSigma * kSigma));

                const int x0 = static_cast<int>(std::floor(cbin_x));
                const int y0 = static_cast<int>(std::floor(cbin_y));
                const int o0 = static_cast<int>(std::floor(obin)) % 8;
                const double fx = cbin_x - std::floor(cbin_x);
                const double fy = cbin_y - std::floor(cbin_y);
                const double fo = obin - std::floor(obin);

                for (int dy = 0; dy <= 1; ++dy) {
                    const int by = y0 + dy;
                    if (by < 0 || by > 3) continue;
                    const double wy = dy ? fy : 1.0 - fy;
                    for (int dx = 0; dx <= 1; ++dx) {
                        const int bx = x0 + dx;
                        if (bx < 0 || bx > 3) continue;
                        const double wx = dx ? fx : 1.0 - fx;
                        for (int dq = 0; dq <= 1; ++dq) {
                            const int bo = (o0 + dq) % 8;
                            const double wo = dq ? fo : 1.0 - fo;
                            hist[by][bx][bo] += w * wy * wx * wo;
                        }
                    }
                }
            }
        }

        float desc[kFloatDim];
        double norm2 = 0.0;
        for (int by = 0; by < 4; ++by)
            for (int bx = 0; bx < 4; ++bx)
                for (int o = 0; o < 8; ++o) {
                    const double val = hist[by][bx][o];
                    desc[(by * 4 + bx) * 8 + o] = static_cast<float>(val);
                    norm2 += val * val;
                }

        if (norm2 == 0.0) {
            ++local.degenerate;
            for (float& v : desc) v = 0.0f;
        } else {
            double norm = std::sqrt(norm2);
            for (float& v : desc)
                v = static_cast<float>(
                    std::min(static_cast<double>(v) / norm, kClamp));
            norm2 = 0.0;
            for (float v : desc) norm2 += static_cast<double>(v) * v;
            norm = std::sqrt(norm2);
            for (float& v : desc) v = static_cast<float>(v / norm);
        }

        set.keypoints.push_back(kp);
        set.floats.insert(set.floats.end(), desc, desc + kFloatDim);
    }

    if (stats) *stats = local;
    return set;
}

} // namespace slicefind
