#include <algorithm>
#include <cmath>

#include "detail/fast.hpp"
#include "slicefind/error.hpp"
#include "slicefind/features.hpp"

namespace slicefind {

namespace {

GrayImage resize_to(const GrayImage& img, int out_w, int out_h) {
    if (out_w == img.width && out_h == img.height) return img;
    GrayImage out(out_w, out_h);
    const double fx = static_cast<double>(img.width) / out_w;
    const double fy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double sy = (y + 0.5) * fy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double sx = (x + 0.5) * fx - 0.5;
            out.at(x, y) = clamp_u8(sample_bilinear_clamp(img, sx, sy));
        }
    }
    return out;
}

/// Harris corner measure from Sobel gradients summed over a 7x7 block.
/// Requires x,y at least 4 px from the border.
double harris_at(const GrayImage& img, int x, int y) {
    double a = 0.0, b = 0.0, c = 0.0;
    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx) {
            const auto [ix, iy] = detail::sobel_at(img, x + dx, y + dy);
            a += static_cast<double>(ix) * ix;
            b += static_cast<double>(ix) * iy;
            c += static_cast<double>(iy) * iy;
        }
    // Normalize so responses stay in a comparable range across images.
    const double scale = 1.0 / (7.0 * 7.0 * 255.0 * 4.0);
    a *= scale * scale;
    b *= scale * scale;
    c *= scale * scale;
    return a * c - b * b - 0.04 * (a + c) * (a + c);
}

/// Intensity-centroid angle over a radius-15 disk, degrees in [0,360).
float centroid_angle(const GrayImage& img, int x, int y) {
    double m10 = 0.0, m01 = 0.0;
    for (int dy = -15; dy <= 15; ++dy)
        for (int dx = -15; dx <= 15; ++dx) {
            if (dx * dx + dy * dy > 15 * 15) continue;
            const double v = img.at(x + dx, y + dy);
            m10 += dx * v;
            m01 += dy * v;
        }
    double deg = std::atan2(m01, m10) * 180.0 / std::acos(-1.0);
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    return static_cast<float>(deg);
}

} // namespace

std::vector<Keypoint> detect_orb_keypoints(const GrayImage& img,
                                           const DetectorConfig& cfg) {
    cfg.validate();
    const double top_scale =
        std::pow(cfg.orb_scale_factor, cfg.orb_n_levels - 1);
    if (std::llround(img.width / top_scale) < 32 ||
        std::llround(img.height / top_scale) < 32)
        raise(Errc::image_too_small,
              "top pyramid level must be at least 32x32");

    std::vector<Keypoint> all;
    for (int level = 0; level < cfg.orb_n_levels; ++level) {
        const double scale = std::pow(cfg.orb_scale_factor, level);
        const int lw = static_cast<int>(std::llround(img.width / scale));
        const int lh = static_cast<int>(std::llround(img.height / scale));
        const GrayImage lvl = resize_to(img, lw, lh);

        for (const auto& kp : detail::fast9_detect(lvl, cfg.fast_threshold)) {
            const int x = static_cast<int>(kp.x), y = static_cast<int>(kp.y);
            // Orientation patch (radius 15) must fit on the level image.
            if (x < 16 || y < 16 || x >= lw - 16 || y >= lh - 16) continue;
            const double harris = harris_at(lvl, x, y);
            if (harris <= 0.0) continue; // edge-like, Harris rejects

            Keypoint out;
            out.x = static_cast<float>(x * scale);
            out.y = static_cast<float>(y * scale);
            out.response = static_cast<float>(harris);
            out.octave = level;
            out.angle = centroid_angle(lvl, x, y);
            out.diameter = static_cast<float>(31.0 * scale);
            all.push_back(out);
        }
    }

    std::sort(all.begin(), all.end(), [](const Keypoint& l, const Keypoint& r) {
        if (l.response != r.response) return l.response > r.response;
        if (l.y != r.y) return l.y < r.y;
        if (l.x != r.x) return l.x < r.x;
        return l.octave < r.octave;
    });
    if (static_cast<int>(all.size()) > cfg.orb_n_features)
        all.resize(cfg.orb_n_features);
    return all;
}

} // namespace slicefind
