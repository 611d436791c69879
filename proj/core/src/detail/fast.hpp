#ifndef SLICEFIND_DETAIL_FAST_HPP
#define SLICEFIND_DETAIL_FAST_HPP

#include <array>
#include <vector>

#include "slicefind/features.hpp"
#include "slicefind/image.hpp"

namespace slicefind::detail {

/// Bresenham circle of radius 3, clockwise from 12 o'clock.
inline constexpr std::array<std::pair<int, int>, 16> kCircle{{
    {0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1}, {2, 2}, {1, 3},
    {0, 3}, {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3},
}};

/// Largest v such that some 9-long contiguous arc has all circle pixels
/// brighter than center+v-1 or all darker than center-v+1. The point is a
/// segment-test corner at threshold t exactly when the returned score > t.
inline int fast9_score(const GrayImage& img, int x, int y) {
    const int c = img.at(x, y);
    int d[24];
    for (int i = 0; i < 16; ++i)
        d[i] = img.at(x + kCircle[i].first, y + kCircle[i].second) - c;
    for (int i = 0; i < 8; ++i) d[16 + i] = d[i];

    int score = 0;
    for (int start = 0; start < 16; ++start) {
        int mn = d[start], mx = d[start];
        for (int i = start + 1; i < start + 9; ++i) {
            mn = std::min(mn, d[i]);
            mx = std::max(mx, d[i]);
        }
        score = std::max(score, std::max(mn, -mx));
    }
    return score;
}

/// FAST-9 corners with the max-threshold response and 3x3 non-maximum
/// suppression; equal-response neighbours keep the raster-order first.
/// Returned in raster order, octave 0, no angle.
inline std::vector<Keypoint> fast9_detect(const GrayImage& img,
                                          int threshold) {
    const int w = img.width, h = img.height;
    if (w < 7 || h < 7) return {};

    std::vector<int> resp(static_cast<size_t>(w) * h, 0);
    for (int y = 3; y < h - 3; ++y)
        for (int x = 3; x < w - 3; ++x) {
            const int c = img.at(x, y);
            const int d0 = img.at(x, y - 3) - c;
            const int d8 = img.at(x, y + 3) - c;
            // A 9-arc always covers one of two antipodal circle pixels.
            if (std::max(d0, d8) <= threshold &&
                std::max(-d0, -d8) <= threshold)
                continue;
            const int score = fast9_score(img, x, y);
            if (score > threshold) resp[y * w + x] = score - 1;
        }

    std::vector<Keypoint> out;
    for (int y = 3; y < h - 3; ++y)
        for (int x = 3; x < w - 3; ++x) {
            const int r = resp[y * w + x];
            if (r == 0) continue;
            bool keep = true;
            for (int dy = -1; dy <= 1 && keep; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int rn = resp[(y + dy) * w + (x + dx)];
                    if (rn > r || (rn == r && (dy < 0 || (dy == 0 && dx < 0)))) {
                        keep = false;
                        break;
                    }
                }
            if (keep)
                out.push_back({static_cast<float>(x), static_cast<float>(y),
                               static_cast<float>(r), 0, kNoAngle, 7.0f});
        }
    return out;
}

/// 3x3 Sobel at an interior pixel (1 <= x < w-1, same for y).
inline std::pair<int, int> sobel_at(const GrayImage& img, int x, int y) {
    const int tl = img.at(x - 1, y - 1), tc = img.at(x, y - 1),
              tr = img.at(x + 1, y - 1);
    const int ml = img.at(x - 1, y), mr = img.at(x + 1, y);
    const int bl = img.at(x - 1, y + 1), bc = img.at(x, y + 1),
              br = img.at(x + 1, y + 1);
    const int gx = (tr + 2 * mr + br) - (tl + 2 * ml + bl);
    const int gy = (bl + 2 * bc + br) - (tl + 2 * tc + tr);
    return {gx, gy};
}

} // namespace slicefind::detail

#endif
