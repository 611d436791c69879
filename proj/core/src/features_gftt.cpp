#include <algorithm>
#include <cmath>

#include "detail/fast.hpp"
#include "slicefind/error.hpp"
#include "slicefind/features.hpp"

namespace slicefind {

std::vector<Keypoint> detect_gftt(const GrayImage& img,
                                  const DetectorConfig& cfg) {
    cfg.validate();
    const int w = img.width, h = img.height;
    if (w < 7 || h < 7)
        raise(Errc::image_too_small, "corner window needs at least 7x7");

    // Sobel gradients on the interior; pixels without a full 3x3 stencil
    // stay zero and the response window below never reaches them.
    std::vector<float> gx(static_cast<size_t>(w) * h, 0.0f);
    std::vector<float> gy(static_cast<size_t>(w) * h, 0.0f);
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            const auto [dx, dy] = detail::sobel_at(img, x, y);
            gx[y * w + x] = static_cast<float>(dx);
            gy[y * w + x] = static_cast<float>(dy);
        }

    // 3x3 Gaussian window, sigma 1, normalized.
    double weights[3][3];
    double wsum = 0.0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            weights[dy + 1][dx + 1] = std::exp(-(dx * dx + dy * dy) / 2.0);
            wsum += weights[dy + 1][dx + 1];
        }
    for (auto& row : weights)
        for (double& v : row) v /= wsum;

    std::vector<float> resp(static_cast<size_t>(w) * h, 0.0f);
    float max_resp = 0.0f;
    for (int y = 2; y < h - 2; ++y)
        for (int x = 2; x < w - 2; ++x) {
            double a = 0.0, b = 0.0, c = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const double wgt = weights[dy + 1][dx + 1];
                    const double ix = gx[(y + dy) * w + (x + dx)];
                    const double iy = gy[(y + dy) * w + (x + dx)];
                    a += wgt * ix * ix;
                    b += wgt * ix * iy;
                    c += wgt * iy * iy;
                }
            const double half_tr = (a + c) / 2.0;
            const double root =
                std::sqrt((a - c) * (a - c) / 4.0 + b * b);
            const auto lambda_min = static_cast<float>(half_tr - root);
            resp[y * w + x] = lambda_min;
            max_resp = std::max(max_resp, lambda_min);
        }
    if (max_resp <= 0.0f) return {};

    const auto cutoff = static_cast<float>(cfg.gftt_quality * max_resp);
    std::vector<Keypoint> candidates;
    for (int y = 2; y < h - 2; ++y)
        for (int x = 2; x < w - 2; ++x) {
            const float r = resp[y * w + x];
            if (r > 0.0f && r >= cutoff)
                candidates.push_back({static_cast<float>(x),
                                      static_cast<float>(y), r, 0, kNoAngle,
                                      7.0f});
        }

    std::sort(candidates.begin(), candidates.end(),
              [](const Keypoint& l, const Keypoint& r) {
                  if (l.response != r.response) return l.response > r.response;
                  if (l.y != r.y) return l.y < r.y;
                  return l.x < r.x;
              });

    const double min_d2 = cfg.gftt_min_distance * cfg.gftt_min_distance;
    std::vector<Keypoint> out;
    for (const auto& kp : candidates) {
        bool ok = true;
        for (const auto& acc : out) {
            const double dx = kp.x - acc.x, dy = kp.y - acc.y;
            if (dx * dx + dy * dy < min_d2) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.push_back(kp);
            if (static_cast<int>(out.size()) >= cfg.gftt_max_corners) break;
        }
    }
    return out;
}

} // namespace slicefind
