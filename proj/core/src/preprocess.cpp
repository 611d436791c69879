#include "slicefind/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "slicefind/error.hpp"

namespace slicefind {

PreprocSpec PreprocSpec::parse(std::string_view code) {
    PreprocSpec spec;
    if (code.empty() || code == "none") return spec;
    for (char ch : code) {
        PreprocStep step;
        switch (ch) {
        case 'r': step = PreprocStep::rotation; break;
        case 's': step = PreprocStep::scaling; break;
        case 'b': step = PreprocStep::skull_extraction; break;
        case 'e': step = PreprocStep::equalisation; break;
        default:
            raise(Errc::invalid_argument,
                  std::string("unknown preprocessing step '") + ch + "'");
        }
        if (std::find(spec.steps.begin(), spec.steps.end(), step) !=
            spec.steps.end())
            raise(Errc::invalid_argument,
                  std::string("duplicate preprocessing step '") + ch + "'");
        spec.steps.push_back(step);
    }
    return spec;
}

std::string PreprocSpec::code() const {
    if (steps.empty()) return "none";
    std::string s;
    for (auto step : steps) s += static_cast<char>(step);
    return s;
}

bool PreprocSpec::needs_reference() const {
    for (auto step : steps)
        if (step == PreprocStep::rotation || step == PreprocStep::scaling)
            return true;
    return false;
}

// ---------------------------------------------------------------------------
// Histogram equalization

GrayImage equalize(const GrayImage& img) {
    std::array<long long, 256> hist{};
    for (uint8_t v : img.data) ++hist[v];

    std::array<long long, 256> cdf{};
    std::partial_sum(hist.begin(), hist.end(), cdf.begin());
    const long long total = cdf[255];

    long long cdf_min = 0;
    for (int v = 0; v < 256; ++v)
        if (hist[v] > 0) {
            cdf_min = cdf[v];
            break;
        }
    if (cdf_min == total) return img; // single occupied bin

    std::array<uint8_t, 256> lut{};
    const double denom = static_cast<double>(total - cdf_min);
    for (int v = 0; v < 256; ++v)
        lut[v] = clamp_u8((cdf[v] - cdf_min) / denom * 255.0);

    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = lut[img.data[i]];
    return out;
}

// ---------------------------------------------------------------------------
// Otsu threshold

int otsu_threshold(const GrayImage& img) {
    std::array<long long, 256> hist{};
    for (uint8_t v : img.data) ++hist[v];
    const auto total = static_cast<double>(img.data.size());

    double sum_all = 0.0;
    for (int v = 0; v < 256; ++v) sum_all += static_cast<double>(v) * hist[v];

    double best_var = -1.0;
    int best_t = 0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < 256; ++t) {
        w0 += hist[t];
        sum0 += static_cast<double>(t) * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

// ---------------------------------------------------------------------------
// Binary mask helpers (masks are GrayImages holding 0 or 255)

namespace {

GrayImage threshold_above(const GrayImage& img, int t) {
    GrayImage mask(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i)
        mask.data[i] = img.data[i] > t ? 255 : 0;
    return mask;
}

long long mask_area(const GrayImage& mask) {
    long long n = 0;
    for (uint8_t v : mask.data) n += v != 0;
    return n;
}

/// Keeps only the largest 8-connected foreground component (ties broken by
/// the component containing the earliest raster-order pixel).
GrayImage largest_component(const GrayImage& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<int> label(static_cast<size_t>(w) * h, -1);
    std::vector<int> stack;
    int best_label = -1;
    long long best_size = 0;
    int next_label = 0;

    for (int start = 0; start < w * h; ++start) {
        if (mask.data[start] == 0 || label[start] >= 0) continue;
        const int cur = next_label++;
        long long size = 0;
        stack.assign(1, start);
        label[start] = cur;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            ++size;
            const int px = p % w, py = p / w;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = px + dx, ny = py + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const int q = ny * w + nx;
                    if (mask.data[q] != 0 && label[q] < 0) {
                        label[q] = cur;
                        stack.push_back(q);
                    }
                }
        }
        if (size > best_size) {
            best_size = size;
            best_label = cur;
        }
    }

    GrayImage out(w, h);
    for (int p = 0; p < w * h; ++p)
        out.data[p] = (label[p] == best_label && best_label >= 0) ? 255 : 0;
    return out;
}

/// offsets must include (0,0); out-of-bounds neighbours count as background.
GrayImage dilate(const GrayImage& mask,
                 const std::vector<std::pair<int, int>>& offsets) {
    GrayImage out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            uint8_t v = 0;
            for (auto [dx, dy] : offsets) {
                const int nx = x + dx, ny = y + dy;
                if (mask.in_bounds(nx, ny) && mask.at(nx, ny) != 0) {
                    v = 255;
                    break;
                }
            }
            out.at(x, y) = v;
        }
    return out;
}

GrayImage erode(const GrayImage& mask,
                const std::vector<std::pair<int, int>>& offsets) {
    GrayImage out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            uint8_t v = 255;
            for (auto [dx, dy] : offsets) {
                const int nx = x + dx, ny = y + dy;
                if (!mask.in_bounds(nx, ny) || mask.at(nx, ny) == 0) {
                    v = 0;
                    break;
                }
            }
            out.at(x, y) = v;
        }
    return out;
}

const std::vector<std::pair<int, int>>& cross3() {
    static const std::vector<std::pair<int, int>> se{
        {0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    return se;
}

std::vector<std::pair<int, int>> disk(int radius) {
    std::vector<std::pair<int, int>> se;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) se.emplace_back(dx, dy);
    return se;
}

/// Fills background regions not 4-connected to the border (holes become
/// foreground).
GrayImage fill_holes(const GrayImage& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<uint8_t> outside(static_cast<size_t>(w) * h, 0);
    std::vector<int> stack;

    auto push = [&](int x, int y) {
        const int p = y * w + x;
        if (mask.data[p] == 0 && !outside[p]) {
            outside[p] = 1;
            stack.push_back(p);
        }
    };
    for (int x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int x = p % w, y = p / w;
        if (x > 0) push(x - 1, y);
        if (x + 1 < w) push(x + 1, y);
        if (y > 0) push(x, y - 1);
        if (y + 1 < h) push(x, y + 1);
    }

    GrayImage out(w, h);
    for (int p = 0; p < w * h; ++p)
        out.data[p] = outside[p] ? 0 : 255;
    return out;
}

} // namespace

SkullExtraction skull_extract(const GrayImage& img) {
    const int t = otsu_threshold(img);
    GrayImage mask = threshold_above(img, t);
    if (mask_area(mask) == 0)
        raise(Errc::empty_foreground, "no pixels above Otsu threshold " +
                                          std::to_string(t));

    mask = largest_component(mask);

    // Closing, 2 iterations: dilate twice then erode twice.
    mask = dilate(mask, cross3());
    mask = dilate(mask, cross3());
    mask = erode(mask, cross3());
    mask = erode(mask, cross3());

    mask = fill_holes(mask);
    mask = erode(mask, disk(4));
    // Erosion can split a pinched mask; keep the dominant piece.
    if (mask_area(mask) > 0) mask = largest_component(mask);

    SkullExtraction out{GrayImage(img.width, img.height), std::move(mask)};
    for (size_t i = 0; i < img.data.size(); ++i)
        out.image.data[i] = out.mask.data[i] ? img.data[i] : 0;
    return out;
}

// ---------------------------------------------------------------------------
// Moment-based alignment

namespace {

struct Moments {
    double cx = 0.0, cy = 0.0;   // centroid
    double mu20 = 0.0, mu02 = 0.0, mu11 = 0.0;
    long long area = 0;
    bool degenerate = false;     // principal axis undefined
    double theta = 0.0;          // radians, in (-pi/2, pi/2]
};

Moments mask_moments(const GrayImage& mask) {
    Moments m;
    double sx = 0.0, sy = 0.0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y) != 0) {
                sx += x;
                sy += y;
                ++m.area;
            }
    if (m.area == 0) return m;
    m.cx = sx / static_cast<double>(m.area);
    m.cy = sy / static_cast<double>(m.area);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y) != 0) {
                const double dx = x - m.cx, dy = y - m.cy;
                m.mu20 += dx * dx;
                m.mu02 += dy * dy;
                m.mu11 += dx * dy;
            }
    m.degenerate = m.mu20 == m.mu02 && m.mu11 == 0.0;
    if (!m.degenerate)
        m.theta = 0.5 * std::atan2(2.0 * m.mu11, m.mu20 - m.mu02);
    return m;
}

/// Overlap between fixed foreground and the moving mask pushed through
/// rotation deg (about its centroid), scale, and a centroid-to-centroid
/// shift. Nearest-neighbour sampling keeps it a pure pixel count.
long long overlap_after(const GrayImage& moving_mask, const Moments& mm,
                        const GrayImage& fixed_mask, const Moments& fm,
                        double deg, double scale) {
    const double rad = deg * std::acos(-1.0) / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    long long overlap = 0;
    for (int y = 0; y < fixed_mask.height; ++y)
        for (int x = 0; x < fixed_mask.width; ++x) {
            if (fixed_mask.at(x, y) == 0) continue;
            const double dx = (x - fm.cx) / scale;
            const double dy = (y - fm.cy) / scale;
            // inverse of the clockwise rotation
            const int sxp = static_cast<int>(std::lround(mm.cx + c * dx + s * dy));
            const int syp = static_cast<int>(std::lround(mm.cy - s * dx + c * dy));
            if (moving_mask.in_bounds(sxp, syp) &&
                moving_mask.at(sxp, syp) != 0)
                ++overlap;
        }
    return overlap;
}

} // namespace

/// Bilinear resample of img under rotation deg (clockwise) and scale about
/// (cx, cy), canvas unchanged, zero fill.
static GrayImage resample_similarity(const GrayImage& img, double deg,
                                     double scale, double cx, double cy) {
    if (deg == 0.0 && scale == 1.0) return img;
    const double rad = deg * std::acos(-1.0) / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double dy = (y - cy) / scale;
        for (int x = 0; x < img.width; ++x) {
            const double dx = (x - cx) / scale;
            const double sx = cx + c * dx + s * dy;
            const double sy = cy - s * dx + c * dy;
            out.at(x, y) = clamp_u8(sample_bilinear_zero(img, sx, sy));
        }
    }
    return out;
}

Alignment align(const GrayImage& moving, const GrayImage& fixed) {
    const GrayImage moving_mask =
        threshold_above(moving, otsu_threshold(moving));
    const GrayImage fixed_mask = threshold_above(fixed, otsu_threshold(fixed));
    const Moments mm = mask_moments(moving_mask);
    const Moments fm = mask_moments(fixed_mask);
    if (mm.area == 0)
        raise(Errc::empty_foreground, "moving image has empty foreground");
    if (fm.area == 0)
        raise(Errc::empty_foreground, "fixed image has empty foreground");

    const double scale = std::sqrt(static_cast<double>(fm.area) /
                                   static_cast<double>(mm.area));

    double rotation = 0.0;
    if (!mm.degenerate && !fm.degenerate) {
        double delta = (fm.theta - mm.theta) * 180.0 / std::acos(-1.0);
        while (delta > 90.0) delta -= 180.0;
        while (delta <= -90.0) delta += 180.0;
        const double flipped = delta > 0.0 ? delta - 180.0 : delta + 180.0;

        const long long ov_a =
            overlap_after(moving_mask, mm, fixed_mask, fm, delta, scale);
        const long long ov_b =
            overlap_after(moving_mask, mm, fixed_mask, fm, flipped, scale);
        if (ov_b > ov_a ||
            (ov_b == ov_a && std::abs(flipped) < std::abs(delta)))
            rotation = flipped;
        else
            rotation = delta;
    }

    Alignment out{resample_similarity(moving, rotation, scale, mm.cx, mm.cy),
                  rotation, scale};
    return out;
}

GrayImage apply(const PreprocSpec& spec, const GrayImage& img,
                const GrayImage* reference, std::vector<StepRecord>* trace) {
    if (spec.needs_reference() && reference == nullptr)
        raise(Errc::missing_reference,
              "steps r/s require a reference image");

    GrayImage cur = img;
    for (auto step : spec.steps) {
        StepRecord rec{step, 0.0, 1.0};
        switch (step) {
        case PreprocStep::rotation: {
            const Alignment a = align(cur, *reference);
            const Moments mm =
                mask_moments(threshold_above(cur, otsu_threshold(cur)));
            cur = resample_similarity(cur, a.rotation_deg, 1.0, mm.cx, mm.cy);
            rec.rotation_deg = a.rotation_deg;
            break;
        }
        case PreprocStep::scaling: {
            const Alignment a = align(cur, *reference);
            const Moments mm =
                mask_moments(threshold_above(cur, otsu_threshold(cur)));
            cur = resample_similarity(cur, 0.0, a.scale_factor, mm.cx, mm.cy);
            rec.scale_factor = a.scale_factor;
            break;
        }
        case PreprocStep::skull_extraction:
            cur = skull_extract(cur).image;
            break;
        case PreprocStep::equalisation:
            cur = equalize(cur);
            break;
        }
        if (trace) trace->push_back(rec);
    }
    return cur;
}

} // namespace slicefind
