#include "slicefind/synthetic.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "detail/mix.hpp"
#include "slicefind/degrade.hpp"
#include "slicefind/error.hpp"

namespace slicefind {

namespace {

enum class Shape { rect, diamond };

/// One structure: a shaded convex blob that persists through the whole
/// stack, near its anchor, while slowly turning in plane. Neighbouring
/// slices therefore share almost all of their appearance, and similarity
/// falls off smoothly with slice distance, which is what gives the match
/// count series a single wide peak at the true position. Half the
/// structures turn one way and half the other, so an in-plane rotation
/// of a whole query slice cannot masquerade as a step along the stack.
struct Structure {
    Shape shape;
    double x0, y0;    // anchor, in normalized head coordinates
    double rot;       // in-plane orientation at slice 0 (radians)
    double dir;       // turn direction, +1 or -1
    double drift;     // wave phase drift per slice (radians, signed)
    double ax, ay;    // wobble amplitudes (pixels)
    double wx, wy;    // wobble frequencies (radians per slice)
    double px, py;    // wobble phases
    double sx, sy;    // half-extents (pixels)
    double gx, gy;    // interior shading gradient (intensity per pixel)
    double tk1, tk2;  // interior wave numbers (radians per pixel)
    double tc1, tc2;  // interior wave phases
    double intensity;
};

/// In-plane turn per slice, shared by all structures so that appearance
/// drifts apart in lockstep with slice distance instead of at a different
/// rate for every structure.
constexpr double kTurnPerSlice = 0.017; // radians, ~1 degree

/// Interior wave phase drift per slice. A second shared clock: patterns
/// inside a structure slide slowly, so even corners whose wedges tolerate
/// the accumulated turn stop matching once the texture has moved far
/// enough. Keeps distant slices from propping each other up.
constexpr double kDriftPerSlice = 0.10; // radians

/// Interior wave amplitude and shading strength, fixed so every corner
/// carries a comparable amount of texture and the match-or-not decision
/// happens at about the same slice separation for all of them.
constexpr double kWaveAmp = 30.0;
constexpr double kShadeMag = 2.0;
constexpr double kShadeClamp = 20.0;

constexpr double kPi = 3.14159265358979324;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng()) * 0x1p-64);
}

double frac(double v) { return v - std::floor(v); }

std::vector<Structure> make_structures(const SyntheticStackConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::vector<Structure> out;
    out.reserve(cfg.structures_per_slice);
    for (int i = 0; i < cfg.structures_per_slice; ++i) {
        Structure s;
        // rects and diamonds only: four well separated convex corners
        // each, so minimum-distance suppression in the detectors never
        // has to choose between corners of the same structure
        s.shape = (i & 1) ? Shape::rect : Shape::diamond;
        // anchor inside the brain: polar draw bounded away from the rim,
        // kept clear of the other structures so corner layouts do not
        // interact from slice to slice
        for (int attempt = 0; attempt < 200; ++attempt) {
            const double ang = uniform(rng, 0.0, 2.0 * kPi);
            const double rad = std::sqrt(uniform(rng, 0.0, 1.0)) * 0.72;
            s.x0 = rad * std::cos(ang);
            s.y0 = rad * std::sin(ang);
            bool clear = true;
            for (const auto& o : out) {
                const double dx = o.x0 - s.x0, dy = o.y0 - s.y0;
                if (dx * dx + dy * dy < 0.095 * 0.095) {
                    clear = false;
                    break;
                }
            }
            if (clear) break;
        }
        // orientations, shading directions and wavelengths follow
        // low-discrepancy sequences instead of independent draws: spacing
        // the appearance parameters evenly keeps every corner's nearest
        // look-alike at a comparable distance, so the ratio test behaves
        // the same way for all of them and stray cross-matches stay rare
        s.rot = frac(i * 0.61803398875) * kPi;
        s.dir = (i & 1) ? 1.0 : -1.0;
        s.drift = ((i >> 1) & 1) ? kDriftPerSlice : -kDriftPerSlice;
        const double gphi = std::fmod(i * 2.39996322973, 2.0 * kPi);
        s.gx = kShadeMag * std::cos(gphi);
        s.gy = kShadeMag * std::sin(gphi);
        s.tk1 = 2.0 * kPi / (10.0 + 6.0 * frac(i * 0.75487766625));
        s.tk2 = 2.0 * kPi / (10.0 + 6.0 * frac(i * 0.56984029099));
        // gentle wobble: well under a pixel per slice, enough to
        // decorrelate pixel-grid alignment without losing the corners
        s.ax = uniform(rng, 0.2, 1.0);
        s.ay = uniform(rng, 0.2, 1.0);
        s.wx = uniform(rng, 0.05, 0.40);
        s.wy = uniform(rng, 0.05, 0.40);
        s.px = uniform(rng, 0.0, 6.28);
        s.py = uniform(rng, 0.0, 6.28);
        s.sx = uniform(rng, 5.5, 8.5);
        s.sy = s.sx * uniform(rng, 0.55, 0.85);
        s.tc1 = uniform(rng, 0.0, 6.28);
        s.tc2 = uniform(rng, 0.0, 6.28);
        s.intensity = uniform(rng, 165.0, 200.0);
        out.push_back(s);
    }
    return out;
}

using detail::mix;

GrayImage render(const SyntheticStackConfig& cfg,
                 const std::vector<Structure>& structures, double t) {
    const int w = cfg.width, h = cfg.height;
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    const double rx = 0.40 * w, ry = 0.46 * h;
    // the first and last slice get their orientations and wave phases
    // kicked far outside what the descriptors tolerate: like the noisy
    // partial-volume end slices of a real scan, they resemble nothing
    // else in the stack, which anchors the ends of the similarity series
    const bool terminal = t <= 0.0 || t >= cfg.n_slices - 1.0;

    struct Placed {
        double x, y, sx, sy, cr, sr, gx, gy;
        double tk1, tk2, tc1, tc2;
        double intensity;
        Shape shape;
    };
    std::vector<Placed> placed;
    placed.reserve(structures.size());
    for (const auto& s : structures) {
        Placed p;
        p.x = cx + s.x0 * rx + s.ax * std::sin(s.wx * t + s.px);
        p.y = cy + s.y0 * ry + s.ay * std::sin(s.wy * t + s.py);
        p.sx = s.sx;
        p.sy = s.sy;
        double ang = s.rot + s.dir * kTurnPerSlice * t;
        double pc1 = s.tc1 + s.drift * t;
        double pc2 = s.tc2 + s.drift * t;
        if (terminal) {
            ang += 0.55;
            pc1 += 2.2;
            pc2 += 2.2;
        }
        p.cr = std::cos(ang);
        p.sr = std::sin(ang);
        p.gx = s.gx;
        p.gy = s.gy;
        p.tk1 = s.tk1;
        p.tk2 = s.tk2;
        p.tc1 = pc1;
        p.tc2 = pc2;
        p.intensity = s.intensity;
        p.shape = s.shape;
        placed.push_back(p);
    }

    std::vector<double> buf(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double nx = (x - cx) / rx, ny = (y - cy) / ry;
            const double r2 = nx * nx + ny * ny;
            if (r2 > 1.0) continue; // background stays 0
            const double r = std::sqrt(r2);
            if (r >= 0.90) {
                // bright skull-like rim with soft shoulders, so the arc
                // reads as an edge rather than a chain of corner responses
                double v = 225.0;
                if (r < 0.93) v = 130.0 + 95.0 * (r - 0.90) / 0.03;
                else if (r > 0.97) v = 225.0 * (1.0 - r) / 0.03;
                buf[static_cast<std::size_t>(y) * w + x] = v;
                continue;
            }
            double v = 60.0 + 30.0 * (1.0 - r);
            if (r2 < 0.80) {
                for (const auto& p : placed) {
                    const double ox = x - p.x, oy = y - p.y;
                    const double ux = p.cr * ox + p.sr * oy;
                    const double uy = p.cr * oy - p.sr * ox;
                    const double dx = std::abs(ux);
                    const double dy = std::abs(uy);
                    // signed distance to the boundary, so edges render with
                    // a one pixel soft band instead of a jagged staircase
                    // that would shed spurious corner responses
                    double d = 0.0;
                    switch (p.shape) {
                    case Shape::rect:
                        d = std::max(dx - p.sx, dy - p.sy);
                        break;
                    case Shape::diamond:
                        d = (dx * p.sy + dy * p.sx - p.sx * p.sy) /
                            std::hypot(p.sx, p.sy);
                        break;
                    }
                    const double cov =
                        std::min(1.0, std::max(0.0, 0.5 - d));
                    if (cov > 0.0) {
                        // shading and waves ride in the structure frame,
                        // turning with the shape as one rigid appearance
                        const double shade = std::min(
                            kShadeClamp,
                            std::max(-kShadeClamp, p.gx * ux + p.gy * uy));
                        const double wave = kWaveAmp *
                                            std::sin(p.tk1 * ux + p.tc1) *
                                            std::sin(p.tk2 * uy + p.tc2);
                        v += (p.intensity + shade + wave - v) * cov;
                    }
                }
            }
            buf[static_cast<std::size_t>(y) * w + x] = v;
        }

    // Band-limit the slice the way scanner optics and partial-volume
    // averaging smooth a real acquisition. Detectors and descriptors
    // expect smooth images; razor-sharp synthetic edges would make their
    // responses jump with every sub-pixel drift between slices.
    constexpr int kR = 4;
    double kernel[2 * kR + 1];
    double ksum = 0.0;
    for (int k = -kR; k <= kR; ++k)
        ksum += kernel[k + kR] = std::exp(-k * k / (2.0 * 1.4 * 1.4));
    for (double& k : kernel) k /= ksum;

    std::vector<double> tmp(buf.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -kR; k <= kR; ++k) {
                const int xx = x + k;
                if (xx >= 0 && xx < w)
                    acc += kernel[k + kR] *
                           buf[static_cast<std::size_t>(y) * w + xx];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -kR; k <= kR; ++k) {
                const int yy = y + k;
                if (yy >= 0 && yy < h)
                    acc += kernel[k + kR] *
                           tmp[static_cast<std::size_t>(yy) * w + x];
            }
            img.at(x, y) = clamp_u8(acc);
        }

    if (cfg.gamma != 1.0) {
        for (auto& px : img.data)
            px = clamp_u8(255.0 * std::pow(px / 255.0, cfg.gamma));
    }
    return img;
}

} // namespace

GrayImage make_synthetic_slice(const SyntheticStackConfig& cfg, int position) {
    if (cfg.width < 32 || cfg.height < 32 || cfg.n_slices < 1)
        raise(Errc::invalid_argument, "stack must be at least 32x32x1");
    if (position < 0 || position >= cfg.n_slices)
        raise(Errc::invalid_argument, "slice position out of range");

    const auto structures = make_structures(cfg);
    const double mid = (cfg.n_slices - 1) / 2.0;
    const double t = cfg.mirrored ? mid - std::abs(position - mid)
                                  : static_cast<double>(position);
    GrayImage img = render(cfg, structures, t);
    if (cfg.variation_std > 0.0)
        img = add_gaussian_noise(
            img, cfg.variation_std,
            mix(mix(cfg.seed, cfg.variation_salt),
                static_cast<uint64_t>(position) + 1));
    return img;
}

SliceStack make_synthetic_stack(const SyntheticStackConfig& cfg) {
    SliceStack stack;
    stack.subject_id = cfg.subject_id;
    stack.plane = cfg.plane;
    stack.slice_thickness_mm = cfg.slice_thickness_mm;
    stack.start_index = 0;
    stack.slices.reserve(cfg.n_slices);

    const auto structures = make_structures(cfg);
    const double mid = (cfg.n_slices - 1) / 2.0;
    for (int pos = 0; pos < cfg.n_slices; ++pos) {
        const double t = cfg.mirrored ? mid - std::abs(pos - mid)
                                      : static_cast<double>(pos);
        GrayImage img = render(cfg, structures, t);
        if (cfg.variation_std > 0.0)
            img = add_gaussian_noise(
                img, cfg.variation_std,
                mix(mix(cfg.seed, cfg.variation_salt),
                    static_cast<uint64_t>(pos) + 1));
        stack.slices.push_back(std::move(img));
    }
    return stack;
}

} // namespace slicefind
