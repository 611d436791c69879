#ifndef SLICEFIND_DETAIL_NORMAL_HPP
#define SLICEFIND_DETAIL_NORMAL_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace slicefind::detail {

/// Deterministic standard-normal stream. std::normal_distribution is
/// implementation-defined, so Box-Muller is spelled out on top of a fixed
/// uniform mapping of mt19937_64 output.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // (v+1)/2^64 maps to (0,1], keeping log() finite.
        const double u1 = (static_cast<double>(rng_()) + 1.0) * 0x1p-64;
        const double u2 = static_cast<double>(rng_()) * 0x1p-64;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::acos(-1.0) * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace slicefind::detail

#endif
