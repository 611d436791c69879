#include "slicefind/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "slicefind/error.hpp"

namespace slicefind {

SnrSeries snr_series(const std::vector<int>& counts) {
    if (counts.empty())
        raise(Errc::empty_series, "match-count series is empty");

    SnrSeries s;
    s.counts = counts;
    const auto n = static_cast<double>(counts.size());

    double sum = 0.0;
    for (int c : counts) sum += c;
    s.mu = sum / n;

    double ss = 0.0;
    for (int c : counts) {
        const double d = c - s.mu;
        ss += d * d;
    }
    s.sigma = std::sqrt(ss / n);

    s.snr.resize(counts.size(), 0.0);
    if (s.sigma < 1e-12) {
        s.degenerate = true;
        s.sigma = 0.0;
    } else {
        for (size_t i = 0; i < counts.size(); ++i)
            s.snr[i] = (counts[i] - s.mu) / s.sigma;
    }
    return s;
}

double robustness(double snr_degraded_self, double snr_clean_self) {
    if (snr_clean_self == 0.0)
        raise(Errc::zero_baseline, "clean self SNR is zero");
    return snr_degraded_self / snr_clean_self;
}

double accuracy(const std::vector<LocalizationOutcome>& outcomes, int d) {
    if (outcomes.empty())
        raise(Errc::empty_outcomes, "no localization outcomes");
    if (d < 0) raise(Errc::invalid_argument, "d must be >= 0");
    long long hits = 0;
    for (const auto& o : outcomes) hits += o.correct_within(d);
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

long long cumulative_distance(
    const std::vector<LocalizationOutcome>& outcomes) {
    long long sum = 0;
    for (const auto& o : outcomes) sum += o.distance();
    return sum;
}

std::vector<double> moving_average(const std::vector<double>& series,
                                   int window) {
    if (window < 1 || window % 2 == 0)
        raise(Errc::even_window, "window must be odd and >= 1");
    const int n = static_cast<int>(series.size());
    const int h = window / 2;
    std::vector<double> out(series.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - h);
        const int hi = std::min(n - 1, i + h);
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) sum += series[j];
        out[i] = sum / (hi - lo + 1);
    }
    return out;
}

} // namespace slicefind
