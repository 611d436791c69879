#ifndef SLICEFIND_METRICS_HPP
#define SLICEFIND_METRICS_HPP

#include <cstdlib>
#include <string>
#include <vector>

namespace slicefind {

/// Standardized match counts of one query against a whole reference stack.
/// mu and sigma are the mean and population standard deviation over the
/// full series (the self-match included); snr[i] = (counts[i]-mu)/sigma.
/// A zero-variance series is flagged degenerate and carries all-zero snr.
struct SnrSeries {
    std::string reference_subject;
    int query_index = -1;
    std::vector<int> counts;
    double mu = 0.0;
    double sigma = 0.0;
    bool degenerate = false;
    std::vector<double> snr;
    std::vector<double> smoothed; ///< filled by the locator's moving average
};

SnrSeries snr_series(const std::vector<int>& counts);

/// SNR ratio degraded-self over clean-self; may exceed 1. Throws
/// zero_baseline when the clean self SNR is 0.
double robustness(double snr_degraded_self, double snr_clean_self);

struct LocalizationOutcome {
    int query_index = -1;
    int expected_index = -1; ///< y_e
    int best_index = -1;     ///< y_b, argmax of the smoothed SNR
    int best_index_raw = -1; ///< argmax of the raw counts, diagnostics
    double peak_snr = 0.0;   ///< smoothed SNR at best_index

    int distance() const { return std::abs(expected_index - best_index); }
    bool correct_within(int d) const { return distance() <= d; }
};

/// Fraction of outcomes with |y_e - y_b| <= d.
double accuracy(const std::vector<LocalizationOutcome>& outcomes, int d);

/// Sum of |y_e - y_b| over all outcomes.
long long cumulative_distance(const std::vector<LocalizationOutcome>& outcomes);

/// Centered moving average with an odd window; at the boundaries the
/// window clamps to available samples: out[i] averages indices
/// max(0,i-h)..min(n-1,i+h), h = window/2. Output length equals input
/// length.
std::vector<double> moving_average(const std::vector<double>& series,
                                   int window);

} // namespace slicefind

#endif
