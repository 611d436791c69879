#ifndef SLICEFIND_LOCATOR_HPP
#define SLICEFIND_LOCATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "slicefind/matching.hpp"
#include "slicefind/metrics.hpp"
#include "slicefind/preprocess.hpp"
#include "slicefind/stack.hpp"

namespace slicefind {

enum class Hemisphere { none, left, right };

Hemisphere hemisphere_from_string(const std::string& s);
const char* to_string(Hemisphere h);

struct LocatorConfig {
    MethodSpec method;
    PreprocSpec preproc;
    int window = 7; ///< moving-average window, odd
    Hemisphere hemisphere = Hemisphere::none;
};

/// Per-slice descriptor sets of one stack, computed once and reused across
/// queries.
struct StackFeatures {
    std::string subject;
    int start_index = 0;
    std::vector<DescriptorSet> sets;

    int size() const { return static_cast<int>(sets.size()); }
};

StackFeatures compute_stack_features(const SliceStack& stack,
                                     const MethodSpec& method);

struct LocateResult {
    int best_index = -1;     ///< smoothed-series argmax, as a stack index
    int best_index_raw = -1; ///< raw-count argmax, diagnostics
    SnrSeries series;
};

/// Core selection step: match `query` against every reference set, build
/// the SNR series, smooth it, mask the excluded hemisphere half (left =
/// first half of positions) and take the argmax, ties toward the lower
/// index.
LocateResult locate_series(const DescriptorSet& query,
                           const StackFeatures& refs,
                           const MatchFilter& filter, int window,
                           Hemisphere hemisphere = Hemisphere::none);

/// Full single-query pipeline on a native method: preprocess the query
/// (alignment reference is the stack's central slice), extract features,
/// locate. Hemisphere restriction requires a sagittal stack.
LocateResult locate(const GrayImage& query, const SliceStack& stack,
                    const LocatorConfig& cfg);

/// Affine query-index -> expected-reference-index correspondence;
/// identity by default. The result is rounded to the nearest index.
struct IndexMap {
    double offset = 0.0;
    double scale = 1.0;

    int map(int query_index) const;
    bool is_identity() const { return offset == 0.0 && scale == 1.0; }
};

/// Inclusive slice-index range restriction.
struct IndexRange {
    int first = 0;
    int last = 0;
};

struct LocateAllOptions {
    IndexMap index_map;
    std::optional<IndexRange> query_range; ///< restrict queried indices
    /// Sagittal stacks only: restrict each query to the hemisphere its
    /// expected index falls in (stack-metadata side information).
    bool hemisphere_from_expected = false;
};

/// Locate every slice of `query_stack` within `ref_stack`. One outcome per
/// queried slice; optionally collects the per-query SNR series.
std::vector<LocalizationOutcome>
locate_all(const SliceStack& query_stack, const SliceStack& ref_stack,
           const LocatorConfig& cfg, const LocateAllOptions& options = {},
           std::vector<SnrSeries>* series_out = nullptr);

/// As above with reference features precomputed (query features still come
/// from the query stack images under cfg.method).
std::vector<LocalizationOutcome>
locate_all(const SliceStack& query_stack, const StackFeatures& ref_features,
           const SliceStack& ref_stack, const LocatorConfig& cfg,
           const LocateAllOptions& options = {},
           std::vector<SnrSeries>* series_out = nullptr);

} // namespace slicefind

#endif
