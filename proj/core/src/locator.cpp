#include "slicefind/locator.hpp"

#include <algorithm>
#include <cmath>

#include "slicefind/error.hpp"
#include "slicefind/parallel.hpp"

namespace slicefind {

Hemisphere hemisphere_from_string(const std::string& s) {
    if (s == "none") return Hemisphere::none;
    if (s == "left") return Hemisphere::left;
    if (s == "right") return Hemisphere::right;
    raise(Errc::invalid_argument, "unknown hemisphere '" + s + "'");
}

const char* to_string(Hemisphere h) {
    switch (h) {
    case Hemisphere::none: return "none";
    case Hemisphere::left: return "left";
    case Hemisphere::right: return "right";
    }
    return "none";
}

StackFeatures compute_stack_features(const SliceStack& stack,
                                     const MethodSpec& method) {
    StackFeatures f;
    f.subject = stack.subject_id;
    f.start_index = stack.start_index;
    f.sets.resize(stack.slices.size());
    parallel_for(static_cast<int>(stack.slices.size()), [&](int i) {
        f.sets[i] = compute_features(stack.slices[i], method);
    });
    return f;
}

LocateResult locate_series(const DescriptorSet& query,
                           const StackFeatures& refs, const MatchFilter& filter,
                           int window, Hemisphere hemisphere) {
    if (refs.sets.empty()) raise(Errc::empty_stack, "reference stack is empty");
    const int n = refs.size();

    std::vector<int> counts(n, 0);
    parallel_for(n, [&](int i) {
        if (query.empty() || refs.sets[i].empty()) return;
        counts[i] = static_cast<int>(
            match_descriptors(query, refs.sets[i], filter).pairs.size());
    });

    LocateResult result;
    result.series = snr_series(counts);
    result.series.reference_subject = refs.subject;
    result.series.smoothed = moving_average(result.series.snr, window);

    // left = first half of positions, right = the rest
    int lo = 0, hi = n;
    if (hemisphere == Hemisphere::left) hi = n / 2;
    if (hemisphere == Hemisphere::right) lo = n / 2;
    if (lo >= hi) { lo = 0; hi = n; } // degenerate mask on a 1-slice stack

    int best = lo, best_raw = lo;
    for (int i = lo + 1; i < hi; ++i) {
        if (result.series.smoothed[i] > result.series.smoothed[best]) best = i;
        if (counts[i] > counts[best_raw]) best_raw = i;
    }
    result.best_index = refs.start_index + best;
    result.best_index_raw = refs.start_index + best_raw;
    return result;
}

LocateResult locate(const GrayImage& query, const SliceStack& stack,
                    const LocatorConfig& cfg) {
    if (stack.slices.empty()) raise(Errc::empty_stack, "stack has no slices");
    if (cfg.hemisphere != Hemisphere::none && stack.plane != Plane::sagittal)
        raise(Errc::hemisphere_on_non_sagittal,
              "hemisphere restriction requires a sagittal stack");

    GrayImage prepared = query;
    if (!cfg.preproc.empty()) {
        const GrayImage* ref = nullptr;
        if (cfg.preproc.needs_reference())
            ref = &stack.slices[stack.slices.size() / 2];
        prepared = apply(cfg.preproc, query, ref);
    }

    const StackFeatures refs = compute_stack_features(stack, cfg.method);
    const DescriptorSet qset = compute_features(prepared, cfg.method);
    return locate_series(qset, refs, cfg.method.filter, cfg.window,
                         cfg.hemisphere);
}

int IndexMap::map(int query_index) const {
    return static_cast<int>(std::lround(offset + scale * query_index));
}

std::vector<LocalizationOutcome>
locate_all(const SliceStack& query_stack, const StackFeatures& ref_features,
           const SliceStack& ref_stack, const LocatorConfig& cfg,
           const LocateAllOptions& options,
           std::vector<SnrSeries>* series_out) {
    if (ref_features.sets.empty())
        raise(Errc::empty_stack, "reference stack is empty");
    if ((cfg.hemisphere != Hemisphere::none ||
         options.hemisphere_from_expected) &&
        ref_stack.plane != Plane::sagittal)
        raise(Errc::hemisphere_on_non_sagittal,
              "hemisphere restriction requires a sagittal stack");

    std::vector<int> positions;
    for (int p = 0; p < query_stack.size(); ++p) {
        const int idx = query_stack.index_of(p);
        if (options.query_range &&
            (idx < options.query_range->first || idx > options.query_range->last))
            continue;
        positions.push_back(p);
    }

    const GrayImage* preproc_ref = nullptr;
    if (cfg.preproc.needs_reference())
        preproc_ref = &ref_stack.slices[ref_stack.slices.size() / 2];

    const int n_ref = ref_features.size();
    std::vector<LocalizationOutcome> outcomes(positions.size());
    if (series_out) series_out->resize(positions.size());

    parallel_for(static_cast<int>(positions.size()), [&](int qi) {
        const int pos = positions[qi];
        const int query_index = query_stack.index_of(pos);
        const int expected = options.index_map.map(query_index);

        Hemisphere hemi = cfg.hemisphere;
        if (options.hemisphere_from_expected) {
            const int expected_pos = expected - ref_features.start_index;
            hemi = expected_pos < n_ref / 2 ? Hemisphere::left
                                            : Hemisphere::right;
        }

        GrayImage prepared = query_stack.slices[pos];
        if (!cfg.preproc.empty())
            prepared = apply(cfg.preproc, prepared, preproc_ref);

        const DescriptorSet qset = compute_features(prepared, cfg.method);
        LocateResult r = locate_series(qset, ref_features, cfg.method.filter,
                                       cfg.window, hemi);

        LocalizationOutcome& o = outcomes[qi];
        o.query_index = query_index;
        o.expected_index = expected;
        o.best_index = r.best_index;
        o.best_index_raw = r.best_index_raw;
        const int best_pos = r.best_index - ref_features.start_index;
        o.peak_snr = r.series.smoothed[best_pos];
        if (series_out) {
            r.series.query_index = query_index;
            (*series_out)[qi] = std::move(r.series);
        }
    });
    return outcomes;
}

std::vector<LocalizationOutcome>
locate_all(const SliceStack& query_stack, const SliceStack& ref_stack,
           const LocatorConfig& cfg, const LocateAllOptions& options,
           std::vector<SnrSeries>* series_out) {
    const StackFeatures refs = compute_stack_features(ref_stack, cfg.method);
    return locate_all(query_stack, refs, ref_stack, cfg, options, series_out);
}

} // namespace slicefind
