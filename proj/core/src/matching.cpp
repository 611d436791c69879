#include "slicefind/matching.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "slicefind/error.hpp"

namespace slicefind {

const char* to_string(MatchMetric metric) {
    return metric == MatchMetric::hamming ? "hamming" : "euclidean";
}

MatchFilter MatchFilter::parse(std::string_view text) {
    MatchFilter f;
    std::string_view name = text;
    std::string_view arg;
    if (const auto colon = text.find(':'); colon != std::string_view::npos) {
        name = text.substr(0, colon);
        arg = text.substr(colon + 1);
    }
    double value = 0.0;
    if (!arg.empty()) {
        try {
            value = std::stod(std::string(arg));
        } catch (const std::exception&) {
            raise(Errc::invalid_argument,
                  "bad filter parameter '" + std::string(arg) + "'");
        }
        if (!(value > 0.0))
            raise(Errc::invalid_argument, "filter parameter must be > 0");
    }
    if (name == "lowe") {
        f.kind = MatchFilterKind::lowe_ratio;
        if (!arg.empty()) f.ratio = value;
    } else if (name == "mnn") {
        f.kind = MatchFilterKind::mutual_nn;
        if (!arg.empty()) f.threshold = value;
    } else {
        raise(Errc::invalid_argument,
              "unknown filter '" + std::string(name) + "'");
    }
    return f;
}

std::string MatchFilter::code() const {
    char buf[32];
    if (kind == MatchFilterKind::lowe_ratio)
        std::snprintf(buf, sizeof(buf), "lowe:%g", ratio);
    else
        std::snprintf(buf, sizeof(buf), "mnn:%g", threshold);
    return buf;
}

double hamming_distance(std::span<const std::uint64_t> a,
                        std::span<const std::uint64_t> b) {
    int bits = 0;
    for (size_t i = 0; i < a.size(); ++i) bits += std::popcount(a[i] ^ b[i]);
    return bits;
}

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

std::vector<KnnEntry> knn_match(const DescriptorSet& query,
                                const DescriptorSet& refset, int k) {
    if (query.kind != refset.kind)
        raise(Errc::kind_mismatch, "query and reference descriptor kinds differ");
    if (refset.empty())
        raise(Errc::empty_reference, "reference descriptor set is empty");
    if (k < 1) raise(Errc::invalid_argument, "k must be >= 1");

    std::vector<KnnEntry> out;
    std::vector<KnnNeighbor> all;
    for (size_t q = 0; q < query.size(); ++q) {
        if (query.is_zero(q)) continue;
        all.clear();
        for (size_t r = 0; r < refset.size(); ++r) {
            if (refset.is_zero(r)) continue;
            const double d =
                query.kind == DescriptorKind::float128
                    ? euclidean_distance(query.float_vec(q), refset.float_vec(r))
                    : hamming_distance(query.bit_vec(q), refset.bit_vec(r));
            all.push_back({static_cast<int>(r), d});
        }
        if (all.empty()) continue;
        const size_t keep = std::min<size_t>(k, all.size());
        std::partial_sort(all.begin(), all.begin() + keep, all.end(),
                          [](const KnnNeighbor& l, const KnnNeighbor& r) {
                              if (l.distance != r.distance)
                                  return l.distance < r.distance;
                              return l.ref_idx < r.ref_idx;
                          });
        all.resize(keep);
        out.push_back({static_cast<int>(q), all});
    }
    return out;
}

MatchSet lowe_filter(const std::vector<KnnEntry>& knn, double ratio,
                     MatchMetric metric) {
    MatchSet set;
    set.metric = metric;
    set.filter.kind = MatchFilterKind::lowe_ratio;
    set.filter.ratio = ratio;
    for (const auto& entry : knn) {
        if (entry.neighbors.empty()) continue;
        const auto& best = entry.neighbors.front();
        if (entry.neighbors.size() == 1) {
            set.pairs.push_back({entry.query_idx, best.ref_idx, best.distance});
            continue;
        }
        const double d2 = entry.neighbors[1].distance;
        if (d2 == 0.0) continue; // duplicate references
        if (best.distance < ratio * d2)
            set.pairs.push_back({entry.query_idx, best.ref_idx, best.distance});
    }
    return set;
}

MatchSet mutual_nn_filter(const DescriptorSet& query,
                          const DescriptorSet& refset, double threshold) {
    MatchSet set;
    set.metric = query.kind == DescriptorKind::float128 ? MatchMetric::euclidean
                                                        : MatchMetric::hamming;
    set.filter.kind = MatchFilterKind::mutual_nn;
    set.filter.threshold = threshold;
    if (refset.empty() || query.empty()) {
        if (query.kind != refset.kind)
            raise(Errc::kind_mismatch,
                  "query and reference descriptor kinds differ");
        return set;
    }

    const auto forward = knn_match(query, refset, 2);
    const auto backward = knn_match(refset, query, 1);
    std::vector<int> ref_best(refset.size(), -1);
    for (const auto& entry : backward)
        ref_best[entry.query_idx] = entry.neighbors.front().ref_idx;

    for (const auto& entry : forward) {
        const auto& best = entry.neighbors.front();
        if (ref_best[best.ref_idx] != entry.query_idx) continue;
        if (entry.neighbors.size() > 1) {
            const double d2 = entry.neighbors[1].distance;
            if (!(d2 > 0.0 && best.distance / d2 < threshold)) continue;
        }
        set.pairs.push_back({entry.query_idx, best.ref_idx, best.distance});
    }
    return set;
}

MatchSet match_descriptors(const DescriptorSet& query,
                           const DescriptorSet& refset,
                           const MatchFilter& filter) {
    if (filter.kind == MatchFilterKind::mutual_nn)
        return mutual_nn_filter(query, refset, filter.threshold);

    MatchSet set;
    set.metric = query.kind == DescriptorKind::float128 ? MatchMetric::euclidean
                                                        : MatchMetric::hamming;
    set.filter = filter;
    if (query.kind != refset.kind)
        raise(Errc::kind_mismatch, "query and reference descriptor kinds differ");
    if (query.empty() || refset.empty()) return set;
    return lowe_filter(knn_match(query, refset, 2), filter.ratio, set.metric);
}

MethodSpec MethodSpec::parse(std::string_view name) {
    MethodSpec spec;
    if (name == "agast+sift" || name == "agast") {
        spec.pipeline = Pipeline::agast_sift;
    } else if (name == "gftt+sift" || name == "gftt") {
        spec.pipeline = Pipeline::gftt_sift;
    } else if (name == "orb" || name == "orb+rbrief") {
        spec.pipeline = Pipeline::orb_rbrief;
    } else if (name.starts_with("external:") && name.size() > 9) {
        spec.pipeline = Pipeline::external;
        spec.external_name = std::string(name.substr(9));
        spec.filter.kind = MatchFilterKind::mutual_nn;
    } else {
        raise(Errc::invalid_argument,
              "unknown method '" + std::string(name) + "'");
    }
    return spec;
}

std::string MethodSpec::name() const {
    switch (pipeline) {
    case Pipeline::agast_sift: return "agast+sift";
    case Pipeline::gftt_sift: return "gftt+sift";
    case Pipeline::orb_rbrief: return "orb";
    case Pipeline::external: return "external:" + external_name;
    }
    return "";
}

DescriptorSet compute_features(const GrayImage& img, const MethodSpec& method) {
    switch (method.pipeline) {
    case MethodSpec::Pipeline::agast_sift:
        return describe_sift(img, detect_agast(img, method.detector));
    case MethodSpec::Pipeline::gftt_sift:
        return describe_sift(img, detect_gftt(img, method.detector));
    case MethodSpec::Pipeline::orb_rbrief:
        return describe_rbrief(img, detect_orb_keypoints(img, method.detector));
    case MethodSpec::Pipeline::external:
        raise(Errc::missing_feature,
              "external method '" + method.external_name +
                  "' has no native detector; ingest feature files instead");
    }
    return {};
}

int match_count(const GrayImage& a_img, const GrayImage& b_img,
                const MethodSpec& pipeline) {
    const DescriptorSet a = compute_features(a_img, pipeline);
    const DescriptorSet b = compute_features(b_img, pipeline);
    if (a.empty() || b.empty()) return 0;
    return static_cast<int>(match_descriptors(a, b, pipeline.filter).pairs.size());
}

} // namespace slicefind
