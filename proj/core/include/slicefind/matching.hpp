#ifndef SLICEFIND_MATCHING_HPP
#define SLICEFIND_MATCHING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicefind/descriptors.hpp"
#include "slicefind/features.hpp"
#include "slicefind/image.hpp"

namespace slicefind {

enum class MatchMetric { hamming, euclidean };

const char* to_string(MatchMetric metric);

enum class MatchFilterKind { lowe_ratio, mutual_nn };

struct MatchFilter {
    MatchFilterKind kind = MatchFilterKind::lowe_ratio;
    double ratio = 0.75;     ///< Lowe ratio limit, strict <
    double threshold = 0.95; ///< mutual-NN second-nearest ratio limit

    /// Parse "lowe:0.75" or "mnn:0.95" (bare "lowe"/"mnn" keep defaults).
    static MatchFilter parse(std::string_view text);
    std::string code() const;
};

struct Match {
    int query_idx;
    int ref_idx;
    double distance;
};

struct MatchSet {
    std::vector<Match> pairs; ///< query indices unique within the set
    MatchMetric metric = MatchMetric::euclidean;
    MatchFilter filter;
};

struct KnnNeighbor {
    int ref_idx;
    double distance;
};

struct KnnEntry {
    int query_idx;
    std::vector<KnnNeighbor> neighbors; ///< ascending distance, ties by index
};

double hamming_distance(std::span<const std::uint64_t> a,
                        std::span<const std::uint64_t> b);
double euclidean_distance(std::span<const float> a, std::span<const float> b);

/// Exact k nearest reference descriptors per query descriptor, Hamming for
/// binary256 and Euclidean for float128, ties broken toward the lower
/// reference index. Zero float descriptors are skipped on both sides; a
/// skipped query emits no entry.
std::vector<KnnEntry> knn_match(const DescriptorSet& query,
                                const DescriptorSet& refset, int k);

/// Lowe ratio test on k=2 results: keep iff d1 < ratio * d2 (strict);
/// entries with a single neighbor are kept unconditionally; d2 == 0 means
/// duplicate references and is rejected.
MatchSet lowe_filter(const std::vector<KnnEntry>& knn, double ratio,
                     MatchMetric metric);

/// Mutual nearest neighbor with a second-nearest ratio gate: pair (q,r)
/// kept iff r is q's nearest, q is r's nearest and d1(q)/d2(q) < threshold
/// (waived when q has no second neighbor). One-to-one by construction.
MatchSet mutual_nn_filter(const DescriptorSet& query,
                          const DescriptorSet& refset, double threshold);

/// Dispatch on the filter kind; lowe_ratio runs knn k=2 first.
MatchSet match_descriptors(const DescriptorSet& query,
                           const DescriptorSet& refset,
                           const MatchFilter& filter);

/// Detector+descriptor+filter pipeline selector. Native pipelines run the
/// in-library detectors; external ones read ingested descriptor files.
struct MethodSpec {
    enum class Pipeline { agast_sift, gftt_sift, orb_rbrief, external };

    Pipeline pipeline = Pipeline::gftt_sift;
    std::string external_name; ///< method label for external pipelines
    MatchFilter filter;        ///< lowe:0.75 native, mnn:0.95 external
    DetectorConfig detector;

    /// "agast+sift", "gftt+sift", "orb" (alias "orb+rbrief"),
    /// "external:<name>".
    static MethodSpec parse(std::string_view name);

    std::string name() const;
    bool is_external() const { return pipeline == Pipeline::external; }
};

/// Number of filtered matches between two images under a native pipeline;
/// the x_ij feeding the SNR series.
int match_count(const GrayImage& a_img, const GrayImage& b_img,
                const MethodSpec& pipeline);

/// Detect + describe one image under a native pipeline.
DescriptorSet compute_features(const GrayImage& img, const MethodSpec& method);

} // namespace slicefind

#endif
