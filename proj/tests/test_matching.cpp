#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "slicefind/matching.hpp"
#include "slicefind/synthetic.hpp"

#include "support/oracles.hpp"

using namespace slicefind;

namespace {

DescriptorSet float_set(const std::vector<std::vector<float>>& rows) {
    DescriptorSet set;
    set.kind = DescriptorKind::float128;
    for (const auto& row : rows) {
        set.keypoints.push_back({});
        std::vector<float> padded(kFloatDim, 0.0f);
        std::copy(row.begin(), row.end(), padded.begin());
        set.floats.insert(set.floats.end(), padded.begin(), padded.end());
    }
    return set;
}

DescriptorSet binary_set(const std::vector<std::vector<std::uint64_t>>& rows) {
    DescriptorSet set;
    set.kind = DescriptorKind::binary256;
    for (const auto& row : rows) {
        set.keypoints.push_back({});
        std::vector<std::uint64_t> padded(kBinaryWords, 0);
        std::copy(row.begin(), row.end(), padded.begin());
        set.bits.insert(set.bits.end(), padded.begin(), padded.end());
    }
    return set;
}

DescriptorSet random_float_set(std::mt19937& rng, int n) {
    DescriptorSet set;
    set.kind = DescriptorKind::float128;
    std::normal_distribution<double> dist;
    for (int i = 0; i < n; ++i) {
        set.keypoints.push_back({});
        double norm2 = 0.0;
        float vec[kFloatDim];
        for (float& v : vec) {
            v = static_cast<float>(dist(rng));
            norm2 += double(v) * v;
        }
        const double norm = std::sqrt(norm2);
        for (float& v : vec) v = static_cast<float>(v / norm);
        set.floats.insert(set.floats.end(), vec, vec + kFloatDim);
    }
    return set;
}

DescriptorSet random_binary_set(std::mt19937& rng, int n) {
    DescriptorSet set;
    set.kind = DescriptorKind::binary256;
    std::uniform_int_distribution<std::uint64_t> dist;
    for (int i = 0; i < n; ++i) {
        set.keypoints.push_back({});
        for (int w = 0; w < kBinaryWords; ++w) set.bits.push_back(dist(rng));
    }
    return set;
}

} // namespace

// ---------------------------------------------------------------------------
// Distances

TEST_CASE("hamming distance counts differing bits and is symmetric") {
    const auto s = binary_set({{0xFFull}, {0x0Full}, {0ull, 0ull, 0ull, ~0ull}});
    CHECK(hamming_distance(s.bit_vec(0), s.bit_vec(1)) == 4.0);
    CHECK(hamming_distance(s.bit_vec(0), s.bit_vec(0)) == 0.0);
    CHECK(hamming_distance(s.bit_vec(0), s.bit_vec(2)) == 72.0);

    std::mt19937 rng(1);
    const auto r = random_binary_set(rng, 20);
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r.size(); ++j)
            CHECK(hamming_distance(r.bit_vec(i), r.bit_vec(j)) ==
                  hamming_distance(r.bit_vec(j), r.bit_vec(i)));
}

TEST_CASE("euclidean distance matches the textbook formula") {
    const auto s = float_set({{1, 0}, {0, 1}, {0.6f, 0.8f}});
    CHECK(euclidean_distance(s.float_vec(0), s.float_vec(1)) ==
          doctest::Approx(std::sqrt(2.0)));
    CHECK(euclidean_distance(s.float_vec(0), s.float_vec(0)) == 0.0);
    CHECK(euclidean_distance(s.float_vec(0), s.float_vec(2)) ==
          doctest::Approx(std::sqrt(0.16 + 0.64)));
}

// ---------------------------------------------------------------------------
// knn_match

TEST_CASE("a query equal to a reference returns it at distance zero") {
    const auto q = float_set({{0, 1}});
    const auto r = float_set({{1, 0}, {0, 1}});
    const auto knn = knn_match(q, r, 1);
    REQUIRE(knn.size() == 1);
    REQUIRE(knn[0].neighbors.size() == 1);
    CHECK(knn[0].query_idx == 0);
    CHECK(knn[0].neighbors[0].ref_idx == 1);
    CHECK(knn[0].neighbors[0].distance == 0.0);
}

TEST_CASE("binary neighbors come back ordered by distance") {
    // refs at Hamming 1, 2, 3 from an all-zero query
    const auto q = binary_set({{0}});
    const auto r = binary_set({{0x7}, {0x1}, {0x3}});
    const auto knn = knn_match(q, r, 2);
    REQUIRE(knn.size() == 1);
    REQUIRE(knn[0].neighbors.size() == 2);
    CHECK(knn[0].neighbors[0].ref_idx == 1);
    CHECK(knn[0].neighbors[0].distance == 1.0);
    CHECK(knn[0].neighbors[1].ref_idx == 2);
    CHECK(knn[0].neighbors[1].distance == 2.0);
}

TEST_CASE("k beyond the reference size truncates") {
    const auto q = binary_set({{0}});
    const auto r = binary_set({{0x1}, {0x3}});
    const auto knn = knn_match(q, r, 10);
    REQUIRE(knn.size() == 1);
    CHECK(knn[0].neighbors.size() == 2);
}

TEST_CASE("distance ties go to the lower reference index") {
    const auto q = binary_set({{0}});
    const auto r = binary_set({{0x10}, {0x1}, {0x2}});
    const auto knn = knn_match(q, r, 3);
    REQUIRE(knn[0].neighbors.size() == 3);
    CHECK(knn[0].neighbors[0].ref_idx == 0);
    CHECK(knn[0].neighbors[1].ref_idx == 1);
    CHECK(knn[0].neighbors[2].ref_idx == 2);
}

TEST_CASE("zero float descriptors are skipped on both sides") {
    auto q = float_set({{0}, {1, 0}});          // q0 is all zero
    const auto r = float_set({{0}, {0.6f, 0.8f}}); // r0 is all zero
    const auto knn = knn_match(q, r, 2);
    REQUIRE(knn.size() == 1);
    CHECK(knn[0].query_idx == 1);
    REQUIRE(knn[0].neighbors.size() == 1); // zero ref never appears
    CHECK(knn[0].neighbors[0].ref_idx == 1);
}

TEST_CASE("mismatched kinds and empty references are errors") {
    std::mt19937 rng(2);
    const auto f = random_float_set(rng, 3);
    const auto b = random_binary_set(rng, 3);
    CHECK_THROWS_WITH_AS(knn_match(f, b, 1),
                         doctest::Contains("kind_mismatch"), Error);
    const DescriptorSet empty_f = float_set({});
    CHECK_THROWS_WITH_AS(knn_match(f, empty_f, 1),
                         doctest::Contains("empty_reference"), Error);
    CHECK_THROWS_WITH_AS(knn_match(f, f, 0),
                         doctest::Contains("invalid_argument"), Error);
}

TEST_CASE("knn equals the exhaustive oracle on random sets") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 6; ++trial) {
        const bool binary = trial % 2 == 0;
        const auto q = binary ? random_binary_set(rng, 40)
                              : random_float_set(rng, 40);
        const auto r = binary ? random_binary_set(rng, 60)
                              : random_float_set(rng, 60);
        const int k = 1 + trial;
        const auto got = knn_match(q, r, k);
        const auto expect = oracles::knn(q, r, k);
        REQUIRE(got.size() == expect.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].query_idx == expect[i].query);
            REQUIRE(got[i].neighbors.size() == expect[i].neighbors.size());
            for (std::size_t n = 0; n < got[i].neighbors.size(); ++n) {
                CHECK(got[i].neighbors[n].ref_idx ==
                      expect[i].neighbors[n].ref);
                CHECK(got[i].neighbors[n].distance ==
                      expect[i].neighbors[n].dist);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Lowe ratio filter

TEST_CASE("ratio test keeps and rejects per the strict inequality") {
    auto entry = [](double d1, double d2) {
        std::vector<KnnEntry> knn(1);
        knn[0].query_idx = 0;
        knn[0].neighbors = {{0, d1}, {1, d2}};
        return knn;
    };
    CHECK(lowe_filter(entry(0.0, 1.0), 0.75, MatchMetric::euclidean)
              .pairs.size() == 1);
    CHECK(lowe_filter(entry(0.7, 1.0), 0.75, MatchMetric::euclidean)
              .pairs.size() == 1);
    CHECK(lowe_filter(entry(0.8, 1.0), 0.75, MatchMetric::euclidean)
              .pairs.empty());
    CHECK(lowe_filter(entry(0.75, 1.0), 0.75, MatchMetric::euclidean)
              .pairs.empty()); // boundary is out
    CHECK(lowe_filter(entry(0.0, 0.0), 0.75, MatchMetric::euclidean)
              .pairs.empty()); // duplicate refs
}

TEST_CASE("single-neighbor entries pass unconditionally") {
    std::vector<KnnEntry> knn(1);
    knn[0].query_idx = 3;
    knn[0].neighbors = {{7, 42.0}};
    const auto set = lowe_filter(knn, 0.75, MatchMetric::hamming);
    REQUIRE(set.pairs.size() == 1);
    CHECK(set.pairs[0].query_idx == 3);
    CHECK(set.pairs[0].ref_idx == 7);
    CHECK(set.pairs[0].distance == 42.0);
    CHECK(set.metric == MatchMetric::hamming);
}

TEST_CASE("filtered pairs are the oracle's and lie inside the 1-NN set") {
    std::mt19937 rng(123);
    for (int trial = 0; trial < 4; ++trial) {
        const auto q = random_float_set(rng, 50);
        const auto r = random_float_set(rng, 50);
        const auto got = lowe_filter(knn_match(q, r, 2), 0.75,
                                     MatchMetric::euclidean);
        const auto expect = oracles::lowe(oracles::knn(q, r, 2), 0.75);
        REQUIRE(got.pairs.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) {
            CHECK(got.pairs[i].query_idx == expect[i].query);
            CHECK(got.pairs[i].ref_idx == expect[i].ref);
            CHECK(got.pairs[i].distance == expect[i].dist);
        }
        const auto nn1 = oracles::knn(q, r, 1);
        for (const auto& p : got.pairs) {
            bool found = false;
            for (const auto& e : nn1)
                if (e.query == p.query_idx &&
                    e.neighbors[0].ref == p.ref_idx)
                    found = true;
            CHECK(found);
        }
    }
}

// ---------------------------------------------------------------------------
// Mutual nearest neighbor filter

TEST_CASE("identical singletons pair up with the ratio test waived") {
    const auto q = float_set({{1, 0}});
    const auto set = mutual_nn_filter(q, q, 0.95);
    REQUIRE(set.pairs.size() == 1);
    CHECK(set.pairs[0].query_idx == 0);
    CHECK(set.pairs[0].ref_idx == 0);
    CHECK(set.pairs[0].distance == 0.0);
}

TEST_CASE("non-mutual nearest neighbors are dropped") {
    // r0 is nearest to both queries; r0's own nearest is q0, so q1 loses
    const auto q = float_set({{1, 0, 0}, {0.96f, 0.28f, 0}});
    const auto r = float_set({{0.9996f, 0.028f, 0}, {0, 0, 1}});
    const auto set = mutual_nn_filter(q, r, 0.95);
    REQUIRE(set.pairs.size() == 1);
    CHECK(set.pairs[0].query_idx == 0);
    CHECK(set.pairs[0].ref_idx == 0);
}

TEST_CASE("mutual matches form a partial bijection filtered by ratio") {
    std::mt19937 rng(321);
    for (int trial = 0; trial < 4; ++trial) {
        const auto q = random_float_set(rng, 50);
        const auto r = random_float_set(rng, 50);
        const auto got = mutual_nn_filter(q, r, 0.95);
        const auto expect = oracles::mutual_nn(q, r, 0.95);
        REQUIRE(got.pairs.size() == expect.size());
        std::set<int> qs, rs;
        for (std::size_t i = 0; i < expect.size(); ++i) {
            CHECK(got.pairs[i].query_idx == expect[i].query);
            CHECK(got.pairs[i].ref_idx == expect[i].ref);
            CHECK(got.pairs[i].distance == expect[i].dist);
            CHECK(qs.insert(got.pairs[i].query_idx).second);
            CHECK(rs.insert(got.pairs[i].ref_idx).second);
        }
        // every mutual pair is also a one-directional nearest neighbor
        const auto nn1 = oracles::knn(q, r, 1);
        for (const auto& p : got.pairs) {
            bool found = false;
            for (const auto& e : nn1)
                if (e.query == p.query_idx &&
                    e.neighbors[0].ref == p.ref_idx)
                    found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("empty inputs yield empty match sets without errors") {
    const auto empty = float_set({});
    const auto one = float_set({{1, 0}});
    CHECK(mutual_nn_filter(empty, one, 0.95).pairs.empty());
    CHECK(mutual_nn_filter(one, empty, 0.95).pairs.empty());
    MatchFilter lowe;
    CHECK(match_descriptors(empty, one, lowe).pairs.empty());
    CHECK(match_descriptors(one, empty, lowe).pairs.empty());
}

// ---------------------------------------------------------------------------
// Filter and method parsing

TEST_CASE("filter specs parse and print back") {
    auto f = MatchFilter::parse("lowe:0.8");
    CHECK(f.kind == MatchFilterKind::lowe_ratio);
    CHECK(f.ratio == 0.8);
    CHECK(f.code() == "lowe:0.8");

    f = MatchFilter::parse("mnn");
    CHECK(f.kind == MatchFilterKind::mutual_nn);
    CHECK(f.threshold == 0.95);
    CHECK(f.code() == "mnn:0.95");

    f = MatchFilter::parse("lowe");
    CHECK(f.ratio == 0.75);

    CHECK_THROWS_WITH_AS(MatchFilter::parse("ransac"),
                         doctest::Contains("invalid_argument"), Error);
    CHECK_THROWS_WITH_AS(MatchFilter::parse("lowe:abc"),
                         doctest::Contains("invalid_argument"), Error);
    CHECK_THROWS_WITH_AS(MatchFilter::parse("lowe:-1"),
                         doctest::Contains("invalid_argument"), Error);
}

TEST_CASE("method specs parse their aliases and externals") {
    auto m = MethodSpec::parse("agast+sift");
    CHECK(m.pipeline == MethodSpec::Pipeline::agast_sift);
    CHECK(m.name() == "agast+sift");
    CHECK(m.filter.kind == MatchFilterKind::lowe_ratio);

    m = MethodSpec::parse("gftt+sift");
    CHECK(m.pipeline == MethodSpec::Pipeline::gftt_sift);

    CHECK(MethodSpec::parse("orb").pipeline ==
          MethodSpec::Pipeline::orb_rbrief);
    CHECK(MethodSpec::parse("orb+rbrief").pipeline ==
          MethodSpec::Pipeline::orb_rbrief);

    m = MethodSpec::parse("external:hardnet");
    CHECK(m.is_external());
    CHECK(m.external_name == "hardnet");
    CHECK(m.filter.kind == MatchFilterKind::mutual_nn);
    CHECK(m.name() == "external:hardnet");

    CHECK_THROWS_WITH_AS(MethodSpec::parse("surf"),
                         doctest::Contains("invalid_argument"), Error);
}

TEST_CASE("external methods have no native feature computation") {
    const GrayImage img(64, 64, 0);
    CHECK_THROWS_WITH_AS(
        compute_features(img, MethodSpec::parse("external:hardnet")),
        doctest::Contains("missing_feature"), Error);
}

// ---------------------------------------------------------------------------
// match_count

TEST_CASE("match_count is deterministic and maximal on self-comparison") {
    SyntheticStackConfig cfg;
    cfg.n_slices = 3;
    cfg.seed = 8;
    const auto a = make_synthetic_slice(cfg, 0);
    const auto b = make_synthetic_slice(cfg, 2);
    const auto method = MethodSpec::parse("gftt+sift");

    const int self = match_count(a, a, method);
    const int cross = match_count(a, b, method);
    CHECK(self == match_count(a, a, method));
    CHECK(self > 0);
    CHECK(cross >= 0);
    CHECK(self >= cross);
}

TEST_CASE("blank images produce zero matches") {
    const GrayImage blank(64, 64, 0);
    const auto method = MethodSpec::parse("gftt+sift");
    CHECK(match_count(blank, blank, method) == 0);
}
