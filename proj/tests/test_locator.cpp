#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "slicefind/degrade.hpp"
#include "slicefind/locator.hpp"
#include "slicefind/synthetic.hpp"

using namespace slicefind;

namespace {

SliceStack textured_stack(int n, std::uint64_t seed,
                          Plane plane = Plane::axial) {
    SyntheticStackConfig cfg;
    cfg.width = 160;
    cfg.height = 160;
    cfg.n_slices = n;
    cfg.seed = seed;
    cfg.plane = plane;
    return make_synthetic_stack(cfg);
}

LocatorConfig gftt_cfg() {
    LocatorConfig cfg;
    cfg.method = MethodSpec::parse("gftt+sift");
    return cfg;
}

} // namespace

TEST_CASE("a single-slice stack always answers with that slice") {
    auto stack = textured_stack(1, 3);
    const auto r = locate(stack.slices[0], stack, gftt_cfg());
    CHECK(r.best_index == 0);
    CHECK(r.series.degenerate); // one sample has zero variance
    CHECK(r.series.counts.size() == 1);
}

TEST_CASE("a query taken from the stack localizes to itself") {
    auto stack = textured_stack(30, 11);
    const auto r = locate(stack.slices[12], stack, gftt_cfg());
    CHECK(std::abs(r.best_index - 12) <= 1); // smoothing may shift one step
    CHECK(r.series.counts[12] > 0);
    CHECK(r.series.counts.size() == 30);
    CHECK(r.series.smoothed.size() == 30);
    // the raw argmax is the exact self-match
    CHECK(r.best_index_raw == 12);
}

TEST_CASE("start_index shifts reported indices but not the choice") {
    auto stack = textured_stack(12, 7);
    const auto base = locate(stack.slices[5], stack, gftt_cfg());
    stack.start_index = 100;
    const auto shifted = locate(stack.slices[5], stack, gftt_cfg());
    CHECK(shifted.best_index == base.best_index + 100);
    CHECK(shifted.best_index_raw == base.best_index_raw + 100);
}

TEST_CASE("locating in an empty stack is an error") {
    SliceStack stack;
    const GrayImage q(32, 32, 0);
    CHECK_THROWS_WITH_AS(locate(q, stack, gftt_cfg()),
                         doctest::Contains("empty_stack"), Error);
}

TEST_CASE("an even smoothing window is rejected") {
    auto stack = textured_stack(6, 2);
    auto cfg = gftt_cfg();
    cfg.window = 4;
    CHECK_THROWS_WITH_AS(locate(stack.slices[0], stack, cfg),
                         doctest::Contains("even_window"), Error);
}

TEST_CASE("hemisphere restriction needs a sagittal stack") {
    auto stack = textured_stack(6, 2, Plane::axial);
    auto cfg = gftt_cfg();
    cfg.hemisphere = Hemisphere::left;
    CHECK_THROWS_WITH_AS(locate(stack.slices[0], stack, cfg),
                         doctest::Contains("hemisphere_on_non_sagittal"),
                         Error);
}

TEST_CASE("hemisphere masks restrict the argmax to one half") {
    auto stack = textured_stack(20, 19, Plane::sagittal);
    const auto& query = stack.slices[4]; // truth on the left half

    auto cfg = gftt_cfg();
    cfg.hemisphere = Hemisphere::left;
    const auto left = locate(query, stack, cfg);
    CHECK(left.best_index < 10);
    CHECK(std::abs(left.best_index - 4) <= 1);

    cfg.hemisphere = Hemisphere::right;
    const auto right = locate(query, stack, cfg);
    CHECK(right.best_index >= 10); // forced away from the true slice

    cfg.hemisphere = Hemisphere::none;
    const auto free = locate(query, stack, cfg);
    CHECK(std::abs(free.best_index - 4) <= 1);
}

TEST_CASE("hemisphere strings parse both ways") {
    CHECK(hemisphere_from_string("none") == Hemisphere::none);
    CHECK(hemisphere_from_string("left") == Hemisphere::left);
    CHECK(hemisphere_from_string("right") == Hemisphere::right);
    CHECK(std::string(to_string(Hemisphere::right)) == "right");
    CHECK_THROWS_WITH_AS(hemisphere_from_string("both"),
                         doctest::Contains("invalid_argument"), Error);
}

TEST_CASE("index maps round affine correspondences to integers") {
    IndexMap id;
    CHECK(id.is_identity());
    CHECK(id.map(17) == 17);

    IndexMap m{3.0, 0.5};
    CHECK_FALSE(m.is_identity());
    CHECK(m.map(10) == 8);
    CHECK(m.map(11) == 9); // 8.5 rounds away from zero
    CHECK(m.map(0) == 3);
}

TEST_CASE("locate_all walks every slice and honours the query range") {
    const auto stack = textured_stack(10, 23);
    const auto cfg = gftt_cfg();

    const auto all = locate_all(stack, stack, cfg);
    REQUIRE(all.size() == 10);
    for (int i = 0; i < 10; ++i) {
        CHECK(all[i].query_index == i);
        CHECK(all[i].expected_index == i);
        CHECK(std::abs(all[i].best_index - i) <= 1);
    }
    CHECK(accuracy(all, 1) == 1.0);

    LocateAllOptions opt;
    opt.query_range = IndexRange{3, 6};
    std::vector<SnrSeries> series;
    const auto some = locate_all(stack, stack, cfg, opt, &series);
    REQUIRE(some.size() == 4);
    REQUIRE(series.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(some[i].query_index == 3 + i);
        CHECK(series[i].query_index == 3 + i);
        CHECK(series[i].counts.size() == 10);
        CHECK(series[i].smoothed.size() == 10);
    }
}

TEST_CASE("precomputed reference features give identical outcomes") {
    const auto stack = textured_stack(8, 29);
    const auto cfg = gftt_cfg();
    const auto direct = locate_all(stack, stack, cfg);
    const auto feats = compute_stack_features(stack, cfg.method);
    CHECK(feats.subject == stack.subject_id);
    CHECK(feats.size() == 8);
    const auto cached = locate_all(stack, feats, stack, cfg);
    REQUIRE(cached.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(cached[i].best_index == direct[i].best_index);
        CHECK(cached[i].peak_snr == direct[i].peak_snr);
    }
}

TEST_CASE("expected-index hemisphere side-information is applied per query") {
    const auto stack = textured_stack(12, 31, Plane::sagittal);
    auto cfg = gftt_cfg();
    LocateAllOptions opt;
    opt.hemisphere_from_expected = true;
    const auto outcomes = locate_all(stack, stack, cfg, opt);
    REQUIRE(outcomes.size() == 12);
    for (const auto& o : outcomes) {
        const bool left_expected = o.expected_index < 6;
        if (left_expected) CHECK(o.best_index < 6);
        else CHECK(o.best_index >= 6);
    }

    // ... but still requires sagittal geometry
    const auto axial = textured_stack(12, 31, Plane::axial);
    CHECK_THROWS_WITH_AS(locate_all(axial, axial, cfg, opt),
                         doctest::Contains("hemisphere_on_non_sagittal"),
                         Error);
}

TEST_CASE("results are identical under different thread caps") {
    const auto stack = textured_stack(9, 37);
    const auto cfg = gftt_cfg();

    setenv("SLICEFIND_THREADS", "1", 1);
    std::vector<SnrSeries> s1;
    const auto r1 = locate_all(stack, stack, cfg, {}, &s1);

    setenv("SLICEFIND_THREADS", "3", 1);
    std::vector<SnrSeries> s3;
    const auto r3 = locate_all(stack, stack, cfg, {}, &s3);
    unsetenv("SLICEFIND_THREADS");

    REQUIRE(r1.size() == r3.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].best_index == r3[i].best_index);
        CHECK(r1[i].best_index_raw == r3[i].best_index_raw);
        CHECK(r1[i].peak_snr == r3[i].peak_snr);
    }
    REQUIRE(s1.size() == s3.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].counts == s3[i].counts);
        CHECK(s1[i].snr == s3[i].snr);
        CHECK(s1[i].smoothed == s3[i].smoothed);
    }
}

TEST_CASE("preprocessing is applied to queries before localization") {
    // rotate the query; the aligning preprocessor must still find the slice
    auto stack = textured_stack(14, 41);
    const auto rotated = rotate(stack.slices[6], 6.0);

    auto cfg = gftt_cfg();
    cfg.preproc = PreprocSpec::parse("r");
    const auto r = locate(rotated, stack, cfg);
    CHECK(std::abs(r.best_index - 6) <= 1);
}
