#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "slicefind/features.hpp"
#include "slicefind/synthetic.hpp"

#include "support/oracles.hpp"
#include "support/phantoms.hpp"
#include "support/tempdir.hpp"

using namespace slicefind;
using testutil::TempDir;

namespace {

SyntheticStackConfig phantom_cfg(std::uint64_t seed) {
    SyntheticStackConfig cfg;
    cfg.width = 160;
    cfg.height = 160;
    cfg.n_slices = 5;
    cfg.seed = seed;
    return cfg;
}

} // namespace

// ---------------------------------------------------------------------------
// AGAST (segment test)

TEST_CASE("constant and saturated-threshold images yield nothing") {
    CHECK(detect_agast(GrayImage(32, 32, 128)).empty());

    DetectorConfig high;
    high.fast_threshold = 300;
    const auto square = phantoms::bright_square(64, 22, 22, 20);
    CHECK(detect_agast(square, high).empty());
}

TEST_CASE("tiny images are rejected") {
    CHECK_THROWS_WITH_AS(detect_agast(GrayImage(6, 10)),
                         doctest::Contains("image_too_small"), Error);
}

TEST_CASE("bright square fires at its corners only") {
    const auto img = phantoms::bright_square(64, 22, 22, 20);
    DetectorConfig cfg;
    cfg.fast_threshold = 20;
    const auto kps = detect_agast(img, cfg);
    REQUIRE_FALSE(kps.empty());

    const double corners[4][2] = {
        {22, 22}, {41, 22}, {22, 41}, {41, 41}};
    for (const auto& kp : kps) {
        double best = 1e9;
        for (const auto& c : corners)
            best = std::min(best, std::hypot(kp.x - c[0], kp.y - c[1]));
        CHECK(best <= 2.0); // nothing along the straight edges
        CHECK(kp.response > 0);
        CHECK_FALSE(kp.has_angle());
        CHECK(kp.octave == 0);
    }
    // every corner is represented
    for (const auto& c : corners) {
        double best = 1e9;
        for (const auto& kp : kps)
            best = std::min(best, std::hypot(kp.x - c[0], kp.y - c[1]));
        CHECK(best <= 2.0);
    }
}

TEST_CASE("segment test equals the exhaustive oracle on random images") {
    for (int trial = 0; trial < 5; ++trial) {
        const auto img = phantoms::random_image(64, 64, 300 + trial);
        DetectorConfig cfg;
        cfg.fast_threshold = 20;
        const auto got = detect_agast(img, cfg);
        const auto expect = oracles::fast9_detect(img, 20);

        REQUIRE(got.size() == expect.size());
        std::set<std::tuple<int, int, int>> got_set, expect_set;
        for (const auto& kp : got)
            got_set.insert({int(kp.x), int(kp.y), int(kp.response)});
        for (const auto& p : expect)
            expect_set.insert({p.x, p.y, p.response});
        CHECK(got_set == expect_set);
    }
}

TEST_CASE("no two segment-test keypoints are 8-adjacent") {
    const auto img = phantoms::random_image(96, 96, 17);
    DetectorConfig cfg;
    cfg.fast_threshold = 12;
    const auto kps = detect_agast(img, cfg);
    for (std::size_t i = 0; i < kps.size(); ++i)
        for (std::size_t j = i + 1; j < kps.size(); ++j)
            CHECK((std::abs(kps[i].x - kps[j].x) > 1 ||
                   std::abs(kps[i].y - kps[j].y) > 1));
}

TEST_CASE("detection is repeatable") {
    const auto img = make_synthetic_slice(phantom_cfg(3), 2);
    const auto a = detect_agast(img);
    const auto b = detect_agast(img);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].response == b[i].response);
    }
}

// ---------------------------------------------------------------------------
// GFTT

TEST_CASE("gftt on a constant image is empty") {
    CHECK(detect_gftt(GrayImage(32, 32, 77)).empty());
}

TEST_CASE("checkerboard intersections match the min-eigenvalue oracle") {
    // 5x3 cells of 20 px: 8 interior intersections
    const auto img = phantoms::checkerboard(100, 60, 20);
    DetectorConfig cfg;
    cfg.gftt_quality = 0.01;
    cfg.gftt_min_distance = 8.0;
    const auto kps = detect_gftt(img, cfg);
    const auto oracle = oracles::min_eigen_maxima(img, cfg.gftt_quality);

    REQUIRE(kps.size() == 8);
    REQUIRE(oracle.size() == 8);
    for (const auto& kp : kps) {
        double best = 1e9;
        for (const auto& [ox, oy] : oracle)
            best = std::min(best, std::hypot(kp.x - ox, kp.y - oy));
        CHECK(best <= 1.0);
    }
    for (const auto& [ox, oy] : oracle) {
        double best = 1e9;
        for (const auto& kp : kps)
            best = std::min(best, std::hypot(kp.x - ox, kp.y - oy));
        CHECK(best <= 1.0);
    }
}

TEST_CASE("gftt enforces pairwise spacing and the corner cap") {
    const auto img = make_synthetic_slice(phantom_cfg(5), 1);
    DetectorConfig cfg;
    cfg.gftt_min_distance = 12.0;
    cfg.gftt_max_corners = 10;
    const auto kps = detect_gftt(img, cfg);
    REQUIRE_FALSE(kps.empty());
    CHECK(kps.size() <= 10);
    for (std::size_t i = 0; i < kps.size(); ++i)
        for (std::size_t j = i + 1; j < kps.size(); ++j)
            CHECK(std::hypot(kps[i].x - kps[j].x, kps[i].y - kps[j].y) >=
                  cfg.gftt_min_distance);
}

TEST_CASE("spacing larger than the diagonal keeps at most one corner") {
    const auto img = phantoms::checkerboard(64, 64, 16);
    DetectorConfig cfg;
    cfg.gftt_min_distance = 1000.0;
    CHECK(detect_gftt(img, cfg).size() <= 1);
}

// ---------------------------------------------------------------------------
// ORB keypoints

TEST_CASE("orb on a constant image is empty") {
    CHECK(detect_orb_keypoints(GrayImage(256, 256, 50)).empty());
}

TEST_CASE("orb needs room for the top pyramid level") {
    DetectorConfig cfg;
    cfg.orb_n_levels = 8;
    cfg.orb_scale_factor = 1.2;
    CHECK_THROWS_WITH_AS(detect_orb_keypoints(GrayImage(40, 40, 0), cfg),
                         doctest::Contains("image_too_small"), Error);
}

TEST_CASE("orb keypoint fields satisfy their contracts") {
    const auto img = make_synthetic_slice(phantom_cfg(7), 3);
    DetectorConfig cfg;
    const auto kps = detect_orb_keypoints(img, cfg);
    REQUIRE_FALSE(kps.empty());
    CHECK(kps.size() <= std::size_t(cfg.orb_n_features));
    for (const auto& kp : kps) {
        CHECK(kp.response > 0);
        CHECK(kp.octave >= 0);
        CHECK(kp.octave < cfg.orb_n_levels);
        REQUIRE(kp.has_angle());
        CHECK(kp.angle >= 0.0f);
        CHECK(kp.angle < 360.0f);
        CHECK(kp.diameter ==
              doctest::Approx(31.0 * std::pow(cfg.orb_scale_factor,
                                              kp.octave)));
        CHECK(kp.x >= 0);
        CHECK(kp.y >= 0);
        CHECK(kp.x < img.width);
        CHECK(kp.y < img.height);
    }
}

TEST_CASE("n_features=1 keeps exactly the strongest keypoint") {
    const auto img = make_synthetic_slice(phantom_cfg(9), 0);
    DetectorConfig all;
    const auto full = detect_orb_keypoints(img, all);
    REQUIRE(full.size() >= 2);

    DetectorConfig one = all;
    one.orb_n_features = 1;
    const auto top = detect_orb_keypoints(img, one);
    REQUIRE(top.size() == 1);
    CHECK(top[0].x == full[0].x);
    CHECK(top[0].y == full[0].y);
    CHECK(top[0].response == full[0].response);
    for (const auto& kp : full) CHECK(kp.response <= top[0].response);
}

TEST_CASE("orientation follows the intensity centroid") {
    // an L-corner provides the keypoint; a heavy off-center disk drags the
    // centroid so the angle is dictated by the bright mass
    auto img = phantoms::bright_square(96, 40, 40, 12, 0, 180);
    const auto disk = phantoms::bright_disk(96, 96, 58.0, 46.0, 6.0, 0, 255);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = std::max(img.data[i], disk.data[i]);

    DetectorConfig cfg;
    cfg.orb_n_levels = 1;
    const auto kps = detect_orb_keypoints(img, cfg);
    REQUIRE_FALSE(kps.empty());
    for (const auto& kp : kps) {
        // direct moment oracle over the radius-15 disk at the keypoint
        double m10 = 0.0, m01 = 0.0;
        const int r = 15;
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                if (dx * dx + dy * dy > r * r) continue;
                const int x = int(std::lround(kp.x)) + dx;
                const int y = int(std::lround(kp.y)) + dy;
                if (!img.in_bounds(x, y)) continue;
                m10 += dx * img.at(x, y);
                m01 += dy * img.at(x, y);
            }
        double expect =
            std::atan2(m01, m10) * 180.0 / std::acos(-1.0);
        if (expect < 0) expect += 360.0;
        const double diff =
            std::abs(std::remainder(kp.angle - expect, 360.0));
        CHECK(diff <= 5.0);
    }
}

TEST_CASE("angles rotate with a lossless quarter turn") {
    const auto img = make_synthetic_slice(phantom_cfg(11), 2);
    const auto turned = phantoms::rot90cw(img);
    DetectorConfig cfg;
    cfg.orb_n_levels = 1; // keep coordinates exact
    const auto base = detect_orb_keypoints(img, cfg);
    const auto rot = detect_orb_keypoints(turned, cfg);
    REQUIRE_FALSE(base.empty());

    int matched = 0, agreeing = 0;
    const int w = img.width;
    for (const auto& kp : base) {
        // forward map of the quarter turn: (x,y) -> (w-1-y, x)
        const double ex = w - 1 - kp.y, ey = kp.x;
        for (const auto& rk : rot) {
            if (std::hypot(rk.x - ex, rk.y - ey) > 0.5) continue;
            ++matched;
            const double diff =
                std::abs(std::remainder(rk.angle - (kp.angle + 90.0), 360.0));
            if (diff <= 3.0) ++agreeing;
            break;
        }
    }
    REQUIRE(matched > 0);
    CHECK(agreeing >= matched * 9 / 10);
}

TEST_CASE("keypoint JSON round-trips including missing angles") {
    TempDir dir("kp");
    std::vector<Keypoint> kps;
    kps.push_back({10.5f, 20.25f, 3.5f, 0, kNoAngle, 7.0f});
    kps.push_back({1.0f, 2.0f, 9.0f, 2, 123.5f, 44.64f});
    const auto path = dir / "kps.json";
    save_keypoints(kps, path);
    const auto loaded = load_keypoints(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].x == kps[0].x);
    CHECK(loaded[0].y == kps[0].y);
    CHECK(loaded[0].response == kps[0].response);
    CHECK_FALSE(loaded[0].has_angle());
    CHECK(loaded[1].angle == kps[1].angle);
    CHECK(loaded[1].octave == 2);
    CHECK(loaded[1].diameter == kps[1].diameter);
}

TEST_CASE("detector config validation rejects bad values") {
    DetectorConfig cfg;
    cfg.fast_threshold = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.gftt_quality = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.orb_scale_factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.orb_n_features = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("detector config file parsing is strict") {
    TempDir dir("cfg");
    std::ofstream(dir / "ok.json")
        << R"({"fast_threshold": 15, "gftt_max_corners": 50})";
    const auto cfg = DetectorConfig::from_json_file(dir / "ok.json");
    CHECK(cfg.fast_threshold == 15);
    CHECK(cfg.gftt_max_corners == 50);
    CHECK(cfg.gftt_quality == 0.01); // untouched default

    std::ofstream(dir / "bad.json") << R"({"fast_treshold": 15})";
    CHECK_THROWS_WITH_AS(DetectorConfig::from_json_file(dir / "bad.json"),
                         doctest::Contains("schema_error"), Error);
}
