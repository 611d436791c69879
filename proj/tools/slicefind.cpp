// Command-line front end over the slicefind library. One subcommand per
// pipeline stage plus `experiment` for full study runs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slicefind/degrade.hpp"
#include "slicefind/descriptors.hpp"
#include "slicefind/features.hpp"
#include "slicefind/harness.hpp"
#include "slicefind/locator.hpp"
#include "slicefind/matching.hpp"
#include "slicefind/png_io.hpp"
#include "slicefind/preprocess.hpp"
#include "slicefind/synthetic.hpp"
#include "slicefind/version.hpp"

namespace sf = slicefind;

namespace {

unsigned parse_formats(const std::string& list) {
    unsigned mask = 0;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = list.find(',', start);
        const std::string item =
            list.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start);
        if (item == "csv") mask |= sf::kReportCsv;
        else if (item == "json") mask |= sf::kReportJson;
        else if (item == "svg") mask |= sf::kReportSvg;
        else if (!item.empty())
            sf::raise(sf::Errc::invalid_argument,
                      "unknown report format '" + item + "'");
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (mask == 0)
        sf::raise(sf::Errc::invalid_argument, "no report formats selected");
    return mask;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) sf::raise(sf::Errc::io_failure, "cannot write " + path);
    out << j.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"brain MRI slice localization toolkit"};
    app.set_version_flag("--version", std::string(sf::kVersion));
    app.require_subcommand(1);
    int rc = 0;

    // degrade ---------------------------------------------------------------
    auto* degrade = app.add_subcommand("degrade", "apply a controlled image degradation");
    struct {
        std::string op, in, out;
        double deg = 0.0, factor = 1.0, stddev = 0.0;
        std::uint64_t seed = 0;
    } dg;
    degrade->add_option("--op", dg.op, "rotate|scale|noise")
        ->required()
        ->check(CLI::IsMember({"rotate", "scale", "noise"}));
    degrade->add_option("--deg", dg.deg, "rotation angle, clockwise degrees");
    degrade->add_option("--factor", dg.factor, "scale factor");
    degrade->add_option("--std", dg.stddev, "Gaussian noise standard deviation");
    degrade->add_option("--seed", dg.seed, "noise RNG seed");
    degrade->add_option("in", dg.in, "input PNG")->required();
    degrade->add_option("out", dg.out, "output PNG")->required();
    degrade->callback([&] {
        const sf::GrayImage img = sf::load_png(dg.in);
        sf::GrayImage result;
        if (dg.op == "rotate") result = sf::rotate(img, dg.deg);
        else if (dg.op == "scale") result = sf::upscale(img, dg.factor);
        else result = sf::add_gaussian_noise(img, dg.stddev, dg.seed);
        sf::save_png(result, dg.out);
    });

    // preprocess ------------------------------------------------------------
    auto* preprocess = app.add_subcommand("preprocess", "run enhancement steps on an image");
    struct {
        std::string steps, reference, in, out;
    } pp;
    preprocess->add_option("--steps", pp.steps, "step codes, e.g. rebs (r=rotate, e=equalize, b=brain mask, s=scale)")
        ->required();
    preprocess->add_option("--reference", pp.reference, "alignment reference PNG (needed by r and s)");
    preprocess->add_option("in", pp.in, "input PNG")->required();
    preprocess->add_option("out", pp.out, "output PNG")->required();
    preprocess->callback([&] {
        const sf::PreprocSpec spec = sf::PreprocSpec::parse(pp.steps);
        const sf::GrayImage img = sf::load_png(pp.in);
        sf::GrayImage ref;
        if (!pp.reference.empty()) ref = sf::load_png(pp.reference);
        std::vector<sf::StepRecord> trace;
        const sf::GrayImage result = sf::apply(
            spec, img, pp.reference.empty() ? nullptr : &ref, &trace);
        sf::save_png(result, pp.out);
        for (const auto& step : trace) {
            if (step.step == sf::PreprocStep::rotation)
                std::fprintf(stderr, "r: %.3f deg\n", step.rotation_deg);
            else if (step.step == sf::PreprocStep::scaling)
                std::fprintf(stderr, "s: factor %.4f\n", step.scale_factor);
        }
    });

    // detect ----------------------------------------------------------------
    auto* detect = app.add_subcommand("detect", "detect keypoints");
    struct {
        std::string method, config, in, out;
    } dt;
    detect->add_option("--method", dt.method, "agast|gftt|orb")
        ->required()
        ->check(CLI::IsMember({"agast", "gftt", "orb"}));
    detect->add_option("--config", dt.config, "detector config JSON");
    detect->add_option("in", dt.in, "input PNG")->required();
    detect->add_option("--out", dt.out, "keypoint JSON path")->required();
    detect->callback([&] {
        sf::DetectorConfig cfg;
        if (!dt.config.empty())
            cfg = sf::DetectorConfig::from_json_file(dt.config);
        const sf::GrayImage img = sf::load_png(dt.in);
        std::vector<sf::Keypoint> kps;
        if (dt.method == "agast") kps = sf::detect_agast(img, cfg);
        else if (dt.method == "gftt") kps = sf::detect_gftt(img, cfg);
        else kps = sf::detect_orb_keypoints(img, cfg);
        sf::save_keypoints(kps, dt.out);
        std::fprintf(stderr, "%zu keypoints\n", kps.size());
    });

    // describe --------------------------------------------------------------
    auto* describe = app.add_subcommand(
        "describe", "detect and describe, writing a descriptor file");
    struct {
        std::string method = "gftt+sift", in, out;
        int slice_index = 0;
    } ds;
    describe->add_option("--method", ds.method, "agast+sift|gftt+sift|orb");
    describe->add_option("--slice-index", ds.slice_index, "index recorded in the file");
    describe->add_option("in", ds.in, "input PNG")->required();
    describe->add_option("--out", ds.out, "descriptor JSON path")->required();
    describe->callback([&] {
        const sf::MethodSpec method = sf::MethodSpec::parse(ds.method);
        if (method.is_external())
            sf::raise(sf::Errc::invalid_argument,
                      "describe needs a native pipeline");
        const sf::GrayImage img = sf::load_png(ds.in);
        const sf::DescriptorSet set = sf::compute_features(img, method);
        sf::save_external(set, method.name(), ds.slice_index, ds.out);
        std::fprintf(stderr, "%zu descriptors\n", set.size());
    });

    // match -----------------------------------------------------------------
    auto* match = app.add_subcommand("match", "match two descriptor files");
    struct {
        std::string metric = "auto", filter = "lowe:0.75", a, b, out;
    } mt;
    match->add_option("--metric", mt.metric, "auto|hamming|euclidean")
        ->check(CLI::IsMember({"auto", "hamming", "euclidean"}));
    match->add_option("--filter", mt.filter, "lowe:<ratio>|mnn:<threshold>");
    match->add_option("a", mt.a, "query descriptor JSON")->required();
    match->add_option("b", mt.b, "reference descriptor JSON")->required();
    match->add_option("--out", mt.out, "match JSON path")->required();
    match->callback([&] {
        const sf::DescriptorSet a = sf::load_external(mt.a);
        const sf::DescriptorSet b = sf::load_external(mt.b);
        if (a.kind != b.kind)
            sf::raise(sf::Errc::kind_mismatch,
                      "descriptor kinds differ between inputs");
        const bool binary = a.kind == sf::DescriptorKind::binary256;
        if ((mt.metric == "hamming" && !binary) ||
            (mt.metric == "euclidean" && binary))
            sf::raise(sf::Errc::kind_mismatch,
                      "metric " + mt.metric + " does not apply to " +
                          std::string(sf::to_string(a.kind)) + " descriptors");
        const sf::MatchFilter filter = sf::MatchFilter::parse(mt.filter);
        const sf::MatchSet result = sf::match_descriptors(a, b, filter);
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& m : result.pairs)
            pairs.push_back({{"query", m.query_idx},
                             {"ref", m.ref_idx},
                             {"distance", m.distance}});
        write_json({{"metric", sf::to_string(result.metric)},
                    {"filter", result.filter.code()},
                    {"count", result.pairs.size()},
                    {"matches", std::move(pairs)}},
                   mt.out);
        std::fprintf(stderr, "%zu matches\n", result.pairs.size());
    });

    // locate ----------------------------------------------------------------
    auto* locate = app.add_subcommand("locate", "find a query slice in a reference stack");
    struct {
        std::string method = "gftt+sift", preproc = "none", query, stack, out;
        std::string hemisphere = "none";
        int window = 7;
    } lc;
    locate->add_option("--method", lc.method, "pipeline, e.g. gftt+sift");
    locate->add_option("--preproc", lc.preproc, "step codes applied to the query");
    locate->add_option("--window", lc.window, "moving-average window (odd)");
    locate->add_option("--hemisphere", lc.hemisphere, "none|left|right (sagittal stacks)")
        ->check(CLI::IsMember({"none", "left", "right"}));
    locate->add_option("query", lc.query, "query PNG")->required();
    locate->add_option("--stack", lc.stack, "reference stack manifest")->required();
    locate->add_option("--out", lc.out, "result JSON path")->required();
    locate->callback([&] {
        sf::LocatorConfig cfg;
        cfg.method = sf::MethodSpec::parse(lc.method);
        cfg.preproc = sf::PreprocSpec::parse(lc.preproc);
        cfg.window = lc.window;
        cfg.hemisphere = sf::hemisphere_from_string(lc.hemisphere);
        const sf::GrayImage query = sf::load_png(lc.query);
        const sf::SliceStack stack = sf::load_stack(lc.stack);
        const sf::LocateResult result = sf::locate(query, stack, cfg);
        write_json({{"best_index", result.best_index},
                    {"best_index_raw", result.best_index_raw},
                    {"peak_snr", result.series.smoothed.empty()
                                     ? 0.0
                                     : result.series.smoothed[stack.position_of(
                                           result.best_index)]},
                    {"reference_subject", stack.subject_id},
                    {"start_index", stack.start_index},
                    {"degenerate", result.series.degenerate},
                    {"counts", result.series.counts},
                    {"snr", result.series.snr},
                    {"smoothed", result.series.smoothed}},
                   lc.out);
        std::fprintf(stderr, "best index %d\n", result.best_index);
    });

    // experiment ------------------------------------------------------------
    auto* experiment = app.add_subcommand("experiment", "run a full experiment spec");
    struct {
        std::string spec, out, formats = "csv,json,svg";
    } ex;
    experiment->add_option("--spec", ex.spec, "experiment spec JSON")->required();
    experiment->add_option("--out", ex.out, "report output directory")->required();
    experiment->add_option("--formats", ex.formats, "comma list of csv,json,svg");
    experiment->callback([&] {
        const unsigned mask = parse_formats(ex.formats);
        const sf::ExperimentSpec spec = sf::ExperimentSpec::from_json_file(ex.spec);
        const sf::ExperimentReport report = sf::run_experiment(spec);
        sf::emit_report(report, ex.out, mask);
        for (const auto& failure : report.failures)
            std::fprintf(stderr, "failure: %s\n", failure.c_str());
        if (!report.failures.empty()) rc = 2;
    });

    // report ----------------------------------------------------------------
    auto* report = app.add_subcommand("report", "re-render outputs from a stored report.json");
    struct {
        std::string in, out, formats = "csv,svg";
    } rp;
    report->add_option("--in", rp.in, "stored report.json")->required();
    report->add_option("--out", rp.out, "output directory")->required();
    report->add_option("--formats", rp.formats, "comma list of csv,json,svg");
    report->callback([&] {
        const unsigned mask = parse_formats(rp.formats);
        std::ifstream in(rp.in);
        if (!in) sf::raise(sf::Errc::missing_file, rp.in);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            sf::raise(sf::Errc::schema_error, rp.in + ": " + e.what());
        }
        sf::emit_report(sf::ExperimentReport::from_json(j), rp.out, mask);
    });

    // synth -----------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a procedural test stack");
    struct {
        std::string out, plane = "axial", subject = "synthetic";
        int width = 160, height = 160, slices = 40;
        std::uint64_t seed = 1, salt = 0;
        double variation = 0.0, gamma = 1.0;
        bool mirrored = false;
    } sy;
    synth->add_option("--out", sy.out, "output directory")->required();
    synth->add_option("--width", sy.width);
    synth->add_option("--height", sy.height);
    synth->add_option("--slices", sy.slices);
    synth->add_option("--seed", sy.seed);
    synth->add_option("--plane", sy.plane)->check(CLI::IsMember({"axial", "sagittal", "coronal"}));
    synth->add_option("--subject", sy.subject);
    synth->add_flag("--mirrored", sy.mirrored, "mirror content about the central slice");
    synth->add_option("--variation-std", sy.variation, "per-slice intensity perturbation");
    synth->add_option("--variation-salt", sy.salt, "decouples perturbation draws");
    synth->add_option("--gamma", sy.gamma, "intensity remap exponent");
    synth->callback([&] {
        sf::SyntheticStackConfig cfg;
        cfg.width = sy.width;
        cfg.height = sy.height;
        cfg.n_slices = sy.slices;
        cfg.seed = sy.seed;
        cfg.plane = sf::plane_from_string(sy.plane);
        cfg.subject_id = sy.subject;
        cfg.mirrored = sy.mirrored;
        cfg.variation_std = sy.variation;
        cfg.variation_salt = sy.salt;
        cfg.gamma = sy.gamma;
        const auto manifest =
            sf::write_stack(sf::make_synthetic_stack(cfg), sy.out);
        std::printf("%s\n", manifest.string().c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const sf::Error& e) {
        std::cerr << "slicefind: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "slicefind: " << e.what() << '\n';
        return 1;
    }
    return rc;
}
