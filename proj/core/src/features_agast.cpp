#include <fstream>

#include <nlohmann/json.hpp>

#include "detail/fast.hpp"
#include "slicefind/error.hpp"
#include "slicefind/features.hpp"

namespace slicefind {

void DetectorConfig::validate() const {
    if (fast_threshold < 1)
        raise(Errc::invalid_argument, "fast_threshold must be >= 1");
    if (!(gftt_quality > 0.0))
        raise(Errc::invalid_argument, "gftt_quality must be > 0");
    if (!(gftt_min_distance > 0.0))
        raise(Errc::invalid_argument, "gftt_min_distance must be > 0");
    if (gftt_max_corners < 1 || orb_n_features < 1 || orb_n_levels < 1)
        raise(Errc::invalid_argument, "counts must be >= 1");
    if (!(orb_scale_factor > 1.0))
        raise(Errc::invalid_argument, "orb_scale_factor must be > 1");
}

DetectorConfig DetectorConfig::from_json_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::missing_file, "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::schema_error, path.string() + ": " + e.what());
    }
    if (!j.is_object())
        raise(Errc::schema_error, path.string() + ": expected an object");

    DetectorConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "fast_threshold") cfg.fast_threshold = value.get<int>();
            else if (key == "gftt_quality") cfg.gftt_quality = value.get<double>();
            else if (key == "gftt_min_distance")
                cfg.gftt_min_distance = value.get<double>();
            else if (key == "gftt_max_corners")
                cfg.gftt_max_corners = value.get<int>();
            else if (key == "orb_n_features")
                cfg.orb_n_features = value.get<int>();
            else if (key == "orb_scale_factor")
                cfg.orb_scale_factor = value.get<double>();
            else if (key == "orb_n_levels") cfg.orb_n_levels = value.get<int>();
            else
                raise(Errc::schema_error,
                      path.string() + ": unknown key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::schema_error, path.string() + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

std::vector<Keypoint> detect_agast(const GrayImage& img,
                                   const DetectorConfig& cfg) {
    cfg.validate();
    if (img.width < 7 || img.height < 7)
        raise(Errc::image_too_small, "segment test needs at least 7x7");
    return detail::fast9_detect(img, cfg.fast_threshold);
}

void save_keypoints(const std::vector<Keypoint>& kps,
                    const std::filesystem::path& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& kp : kps) {
        nlohmann::json j{{"x", kp.x},
                         {"y", kp.y},
                         {"response", kp.response},
                         {"octave", kp.octave},
                         {"diameter", kp.diameter}};
        if (kp.has_angle())
            j["angle"] = kp.angle;
        else
            j["angle"] = nullptr;
        arr.push_back(std::move(j));
    }
    std::ofstream out(path);
    if (!out) raise(Errc::io_failure, "cannot write " + path.string());
    out << arr.dump(2) << "\n";
}

std::vector<Keypoint> load_keypoints(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::missing_file, "cannot open " + path.string());
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::schema_error, path.string() + ": " + e.what());
    }
    if (!arr.is_array())
        raise(Errc::schema_error, path.string() + ": expected an array");

    std::vector<Keypoint> kps;
    kps.reserve(arr.size());
    for (const auto& j : arr) {
        Keypoint kp;
        try {
            kp.x = j.at("x").get<float>();
            kp.y = j.at("y").get<float>();
            kp.response = j.at("response").get<float>();
            kp.octave = j.at("octave").get<int>();
            kp.diameter = j.at("diameter").get<float>();
            const auto& angle = j.at("angle");
            kp.angle = angle.is_null() ? kNoAngle : angle.get<float>();
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::schema_error, path.string() + ": " + e.what());
        }
        kps.push_back(kp);
    }
    return kps;
}

} // namespace slicefind
