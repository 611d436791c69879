#include <fstream>

#include "slicefind/error.hpp"
#include "slicefind/harness.hpp"

namespace slicefind {

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "identity") return ExperimentKind::identity;
    if (s == "robustness") return ExperimentKind::robustness;
    if (s == "cross_patient") return ExperimentKind::cross_patient;
    if (s == "atlas") return ExperimentKind::atlas;
    raise(Errc::schema_error, "unknown experiment kind '" + s + "'");
}

const char* to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::identity: return "identity";
    case ExperimentKind::robustness: return "robustness";
    case ExperimentKind::cross_patient: return "cross_patient";
    case ExperimentKind::atlas: return "atlas";
    }
    return "identity";
}

namespace {

nlohmann::json degradation_to_json(const Degradation& d) {
    switch (d.kind) {
    case DegradationKind::rotation:
        return {{"kind", "rotation"}, {"deg", d.rotation_deg}};
    case DegradationKind::scaling:
        return {{"kind", "scaling"}, {"factor", d.scale_factor}};
    case DegradationKind::noise:
        return {{"kind", "noise"}, {"std", d.noise_std}, {"seed", d.seed}};
    }
    return {};
}

Degradation degradation_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "rotation")
        return Degradation::rotation(j.at("deg").get<double>());
    if (kind == "scaling")
        return Degradation::scaling(j.at("factor").get<double>());
    if (kind == "noise")
        return Degradation::gaussian_noise(
            j.at("std").get<double>(),
            j.value("seed", std::uint64_t{0}));
    raise(Errc::schema_error, "unknown degradation kind '" + kind + "'");
}

} // namespace

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    try {
        spec.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
        spec.methods = j.at("methods").get<std::vector<std::string>>();

        if (j.contains("preprocs"))
            spec.preprocs = j["preprocs"].get<std::vector<std::string>>();
        for (const auto& p : spec.preprocs) PreprocSpec::parse(p); // validate
        if (j.contains("degradations")) {
            spec.degradations.clear();
            for (const auto& dj : j["degradations"])
                spec.degradations.push_back(degradation_from_json(dj));
        }
        if (j.contains("d_values"))
            spec.d_values = j["d_values"].get<std::vector<int>>();
        spec.window = j.value("window", 7);
        if (spec.window < 1 || spec.window % 2 == 0)
            raise(Errc::even_window, "window must be odd and >= 1");

        spec.stacks.clear();
        for (const auto& sj : j.at("stacks")) {
            StackRef ref;
            ref.subject = sj.at("subject").get<std::string>();
            ref.manifest = sj.at("manifest").get<std::string>();
            ref.role = sj.value("role", std::string("query"));
            if (ref.role != "query" && ref.role != "reference")
                raise(Errc::schema_error,
                      "stack role must be 'query' or 'reference', got '" +
                          ref.role + "'");
            spec.stacks.push_back(std::move(ref));
        }
        spec.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("plot_slice_ids"))
            spec.plot_slice_ids = j["plot_slice_ids"].get<std::vector<int>>();
        if (j.contains("index_map")) {
            spec.index_map.offset = j["index_map"].value("offset", 0.0);
            spec.index_map.scale = j["index_map"].value("scale", 1.0);
        }
        if (j.contains("query_range")) {
            IndexRange r;
            r.first = j["query_range"].at("first").get<int>();
            r.last = j["query_range"].at("last").get<int>();
            spec.query_range = r;
        }
        spec.hemisphere_restriction = j.value("hemisphere_restriction", false);
        spec.features_dir = j.value("features_dir", std::string());
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::schema_error, std::string("experiment spec: ") + e.what());
    }
    if (spec.methods.empty())
        raise(Errc::schema_error, "experiment spec: methods must be non-empty");
    if (spec.stacks.empty())
        raise(Errc::schema_error, "experiment spec: stacks must be non-empty");
    return spec;
}

ExperimentSpec ExperimentSpec::from_json_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::missing_file, "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::schema_error, path.string() + ": " + e.what());
    }
    ExperimentSpec spec = from_json(j);
    spec.base_dir = path.parent_path();
    if (spec.base_dir.empty()) spec.base_dir = ".";
    return spec;
}

nlohmann::json ExperimentSpec::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)},
                     {"methods", methods},
                     {"preprocs", preprocs},
                     {"d_values", d_values},
                     {"window", window},
                     {"seed", seed},
                     {"plot_slice_ids", plot_slice_ids},
                     {"hemisphere_restriction", hemisphere_restriction},
                     {"features_dir", features_dir}};
    j["degradations"] = nlohmann::json::array();
    for (const auto& d : degradations)
        j["degradations"].push_back(degradation_to_json(d));
    j["stacks"] = nlohmann::json::array();
    for (const auto& s : stacks)
        j["stacks"].push_back({{"subject", s.subject},
                               {"manifest", s.manifest},
                               {"role", s.role}});
    j["index_map"] = {{"offset", index_map.offset},
                      {"scale", index_map.scale}};
    if (query_range)
        j["query_range"] = {{"first", query_range->first},
                            {"last", query_range->last}};
    return j;
}

std::uint64_t ExperimentSpec::config_hash() const {
    const std::string canon = to_json().dump();
    std::uint64_t h = 0xCBF29CE484222325ULL; // FNV-1a
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

void FeatureStore::ingest(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        raise(Errc::missing_file,
              "feature directory " + dir.string() + " does not exist");

    std::vector<std::filesystem::path> files;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        std::ifstream in(path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::schema_error, path.string() + ": " + e.what());
        }
        std::string subject;
        std::string method;
        int slice_index = 0;
        try {
            method = j.at("method").get<std::string>();
            slice_index = j.at("slice_index").get<int>();
            subject = j.contains("subject")
                          ? j["subject"].get<std::string>()
                          : path.parent_path().filename().string();
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::schema_error, path.string() + ": " + e.what());
        }

        auto key = std::make_tuple(subject, slice_index, method);
        if (entries_.count(key))
            raise(Errc::duplicate_entry,
                  path.string() + ": repeated (" + subject + ", " +
                      std::to_string(slice_index) + ", " + method + ")");
        entries_.emplace(std::move(key), load_external(path));
    }
}

bool FeatureStore::contains(const std::string& subject, int slice_index,
                            const std::string& method) const {
    return entries_.count({subject, slice_index, method}) > 0;
}

const DescriptorSet& FeatureStore::get(const std::string& subject,
                                       int slice_index,
                                       const std::string& method) const {
    const auto it = entries_.find({subject, slice_index, method});
    if (it == entries_.end())
        raise(Errc::missing_feature,
              "no external features for (" + subject + ", " +
                  std::to_string(slice_index) + ", " + method + ")");
    return it->second;
}

std::vector<std::string> FeatureStore::methods() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : entries_) {
        const auto& m = std::get<2>(key);
        if (out.empty() || out.back() != m) out.push_back(m);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace slicefind
