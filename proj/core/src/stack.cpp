#include "slicefind/stack.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "slicefind/png_io.hpp"

namespace slicefind {

Plane plane_from_string(const std::string& s) {
    if (s == "axial") return Plane::axial;
    if (s == "sagittal") return Plane::sagittal;
    if (s == "coronal") return Plane::coronal;
    raise(Errc::manifest_parse, "unknown plane '" + s + "'");
}

const char* to_string(Plane plane) {
    switch (plane) {
    case Plane::axial: return "axial";
    case Plane::sagittal: return "sagittal";
    case Plane::coronal: return "coronal";
    }
    return "axial";
}

SliceStack load_stack(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in)
        raise(Errc::missing_file, "cannot open manifest " + manifest_path.string());

    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::manifest_parse,
              manifest_path.string() + ": " + e.what());
    }

    SliceStack stack;
    try {
        stack.subject_id = j.at("subject_id").get<std::string>();
        stack.plane = plane_from_string(j.at("plane").get<std::string>());
        stack.slice_thickness_mm = j.at("slice_thickness_mm").get<double>();
        if (!j.at("slices").is_array() || j["slices"].empty())
            raise(Errc::manifest_parse,
                  manifest_path.string() + ": empty slice list");
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::manifest_parse, manifest_path.string() + ": " + e.what());
    }

    const auto base_dir = manifest_path.parent_path();
    int expected_index = 0;
    bool first = true;
    for (const auto& entry : j["slices"]) {
        int index;
        std::string file;
        try {
            index = entry.at("index").get<int>();
            file = entry.at("file").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::manifest_parse,
                  manifest_path.string() + ": " + e.what());
        }
        if (first) {
            stack.start_index = index;
            expected_index = index;
            first = false;
        }
        if (index != expected_index)
            raise(Errc::manifest_parse,
                  manifest_path.string() + ": slice indices must be strictly "
                  "increasing and contiguous, got " + std::to_string(index) +
                  " after " + std::to_string(expected_index - 1));
        ++expected_index;

        GrayImage img = load_png(base_dir / file);
        if (!stack.slices.empty() &&
            (img.width != stack.slices.front().width ||
             img.height != stack.slices.front().height))
            raise(Errc::dimension_mismatch,
                  file + " is " + std::to_string(img.width) + "x" +
                      std::to_string(img.height) + ", expected " +
                      std::to_string(stack.slices.front().width) + "x" +
                      std::to_string(stack.slices.front().height));
        stack.slices.push_back(std::move(img));
    }
    return stack;
}

std::filesystem::path write_stack(const SliceStack& stack,
                                  const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    nlohmann::json slices = nlohmann::json::array();
    for (int p = 0; p < stack.size(); ++p) {
        char name[32];
        std::snprintf(name, sizeof(name), "slice_%04d.png", stack.index_of(p));
        save_png(stack.slices[p], dir / name);
        slices.push_back({{"index", stack.index_of(p)}, {"file", name}});
    }
    nlohmann::json manifest{{"subject_id", stack.subject_id},
                            {"plane", to_string(stack.plane)},
                            {"slice_thickness_mm", stack.slice_thickness_mm},
                            {"slices", slices}};

    const auto manifest_path = dir / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out)
        raise(Errc::io_failure, "cannot write " + manifest_path.string());
    out << manifest.dump(2) << "\n";
    return manifest_path;
}

} // namespace slicefind
