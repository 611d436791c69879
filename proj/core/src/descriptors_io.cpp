#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "slicefind/descriptors.hpp"
#include "slicefind/error.hpp"

namespace slicefind {

namespace {

Keypoint keypoint_from_json(const nlohmann::json& j) {
    Keypoint kp;
    kp.x = j.at("x").get<float>();
    kp.y = j.at("y").get<float>();
    kp.response = j.at("response").get<float>();
    kp.octave = j.at("octave").get<int>();
    kp.diameter = j.at("diameter").get<float>();
    const auto& angle = j.at("angle");
    kp.angle = angle.is_null() ? kNoAngle : angle.get<float>();
    return kp;
}

nlohmann::json keypoint_to_json(const Keypoint& kp) {
    nlohmann::json j{{"x", kp.x},
                     {"y", kp.y},
                     {"response", kp.response},
                     {"octave", kp.octave},
                     {"diameter", kp.diameter}};
    if (kp.has_angle())
        j["angle"] = kp.angle;
    else
        j["angle"] = nullptr;
    return j;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

/// 64 hex chars <-> 256 bits; byte k holds bits 8k..8k+7, low nibble last.
void parse_hex_descriptor(const std::string& hex, std::uint64_t words[4],
                          const std::string& where) {
    if (hex.size() != 64)
        raise(Errc::schema_error,
              where + ": binary descriptor must be 64 hex chars, got " +
                  std::to_string(hex.size()));
    for (int k = 0; k < 4; ++k) words[k] = 0;
    for (int byte = 0; byte < 32; ++byte) {
        const int hi = hex_digit(hex[byte * 2]);
        const int lo = hex_digit(hex[byte * 2 + 1]);
        if (hi < 0 || lo < 0)
            raise(Errc::schema_error, where + ": invalid hex digit");
        const auto v = static_cast<std::uint64_t>(hi * 16 + lo);
        words[byte / 8] |= v << ((byte % 8) * 8);
    }
}

std::string format_hex_descriptor(std::span<const std::uint64_t> words) {
    static const char digits[] = "0123456789abcdef";
    std::string hex(64, '0');
    for (int byte = 0; byte < 32; ++byte) {
        const auto v =
            static_cast<unsigned>((words[byte / 8] >> ((byte % 8) * 8)) & 0xFF);
        hex[byte * 2] = digits[v >> 4];
        hex[byte * 2 + 1] = digits[v & 0xF];
    }
    return hex;
}

} // namespace

DescriptorSet load_external(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::missing_file, "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::schema_error, path.string() + ": " + e.what());
    }

    DescriptorSet set;
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "float128")
            set.kind = DescriptorKind::float128;
        else if (kind == "binary256")
            set.kind = DescriptorKind::binary256;
        else
            raise(Errc::schema_error,
                  path.string() + ": unknown kind '" + kind + "'");
        j.at("method").get<std::string>();
        j.at("slice_index").get<int>();

        const auto& kps = j.at("keypoints");
        const auto& descs = j.at("descriptors");
        if (!kps.is_array() || !descs.is_array())
            raise(Errc::schema_error,
                  path.string() + ": keypoints/descriptors must be arrays");
        if (kps.size() != descs.size())
            raise(Errc::schema_error,
                  path.string() + ": " + std::to_string(kps.size()) +
                      " keypoints vs " + std::to_string(descs.size()) +
                      " descriptors");

        for (const auto& kj : kps) set.keypoints.push_back(keypoint_from_json(kj));

        int renormalized = 0;
        for (size_t i = 0; i < descs.size(); ++i) {
            const auto& d = descs[i];
            if (set.kind == DescriptorKind::float128) {
                if (!d.is_array() || d.size() != kFloatDim)
                    raise(Errc::schema_error,
                          path.string() + ": float descriptor " +
                              std::to_string(i) + " must have 128 entries");
                float vec[kFloatDim];
                double norm2 = 0.0;
                for (int k = 0; k < kFloatDim; ++k) {
                    vec[k] = d[k].get<float>();
                    norm2 += static_cast<double>(vec[k]) * vec[k];
                }
                const double norm = std::sqrt(norm2);
                if (norm == 0.0)
                    raise(Errc::norm_violation,
                          path.string() + ": zero-norm float descriptor " +
                              std::to_string(i));
                if (std::abs(norm - 1.0) > 1e-3) {
                    for (float& v : vec) v = static_cast<float>(v / norm);
                    ++renormalized;
                }
                set.floats.insert(set.floats.end(), vec, vec + kFloatDim);
            } else {
                if (!d.is_string())
                    raise(Errc::schema_error,
                          path.string() + ": binary descriptor " +
                              std::to_string(i) + " must be a hex string");
                std::uint64_t words[kBinaryWords];
                parse_hex_descriptor(d.get<std::string>(), words,
                                     path.string());
                set.bits.insert(set.bits.end(), words, words + kBinaryWords);
            }
        }
        if (renormalized > 0)
            std::fprintf(stderr,
                         "warning: %s: renormalized %d descriptor(s) off "
                         "unit norm by more than 1e-3\n",
                         path.string().c_str(), renormalized);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::schema_error, path.string() + ": " + e.what());
    }
    return set;
}

void save_external(const DescriptorSet& set, const std::string& method,
                   int slice_index, const std::filesystem::path& path) {
    nlohmann::json kps = nlohmann::json::array();
    for (const auto& kp : set.keypoints) kps.push_back(keypoint_to_json(kp));

    nlohmann::json descs = nlohmann::json::array();
    for (size_t i = 0; i < set.size(); ++i) {
        if (set.kind == DescriptorKind::float128) {
            nlohmann::json vec = nlohmann::json::array();
            for (float v : set.float_vec(i)) vec.push_back(v);
            descs.push_back(std::move(vec));
        } else {
            descs.push_back(format_hex_descriptor(set.bit_vec(i)));
        }
    }

    nlohmann::json j{{"kind", to_string(set.kind)},
                     {"method", method},
                     {"slice_index", slice_index},
                     {"keypoints", std::move(kps)},
                     {"descriptors", std::move(descs)}};
    std::ofstream out(path);
    if (!out) raise(Errc::io_failure, "cannot write " + path.string());
    out << j.dump() << "\n";
}

} // namespace slicefind
