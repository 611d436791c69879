#ifndef SLICEFIND_STACK_HPP
#define SLICEFIND_STACK_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "slicefind/image.hpp"

namespace slicefind {

enum class Plane { axial, sagittal, coronal };

Plane plane_from_string(const std::string& s);
const char* to_string(Plane plane);

/// Ordered series of same-size slices along one anatomical axis.
/// Slice indices are contiguous from start_index; position p in `slices`
/// carries index start_index + p.
struct SliceStack {
    std::string subject_id;
    Plane plane = Plane::axial;
    double slice_thickness_mm = 1.0;
    int start_index = 0;
    std::vector<GrayImage> slices;

    int size() const { return static_cast<int>(slices.size()); }
    bool empty() const { return slices.empty(); }

    int index_of(int position) const { return start_index + position; }

    /// -1 when the index lies outside the stack.
    int position_of(int index) const {
        int p = index - start_index;
        return (p >= 0 && p < size()) ? p : -1;
    }
};

/// Load a stack described by a JSON manifest:
///   {"subject_id": str, "plane": "axial"|"sagittal"|"coronal",
///    "slice_thickness_mm": number,
///    "slices": [{"index": int, "file": relative-path}, ...]}
/// Indices must be strictly increasing and contiguous; slice files are
/// resolved relative to the manifest directory and must share dimensions.
SliceStack load_stack(const std::filesystem::path& manifest_path);

/// Write slices as PNGs plus a manifest.json into `dir`; returns the
/// manifest path. Convenience for generated stacks.
std::filesystem::path write_stack(const SliceStack& stack,
                                  const std::filesystem::path& dir);

} // namespace slicefind

#endif
