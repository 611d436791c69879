#ifndef SLICEFIND_SYNTHETIC_HPP
#define SLICEFIND_SYNTHETIC_HPP

#include <cstdint>
#include <string>

#include "slicefind/stack.hpp"

namespace slicefind {

/// Parameters for the procedural test stack: an elliptical head whose
/// cross-section swells and shrinks along the slice axis, a bright rim, and
/// a population of small high-contrast structures that drift smoothly from
/// slice to slice, so neighbours look similar but no two slices are equal.
struct SyntheticStackConfig {
    int width = 160;
    int height = 160;
    int n_slices = 40;
    std::uint64_t seed = 1;
    Plane plane = Plane::axial;
    std::string subject_id = "synthetic";
    double slice_thickness_mm = 1.0;

    int structures_per_slice = 30; ///< expected active structures per slice

    /// Mirror content about the central position (sagittal-style symmetry):
    /// positions equidistant from the middle share base content.
    bool mirrored = false;

    /// Per-slice Gaussian intensity perturbation (std, intensity units)
    /// layered on top of the base content; distinguishes mirrored pairs and
    /// separates query stacks from reference stacks.
    double variation_std = 0.0;
    std::uint64_t variation_salt = 0; ///< decouples query/reference draws

    /// Intensity remap out = 255*(v/255)^gamma, modelling a reference stack
    /// with a different grayscale interpretation. 1.0 = off.
    double gamma = 1.0;
};

SliceStack make_synthetic_stack(const SyntheticStackConfig& cfg);

/// One synthetic slice on its own (the stack's slice at `position`).
GrayImage make_synthetic_slice(const SyntheticStackConfig& cfg, int position);

} // namespace slicefind

#endif
