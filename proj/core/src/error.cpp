#include "slicefind/error.hpp"

namespace slicefind {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::missing_file: return "MissingFile";
    case Errc::malformed_png: return "MalformedPng";
    case Errc::unsupported_bit_depth: return "UnsupportedBitDepth";
    case Errc::io_failure: return "IoFailure";
    case Errc::manifest_parse: return "ManifestParse";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::zero_dimension: return "ZeroDimension";
    case Errc::empty_foreground: return "EmptyForeground";
    case Errc::missing_reference: return "MissingReference";
    case Errc::image_too_small: return "ImageTooSmall";
    case Errc::undefined_angle: return "UndefinedAngle";
    case Errc::schema_error: return "SchemaError";
    case Errc::norm_violation: return "NormViolation";
    case Errc::kind_mismatch: return "KindMismatch";
    case Errc::empty_reference: return "EmptyReference";
    case Errc::empty_series: return "EmptySeries";
    case Errc::zero_baseline: return "ZeroBaseline";
    case Errc::empty_outcomes: return "EmptyOutcomes";
    case Errc::even_window: return "EvenWindow";
    case Errc::empty_stack: return "EmptyStack";
    case Errc::hemisphere_on_non_sagittal: return "HemisphereOnNonSagittal";
    case Errc::missing_feature: return "MissingFeature";
    case Errc::duplicate_entry: return "DuplicateEntry";
    case Errc::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

} // namespace slicefind
