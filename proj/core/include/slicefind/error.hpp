#ifndef SLICEFIND_ERROR_HPP
#define SLICEFIND_ERROR_HPP

#include <stdexcept>
#include <string>

namespace slicefind {

/// Failure codes for every operation in the library. Tests match on the
/// code, messages carry the offending path / file / value.
enum class Errc {
    missing_file,
    malformed_png,
    unsupported_bit_depth,
    io_failure,
    manifest_parse,
    dimension_mismatch,
    zero_dimension,
    empty_foreground,
    missing_reference,
    image_too_small,
    undefined_angle,
    schema_error,
    norm_violation,
    kind_mismatch,
    empty_reference,
    empty_series,
    zero_baseline,
    empty_outcomes,
    even_window,
    empty_stack,
    hemisphere_on_non_sagittal,
    missing_feature,
    duplicate_entry,
    invalid_argument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace slicefind

#endif
