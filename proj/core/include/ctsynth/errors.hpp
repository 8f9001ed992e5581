#pragma once

#include <stdexcept>
#include <string>

namespace ctsynth {

// Stable error codes; the CLI maps these onto process exit codes.
enum class errc {
    bad_magic,
    dimension_overflow,
    truncated_file,
    non_finite_voxel,
    io_failure,
    grid_mismatch,
    invalid_params,
    invalid_peak,
    odd_edge,
    empty_input,
    shape_mismatch,
    state_shape_mismatch,
    config_invalid,
    window_too_large,
    spec_invalid,
    numeric_divergence,
    verification_failure,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace ctsynth
