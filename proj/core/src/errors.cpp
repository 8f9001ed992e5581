#include "ctsynth/errors.hpp"

namespace ctsynth {

const char* errc_name(errc c) {
    switch (c) {
    case errc::bad_magic: return "bad-magic";
    case errc::dimension_overflow: return "dimension-overflow";
    case errc::truncated_file: return "truncated-file";
    case errc::non_finite_voxel: return "non-finite-voxel";
    case errc::io_failure: return "io-failure";
    case errc::grid_mismatch: return "grid-mismatch";
    case errc::invalid_params: return "invalid-params";
    case errc::invalid_peak: return "invalid-peak";
    case errc::odd_edge: return "odd-edge";
    case errc::empty_input: return "empty-input";
    case errc::shape_mismatch: return "shape-mismatch";
    case errc::state_shape_mismatch: return "state-shape-mismatch";
    case errc::config_invalid: return "config-invalid";
    case errc::window_too_large: return "window-too-large";
    case errc::spec_invalid: return "spec-invalid";
    case errc::numeric_divergence: return "numeric-divergence";
    case errc::verification_failure: return "verification-failure";
    }
    return "unknown-error";
}

} // namespace ctsynth
