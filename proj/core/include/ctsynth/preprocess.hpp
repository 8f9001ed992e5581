#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctsynth/volume.hpp"

namespace ctsynth {

// Recorded histogram-equalization state. hist_lut maps bin index to the
// equalized value in [0,1]; inv_lut is the sampled inverse (bin centers of
// the preimage). Inversion uses an exact search over hist_lut, which is what
// keeps the full round trip within one bin width; inv_lut is kept for the
// sidecar and for consumers that want a plain table.
struct PreprocessParams {
    std::int64_t bins = 4096;
    double vmin = 0.0;
    double vmax = 0.0;
    double bin_width = 0.0;
    bool constant = false; // degenerate all-equal input
    std::vector<double> hist_lut;
    std::vector<double> inv_lut;

    void validate() const; // throws invalid-params on non-monotone luts

    std::int64_t bin_of(double x) const;
    double bin_center(std::int64_t b) const { return vmin + (static_cast<double>(b) + 0.5) * bin_width; }

    // Forward map raw -> [0,1] through hist_lut.
    double forward(double x) const;
    // Inverse map [0,1] -> raw bin center (exact search over hist_lut).
    double invert(double u) const;
};

// Classic CDF-remap histogram equalization over [vmin, vmax] with `bins`
// bins. Constant input is handled: output all zero, params flagged.
std::pair<Volume, PreprocessParams> equalize(const Volume& v, std::int64_t bins = 4096);

// Applies previously recorded equalization to new data.
Volume apply_equalize(const Volume& v, const PreprocessParams& p);

// Affine min/max map onto [-1, 1]; constant input maps to all zero with the
// bounds still recorded.
std::pair<Volume, std::pair<double, double>> normalize(const Volume& v);

Volume apply_normalize(const Volume& v, std::pair<double, double> bounds);

// Inverse affine then inverse lut. Input is clamped to [-1, 1] first.
Volume denormalize_and_unequalize(const Volume& v, const PreprocessParams& p,
                                  std::pair<double, double> bounds);

// equalize + normalize in one step.
struct Preprocessed {
    Volume volume;
    PreprocessParams params;
    std::pair<double, double> bounds;
};
Preprocessed preprocess(const Volume& v, std::int64_t bins = 4096);

// Sidecar metadata document (`<basename>.meta.json`). All sections optional.
struct SidecarMeta {
    std::optional<PreprocessParams> preprocess;
    std::optional<std::pair<double, double>> bounds;
    std::optional<BlockGrid> grid;
    std::optional<std::string> phantom_spec_json; // opaque pass-through
};

std::string meta_path_for(const std::string& volume_path);
void save_meta(const std::string& path, const SidecarMeta& meta);
SidecarMeta load_meta(const std::string& path);

} // namespace ctsynth
