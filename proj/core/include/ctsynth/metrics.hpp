#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctsynth/volume.hpp"

namespace ctsynth {

enum class SsimMode { global, windowed };

// Mean squared difference over all voxels (raw scale).
double mse(const Volume& a, const Volume& b);

// 10 log10(data_range^2 / MSE); +infinity for identical inputs.
double psnr(const Volume& a, const Volume& b, double data_range = 1.0);

// c1 = (k1 L)^2, c2 = (k2 L)^2. Global mode uses one statistic set over the
// whole volume; windowed mode averages the SSIM of every sliding window
// (uniform weights, valid positions only). Statistics are population-style
// (divide by N), which makes the two modes agree when the window covers the
// entire volume.
double ssim(const Volume& a, const Volume& b, SsimMode mode = SsimMode::windowed,
            std::int64_t window = 7, double k1 = 0.01, double k2 = 0.03,
            double data_range = 1.0);

struct SliceMetrics {
    std::int64_t z = 0;
    double psnr_db = 0.0; // +inf when the slice pair is identical
    double ssim = 0.0;
    bool identical = false;
};

struct QualityReport {
    double psnr_db = 0.0; // mean over slices, identical slices excluded
    double ssim = 0.0;    // mean over all slices
    double volume_psnr_db = 0.0;
    double volume_ssim = 0.0;
    double data_range = 1.0;           // joint range of both volumes
    std::int64_t identical_slices = 0; // excluded from the PSNR mean
    std::vector<SliceMetrics> per_slice;
};

// Per-axial-slice PSNR/SSIM plus their means and whole-volume metrics.
// Slice SSIM uses 7x7 windows capped to the slice extents.
QualityReport evaluate_pair(const Volume& real, const Volume& generated);

std::string report_to_text(const QualityReport& r);
void save_report(const std::string& path, const QualityReport& r);

} // namespace ctsynth
