#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ctsynth/volume.hpp"

namespace ctsynth {

// Procedural CT-like test volume: smooth ellipsoid structures over an air
// background, with band-limited value-noise texture so degradation tasks
// have recoverable high-frequency content. Intensities are synthetic-HU.
struct PhantomSpec {
    std::array<std::int64_t, 3> dims{64, 64, 64};
    std::uint64_t seed = 0;

    std::int64_t organs = 3;   // soft-tissue ellipsoids; the first is the body
    std::int64_t cavities = 2; // low-density lung pockets
    std::int64_t shells = 1;   // high-density bone shells

    double air_hu = -1000.0, air_tol = 80.0;
    double lung_hu = -700.0, lung_tol = 100.0;
    double soft_hu = 40.0, soft_tol = 60.0;
    double bone_hu = 700.0, bone_tol = 300.0;

    double texture_amp = 1.0; // scales the per-band noise amplitude
    std::int64_t texture_stride = 4;

    void validate() const;
    std::string to_json() const;
};

// Deterministic in spec.seed. Paints air, then body and organs, carves
// cavities, overlays bone shells, then adds texture noise within each band.
Volume generate_phantom(const PhantomSpec& spec);

// n phantoms with per-volume derived seeds.
std::vector<Volume> generate_dataset(std::int64_t n, std::array<std::int64_t, 3> dims,
                                     std::uint64_t seed);

} // namespace ctsynth
