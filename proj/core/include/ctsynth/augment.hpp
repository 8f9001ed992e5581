#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ctsynth/volume.hpp"

namespace ctsynth {

// One member of the deterministic 34-transform augmentation family:
//   indices 0-7: the 8 rigid symmetries about the z axis, rotation
//                quarter-turns 0-3 crossed with an optional x-flip
//                (index = flip*4 + quarter_turns; 0 is the identity);
//   indices 8-33: the 26 nonzero offsets in {-1,0,1}^3, lexicographic,
//                 scaled by an 8-voxel stride, sampled with edge clamping.
struct AugmentTransform {
    enum class Kind { rotation_mirror, translation };

    int index = 0;
    Kind kind = Kind::rotation_mirror;
    int quarter_turns = 0; // z-axis rotation, 0-3
    bool x_flip = false;
    std::array<int, 3> offset{0, 0, 0}; // in {-1,0,1}^3 \ {0} for translations
    int stride = 8;

    bool is_identity() const {
        return kind == Kind::rotation_mirror && quarter_turns == 0 && !x_flip;
    }
};

// All 34 transforms in fixed order; index 0 is the identity.
std::vector<AugmentTransform> enumerate_transforms();

// Applies t to a volume padded to grid.padded_dims. Rotation-mirror
// variants permute voxels exactly (odd quarter turns swap the x/y extents);
// translations shift the sampling window with edge-clamped reads.
Volume apply_transform(const Volume& v, const AugmentTransform& t, const BlockGrid& grid);

} // namespace ctsynth
