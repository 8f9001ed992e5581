#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ctsynth/errors.hpp"

namespace ctsynth {

// Dense 3D scalar field, x-fastest ordering. Values are kept in double for
// computation; the CTV1 file format stores IEEE-754 binary32, so volumes
// that originate from a file (or any f32-representable source) round-trip
// bit-exactly.
struct Volume {
    std::array<std::int64_t, 3> dims{0, 0, 0}; // (nx, ny, nz)
    std::array<double, 3> spacing{1.0, 1.0, 1.0}; // mm per voxel, informational
    std::vector<double> data;

    Volume() = default;
    Volume(std::int64_t nx, std::int64_t ny, std::int64_t nz, double fill = 0.0);

    std::int64_t nx() const { return dims[0]; }
    std::int64_t ny() const { return dims[1]; }
    std::int64_t nz() const { return dims[2]; }
    std::int64_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

    std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return (z * dims[1] + y) * dims[0] + x;
    }
    double at(std::int64_t x, std::int64_t y, std::int64_t z) const { return data[index(x, y, z)]; }
    double& at(std::int64_t x, std::int64_t y, std::int64_t z) { return data[index(x, y, z)]; }

    bool all_finite() const;
    void validate() const; // throws on invariant violation

    std::pair<double, double> min_max() const;
};

// Cube cut from a (padded) parent volume.
struct VoxelBlock {
    std::int64_t edge = 0;
    std::array<std::int64_t, 3> origin{0, 0, 0};
    std::vector<double> data;

    VoxelBlock() = default;
    VoxelBlock(std::int64_t e, std::array<std::int64_t, 3> o);

    std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return (z * edge + y) * edge + x;
    }
    double at(std::int64_t x, std::int64_t y, std::int64_t z) const { return data[index(x, y, z)]; }
    double& at(std::int64_t x, std::int64_t y, std::int64_t z) { return data[index(x, y, z)]; }
};

// Partition record: how a volume was padded and tiled, enough to stitch the
// blocks back losslessly.
struct BlockGrid {
    std::array<std::int64_t, 3> parent_dims{0, 0, 0};
    std::array<std::int64_t, 3> padded_dims{0, 0, 0};
    std::int64_t edge = 32;
    double pad_value = -1.0;
    std::array<std::int64_t, 3> block_count{0, 0, 0};

    std::int64_t total_blocks() const { return block_count[0] * block_count[1] * block_count[2]; }
};

// CTV1 container: magic "CTV1", three u32 LE dims, then nx*ny*nz f32 LE
// voxels, x-fastest.
Volume load_volume(const std::string& path);
void save_volume(const Volume& v, const std::string& path);

BlockGrid make_block_grid(const std::array<std::int64_t, 3>& dims, std::int64_t edge,
                          double pad_value);

// Pads dims up to multiples of edge, filling with pad_value.
Volume pad_volume(const Volume& v, const BlockGrid& grid);

// Tiles the padded volume into non-overlapping edge^3 blocks. Block order is
// z-major, then y, then x.
std::pair<BlockGrid, std::vector<VoxelBlock>> partition(const Volume& v, std::int64_t edge = 32,
                                                        double pad_value = -1.0);

// Exact inverse of partition: places blocks by origin and trims padding.
Volume stitch(const BlockGrid& grid, const std::vector<VoxelBlock>& blocks);

} // namespace ctsynth
