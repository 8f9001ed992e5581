#include "ctsynth/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace ctsynth {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'V', '1'};
constexpr std::uint64_t kMaxVoxels = std::uint64_t(1) << 32;

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

} // namespace

Volume::Volume(std::int64_t nx, std::int64_t ny, std::int64_t nz, double fill)
    : dims{nx, ny, nz} {
    if (nx <= 0 || ny <= 0 || nz <= 0)
        throw error(errc::dimension_overflow, "volume dims must be positive");
    data.assign(static_cast<std::size_t>(nx * ny * nz), fill);
}

bool Volume::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Volume::validate() const {
    if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
        throw error(errc::dimension_overflow, "volume dims must be positive");
    if (static_cast<std::int64_t>(data.size()) != voxel_count())
        throw error(errc::shape_mismatch, "volume data length does not match dims");
    if (!all_finite()) throw error(errc::non_finite_voxel, "volume contains NaN or Inf");
}

std::pair<double, double> Volume::min_max() const {
    auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    return {*lo, *hi};
}

VoxelBlock::VoxelBlock(std::int64_t e, std::array<std::int64_t, 3> o) : edge(e), origin(o) {
    data.assign(static_cast<std::size_t>(e * e * e), 0.0);
}

Volume load_volume(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error(errc::io_failure, "cannot open " + path);

    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw error(errc::bad_magic, "not a CTV1 file: " + path);

    std::uint32_t nx = read_u32(f), ny = read_u32(f), nz = read_u32(f);
    if (!f) throw error(errc::truncated_file, "header ends early in " + path);
    if (nx == 0 || ny == 0 || nz == 0)
        throw error(errc::dimension_overflow, "zero dimension in " + path);
    const std::uint64_t n = std::uint64_t(nx) * ny * nz;
    if (n > kMaxVoxels)
        throw error(errc::dimension_overflow, "voxel count exceeds 2^32 in " + path);

    Volume v;
    v.dims = {std::int64_t(nx), std::int64_t(ny), std::int64_t(nz)};
    v.data.resize(static_cast<std::size_t>(n));

    std::vector<float> raw(static_cast<std::size_t>(n));
    f.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(n * sizeof(float)));
    if (static_cast<std::uint64_t>(f.gcount()) != n * sizeof(float))
        throw error(errc::truncated_file, "payload ends early in " + path);

    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]))
            throw error(errc::non_finite_voxel, "non-finite voxel in " + path);
        v.data[i] = static_cast<double>(raw[i]);
    }
    return v;
}

void save_volume(const Volume& v, const std::string& path) {
    v.validate();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error(errc::io_failure, "cannot create " + path);

    f.write(kMagic, 4);
    write_u32(f, static_cast<std::uint32_t>(v.dims[0]));
    write_u32(f, static_cast<std::uint32_t>(v.dims[1]));
    write_u32(f, static_cast<std::uint32_t>(v.dims[2]));

    std::vector<float> raw(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) raw[i] = static_cast<float>(v.data[i]);
    f.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!f) throw error(errc::io_failure, "write failed for " + path);
}

BlockGrid make_block_grid(const std::array<std::int64_t, 3>& dims, std::int64_t edge,
                          double pad_value) {
    if (edge < 2) throw error(errc::config_invalid, "block edge must be >= 2");
    BlockGrid g;
    g.parent_dims = dims;
    g.edge = edge;
    g.pad_value = pad_value;
    for (int i = 0; i < 3; ++i) {
        g.block_count[i] = (dims[i] + edge - 1) / edge;
        g.padded_dims[i] = g.block_count[i] * edge;
    }
    return g;
}

Volume pad_volume(const Volume& v, const BlockGrid& grid) {
    if (v.dims == grid.padded_dims) return v;
    Volume out(grid.padded_dims[0], grid.padded_dims[1], grid.padded_dims[2], grid.pad_value);
    out.spacing = v.spacing;
    for (std::int64_t z = 0; z < v.nz(); ++z)
        for (std::int64_t y = 0; y < v.ny(); ++y) {
            const double* src = &v.data[static_cast<std::size_t>(v.index(0, y, z))];
            double* dst = &out.data[static_cast<std::size_t>(out.index(0, y, z))];
            std::copy(src, src + v.nx(), dst);
        }
    return out;
}

std::pair<BlockGrid, std::vector<VoxelBlock>> partition(const Volume& v, std::int64_t edge,
                                                        double pad_value) {
    v.validate();
    BlockGrid grid = make_block_grid(v.dims, edge, pad_value);
    const Volume padded = pad_volume(v, grid);

    std::vector<VoxelBlock> blocks;
    blocks.reserve(static_cast<std::size_t>(grid.total_blocks()));
    for (std::int64_t bz = 0; bz < grid.block_count[2]; ++bz)
        for (std::int64_t by = 0; by < grid.block_count[1]; ++by)
            for (std::int64_t bx = 0; bx < grid.block_count[0]; ++bx) {
                VoxelBlock b(edge, {bx * edge, by * edge, bz * edge});
                for (std::int64_t z = 0; z < edge; ++z)
                    for (std::int64_t y = 0; y < edge; ++y) {
                        const double* src = &padded.data[static_cast<std::size_t>(
                            padded.index(b.origin[0], b.origin[1] + y, b.origin[2] + z))];
                        std::copy(src, src + edge, &b.data[static_cast<std::size_t>(b.index(0, y, z))]);
                    }
                blocks.push_back(std::move(b));
            }
    return {grid, std::move(blocks)};
}

Volume stitch(const BlockGrid& grid, const std::vector<VoxelBlock>& blocks) {
    if (static_cast<std::int64_t>(blocks.size()) != grid.total_blocks())
        throw error(errc::grid_mismatch, "block count does not match grid");

    Volume padded(grid.padded_dims[0], grid.padded_dims[1], grid.padded_dims[2]);
    std::vector<char> seen(static_cast<std::size_t>(grid.total_blocks()), 0);

    for (const auto& b : blocks) {
        if (b.edge != grid.edge)
            throw error(errc::grid_mismatch, "block edge does not match grid");
        for (int i = 0; i < 3; ++i) {
            if (b.origin[i] < 0 || b.origin[i] % grid.edge != 0 ||
                b.origin[i] + grid.edge > grid.padded_dims[i])
                throw error(errc::grid_mismatch, "block origin outside grid");
        }
        if (static_cast<std::int64_t>(b.data.size()) != grid.edge * grid.edge * grid.edge)
            throw error(errc::grid_mismatch, "block data length mismatch");
        const std::int64_t slot =
            ((b.origin[2] / grid.edge) * grid.block_count[1] + b.origin[1] / grid.edge) *
                grid.block_count[0] +
            b.origin[0] / grid.edge;
        if (seen[static_cast<std::size_t>(slot)])
            throw error(errc::grid_mismatch, "duplicate block origin");
        seen[static_cast<std::size_t>(slot)] = 1;

        for (std::int64_t z = 0; z < grid.edge; ++z)
            for (std::int64_t y = 0; y < grid.edge; ++y) {
                const double* src = &b.data[static_cast<std::size_t>(b.index(0, y, z))];
                double* dst = &padded.data[static_cast<std::size_t>(
                    padded.index(b.origin[0], b.origin[1] + y, b.origin[2] + z))];
                std::copy(src, src + grid.edge, dst);
            }
    }

    if (grid.parent_dims == grid.padded_dims) return padded;

    Volume out(grid.parent_dims[0], grid.parent_dims[1], grid.parent_dims[2]);
    for (std::int64_t z = 0; z < out.nz(); ++z)
        for (std::int64_t y = 0; y < out.ny(); ++y) {
            const double* src = &padded.data[static_cast<std::size_t>(padded.index(0, y, z))];
            std::copy(src, src + out.nx(), &out.data[static_cast<std::size_t>(out.index(0, y, z))]);
        }
    return out;
}

} // namespace ctsynth
