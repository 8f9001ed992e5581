#include "ctsynth/augment.hpp"

#include <algorithm>

namespace ctsynth {

std::vector<AugmentTransform> enumerate_transforms() {
    std::vector<AugmentTransform> out;
    out.reserve(34);
    int index = 0;
    for (int flip = 0; flip < 2; ++flip)
        for (int rot = 0; rot < 4; ++rot) {
            AugmentTransform t;
            t.index = index++;
            t.kind = AugmentTransform::Kind::rotation_mirror;
            t.quarter_turns = rot;
            t.x_flip = flip != 0;
            out.push_back(t);
        }
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dz = -1; dz <= 1; ++dz) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                AugmentTransform t;
                t.index = index++;
                t.kind = AugmentTransform::Kind::translation;
                t.offset = {dx, dy, dz};
                out.push_back(t);
            }
    return out;
}

namespace {

// 90 degrees in the xy-plane; output dims are (ny, nx, nz).
Volume rotate_quarter(const Volume& v) {
    Volume out(v.ny(), v.nx(), v.nz());
    out.spacing = {v.spacing[1], v.spacing[0], v.spacing[2]};
    for (std::int64_t k = 0; k < v.nz(); ++k)
        for (std::int64_t j = 0; j < out.ny(); ++j)
            for (std::int64_t i = 0; i < out.nx(); ++i)
                out.at(i, j, k) = v.at(j, v.ny() - 1 - i, k);
    return out;
}

Volume flip_x(const Volume& v) {
    Volume out(v.nx(), v.ny(), v.nz());
    out.spacing = v.spacing;
    for (std::int64_t k = 0; k < v.nz(); ++k)
        for (std::int64_t j = 0; j < v.ny(); ++j)
            for (std::int64_t i = 0; i < v.nx(); ++i)
                out.at(i, j, k) = v.at(v.nx() - 1 - i, j, k);
    return out;
}

} // namespace

Volume apply_transform(const Volume& v, const AugmentTransform& t, const BlockGrid& grid) {
    if (v.dims != grid.padded_dims)
        throw error(errc::shape_mismatch, "apply_transform expects a volume padded to the grid");

    if (t.kind == AugmentTransform::Kind::rotation_mirror) {
        if (t.is_identity()) return v;
        Volume out = v;
        for (int q = 0; q < t.quarter_turns; ++q) out = rotate_quarter(out);
        if (t.x_flip) out = flip_x(out);
        return out;
    }

    const std::int64_t sx = static_cast<std::int64_t>(t.offset[0]) * t.stride;
    const std::int64_t sy = static_cast<std::int64_t>(t.offset[1]) * t.stride;
    const std::int64_t sz = static_cast<std::int64_t>(t.offset[2]) * t.stride;
    Volume out(v.nx(), v.ny(), v.nz());
    out.spacing = v.spacing;
    for (std::int64_t k = 0; k < v.nz(); ++k) {
        const std::int64_t zk = std::clamp<std::int64_t>(k + sz, 0, v.nz() - 1);
        for (std::int64_t j = 0; j < v.ny(); ++j) {
            const std::int64_t yj = std::clamp<std::int64_t>(j + sy, 0, v.ny() - 1);
            for (std::int64_t i = 0; i < v.nx(); ++i) {
                const std::int64_t xi = std::clamp<std::int64_t>(i + sx, 0, v.nx() - 1);
                out.at(i, j, k) = v.at(xi, yj, zk);
            }
        }
    }
    return out;
}

} // namespace ctsynth
