#include "ctsynth/phantom.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ctsynth/rng.hpp"

namespace ctsynth {

void PhantomSpec::validate() const {
    for (auto d : dims)
        if (d < 16) throw error(errc::spec_invalid, "phantom dims must be >= 16");
    if (!(air_hu < lung_hu && lung_hu < soft_hu && soft_hu < bone_hu))
        throw error(errc::spec_invalid, "intensity bands must be ordered air < lung < soft < bone");
    if (organs < 0 || cavities < 0 || shells < 0)
        throw error(errc::spec_invalid, "structure counts must be >= 0");
    if (texture_amp < 0 || texture_stride < 1)
        throw error(errc::spec_invalid, "bad texture settings");
}

std::string PhantomSpec::to_json() const {
    nlohmann::json j{{"dims", dims},
                     {"seed", seed},
                     {"organs", organs},
                     {"cavities", cavities},
                     {"shells", shells},
                     {"air_hu", air_hu},
                     {"lung_hu", lung_hu},
                     {"soft_hu", soft_hu},
                     {"bone_hu", bone_hu},
                     {"texture_amp", texture_amp},
                     {"texture_stride", texture_stride}};
    return j.dump();
}

namespace {

struct Ellipsoid {
    std::array<double, 3> center; // voxel coordinates
    std::array<double, 3> axes;   // semi-axes in voxels
    double inner = 0.0;           // shells: keep inner <= q <= 1

    double q(double x, double y, double z) const {
        const double dx = (x - center[0]) / axes[0];
        const double dy = (y - center[1]) / axes[1];
        const double dz = (z - center[2]) / axes[2];
        return dx * dx + dy * dy + dz * dz;
    }
};

// Trilinear value noise over a coarse lattice; smooth in [-1, 1].
class ValueNoise {
public:
    ValueNoise(const std::array<std::int64_t, 3>& dims, std::int64_t stride, DetRng& rng)
        : stride_(static_cast<double>(stride)) {
        for (int i = 0; i < 3; ++i) n_[i] = dims[i] / stride + 2;
        lattice_.resize(static_cast<std::size_t>(n_[0] * n_[1] * n_[2]));
        for (auto& v : lattice_) v = rng.uniform(-1.0, 1.0);
    }

    double at(std::int64_t x, std::int64_t y, std::int64_t z) const {
        const double fx = static_cast<double>(x) / stride_;
        const double fy = static_cast<double>(y) / stride_;
        const double fz = static_cast<double>(z) / stride_;
        const std::int64_t ix = static_cast<std::int64_t>(fx);
        const std::int64_t iy = static_cast<std::int64_t>(fy);
        const std::int64_t iz = static_cast<std::int64_t>(fz);
        const double tx = fx - ix, ty = fy - iy, tz = fz - iz;

        double acc = 0;
        for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
                    acc += w * lat(ix + dx, iy + dy, iz + dz);
                }
        return acc;
    }

private:
    double lat(std::int64_t x, std::int64_t y, std::int64_t z) const {
        x = std::clamp<std::int64_t>(x, 0, n_[0] - 1);
        y = std::clamp<std::int64_t>(y, 0, n_[1] - 1);
        z = std::clamp<std::int64_t>(z, 0, n_[2] - 1);
        return lattice_[static_cast<std::size_t>((z * n_[1] + y) * n_[0] + x)];
    }

    double stride_;
    std::array<std::int64_t, 3> n_{};
    std::vector<double> lattice_;
};

} // namespace

Volume generate_phantom(const PhantomSpec& spec) {
    spec.validate();
    DetRng rng(mix_seed(spec.seed, 0x7068616eULL)); // "phan"
    const auto& d = spec.dims;
    const double dx = static_cast<double>(d[0]);
    const double dy = static_cast<double>(d[1]);
    const double dz = static_cast<double>(d[2]);

    auto jitter = [&rng](double base, double spread) { return base + rng.uniform(-spread, spread); };

    std::vector<Ellipsoid> organs;
    for (std::int64_t i = 0; i < spec.organs; ++i) {
        Ellipsoid e;
        if (i == 0) {
            // the body fills most of the field of view
            e.center = {jitter(0.5, 0.03) * dx, jitter(0.5, 0.03) * dy, jitter(0.5, 0.03) * dz};
            e.axes = {jitter(0.38, 0.03) * dx, jitter(0.38, 0.03) * dy, jitter(0.42, 0.04) * dz};
        } else {
            e.center = {jitter(0.5, 0.15) * dx, jitter(0.5, 0.15) * dy, jitter(0.5, 0.15) * dz};
            const double s = 0.06 + rng.uniform01() * 0.08;
            e.axes = {s * dx, jitter(s, 0.02) * dy, jitter(s, 0.02) * dz};
        }
        organs.push_back(e);
    }
    std::vector<double> organ_offset;
    for (std::int64_t i = 0; i < spec.organs; ++i)
        organ_offset.push_back(i == 0 ? 0.0 : rng.uniform(-0.4, 0.4) * spec.soft_tol);

    std::vector<Ellipsoid> cavities;
    for (std::int64_t i = 0; i < spec.cavities; ++i) {
        Ellipsoid e;
        e.center = {jitter(0.5, 0.12) * dx, jitter(0.5, 0.12) * dy, jitter(0.5, 0.12) * dz};
        const double s = 0.10 + rng.uniform01() * 0.10;
        e.axes = {s * dx, jitter(s, 0.03) * dy, jitter(s, 0.03) * dz};
        cavities.push_back(e);
    }

    std::vector<Ellipsoid> shells;
    for (std::int64_t i = 0; i < spec.shells; ++i) {
        Ellipsoid e;
        e.center = {jitter(0.5, 0.12) * dx, jitter(0.5, 0.12) * dy, jitter(0.5, 0.12) * dz};
        const double s = 0.10 + rng.uniform01() * 0.08;
        e.axes = {s * dx, jitter(s, 0.02) * dy, jitter(s, 0.02) * dz};
        e.inner = 0.6;
        shells.push_back(e);
    }

    const ValueNoise noise(d, spec.texture_stride, rng);

    Volume v(d[0], d[1], d[2]);
    for (std::int64_t z = 0; z < d[2]; ++z)
        for (std::int64_t y = 0; y < d[1]; ++y)
            for (std::int64_t x = 0; x < d[0]; ++x) {
                const double fx = x + 0.5, fy = y + 0.5, fz = z + 0.5;

                double base = spec.air_hu;
                double tol = spec.air_tol;
                for (std::size_t i = 0; i < organs.size(); ++i) {
                    if (organs[i].q(fx, fy, fz) <= 1.0) {
                        base = spec.soft_hu + organ_offset[i];
                        tol = spec.soft_tol * 0.5;
                    }
                }
                for (const auto& e : cavities) {
                    if (e.q(fx, fy, fz) <= 1.0) {
                        base = spec.lung_hu;
                        tol = spec.lung_tol;
                    }
                }
                for (const auto& e : shells) {
                    const double q = e.q(fx, fy, fz);
                    if (q >= e.inner && q <= 1.0) {
                        base = spec.bone_hu;
                        tol = spec.bone_tol;
                    }
                }
                v.at(x, y, z) = base + 0.5 * tol * spec.texture_amp * noise.at(x, y, z);
            }
    return v;
}

std::vector<Volume> generate_dataset(std::int64_t n, std::array<std::int64_t, 3> dims,
                                     std::uint64_t seed) {
    if (n < 1) throw error(errc::spec_invalid, "dataset size must be >= 1");
    std::vector<Volume> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        PhantomSpec spec;
        spec.dims = dims;
        spec.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
        out.push_back(generate_phantom(spec));
    }
    return out;
}

} // namespace ctsynth
