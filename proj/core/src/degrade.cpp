#include "ctsynth/degrade.hpp"

#include <algorithm>

#include "ctsynth/rng.hpp"

namespace ctsynth {

const char* condition_name(ConditionKind k) {
    switch (k) {
    case ConditionKind::autoencoder: return "auto";
    case ConditionKind::noisy: return "noisy";
    case ConditionKind::pixelated: return "pixelated";
    }
    return "unknown";
}

ConditionKind condition_from_name(const std::string& name) {
    if (name == "auto" || name == "autoencoder") return ConditionKind::autoencoder;
    if (name == "noisy") return ConditionKind::noisy;
    if (name == "pixelated") return ConditionKind::pixelated;
    throw error(errc::config_invalid, "unknown condition kind: " + name);
}

VoxelBlock pixelate(const VoxelBlock& x) {
    if (x.edge % 2 != 0) throw error(errc::odd_edge, "pixelate requires an even block edge");
    VoxelBlock out(x.edge, x.origin);
    for (std::int64_t k = 0; k < x.edge; ++k)
        for (std::int64_t j = 0; j < x.edge; ++j)
            for (std::int64_t i = 0; i < x.edge; ++i)
                out.at(i, j, k) = x.at(2 * (i / 2), 2 * (j / 2), 2 * (k / 2));
    return out;
}

VoxelBlock make_condition(const VoxelBlock& x, ConditionKind kind, std::uint64_t rng_seed,
                          std::int64_t peak) {
    switch (kind) {
    case ConditionKind::autoencoder:
        return x;
    case ConditionKind::pixelated:
        return pixelate(x);
    case ConditionKind::noisy: {
        if (peak < 1) throw error(errc::invalid_peak, "peak must be >= 1");
        DetRng rng(rng_seed);
        const double p = static_cast<double>(peak);
        VoxelBlock out(x.edge, x.origin);
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const double v = std::clamp(x.data[i], -1.0, 1.0);
            const double lambda = p * (v + 1.0) * 0.5;
            const double k = static_cast<double>(rng.poisson(lambda));
            out.data[i] = std::clamp(2.0 * k / p - 1.0, -1.0, 1.0);
        }
        return out;
    }
    }
    throw error(errc::config_invalid, "unknown condition kind");
}

} // namespace ctsynth
