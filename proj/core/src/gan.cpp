#include "ctsynth/gan.hpp"

#include "ctsynth/threading.hpp"

namespace ctsynth {

Volume infer_volume(const BlockInferFn& fn, const Volume& raw, const PreprocessParams& params,
                    std::pair<double, double> bounds, ConditionKind kind, std::uint64_t seed,
                    std::int64_t edge, std::int64_t noise_peak) {
    const Volume equalized = apply_equalize(raw, params);
    const Volume normalized = apply_normalize(equalized, bounds);
    auto [grid, blocks] = partition(normalized, edge, -1.0);

    std::vector<VoxelBlock> generated(blocks.size());
    parallel_for(static_cast<std::int64_t>(blocks.size()), [&](std::int64_t i) {
        const auto bi = static_cast<std::size_t>(i);
        const VoxelBlock cond = make_condition(
            blocks[bi], kind, mix_seed(seed, 1, static_cast<std::uint64_t>(i)), noise_peak);
        generated[bi] = fn(cond, mix_seed(seed, 2, static_cast<std::uint64_t>(i)));
        generated[bi].origin = blocks[bi].origin;
        generated[bi].edge = blocks[bi].edge;
    });

    const Volume stitched = stitch(grid, generated);
    Volume out = denormalize_and_unequalize(stitched, params, bounds);
    out.spacing = raw.spacing;
    return out;
}

} // namespace ctsynth
