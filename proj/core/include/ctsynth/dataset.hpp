#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctsynth/degrade.hpp"
#include "ctsynth/volume.hpp"

namespace ctsynth {

struct TrainingPair {
    VoxelBlock condition;
    VoxelBlock target;
    std::int32_t volume_index = 0;
    std::int32_t transform_index = 0;
    std::int32_t block_index = 0;
};

// Optional block-selection hook: return false to drop a block (and its 34
// augmented variants are filtered independently). Default accepts all.
using BlockFilter = std::function<bool(const VoxelBlock& target)>;

// For each volume, for each of the 34 transforms, partitions the padded
// volume and emits (condition, target) pairs. Noise seeds derive from
// (seed, volume index, transform index, block index), so the result is
// identical under any evaluation order.
std::vector<TrainingPair> build_training_set(const std::vector<Volume>& volumes,
                                             ConditionKind kind, std::uint64_t seed,
                                             std::int64_t edge = 32, double pad_value = -1.0,
                                             std::int64_t noise_peak = 1024,
                                             const BlockFilter& filter = {});

// On-disk pair set: block files `vol{V}_t{T}_b{B}_{cond|target}.ctv` plus a
// manifest listing the seed and every pair.
struct PairSet {
    std::vector<TrainingPair> pairs;
    std::uint64_t seed = 0;
    std::int64_t edge = 0;
    ConditionKind kind = ConditionKind::autoencoder;
};

std::string manifest_path_for(const std::string& dir);
void write_pairs(const std::string& dir, const std::vector<TrainingPair>& pairs,
                 ConditionKind kind, std::uint64_t seed, std::int64_t edge);
PairSet load_pairs(const std::string& manifest_path);

} // namespace ctsynth
