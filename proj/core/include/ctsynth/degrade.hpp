#pragma once

#include <cstdint>
#include <string>

#include "ctsynth/volume.hpp"

namespace ctsynth {

// The three condition families the generator can be trained against.
enum class ConditionKind { autoencoder, noisy, pixelated };

const char* condition_name(ConditionKind k);
ConditionKind condition_from_name(const std::string& name);

// Half-resolution nearest-neighbor degradation, restored to the input edge:
// out(i,j,k) = in(2*floor(i/2), 2*floor(j/2), 2*floor(k/2)). Requires an
// even edge; idempotent.
VoxelBlock pixelate(const VoxelBlock& x);

// Builds the condition block for x. Values are expected in [-1, 1].
//   autoencoder: x unchanged.
//   noisy: per voxel, rate lambda = peak*(v+1)/2, k ~ Poisson(lambda),
//          output 2k/peak - 1 clamped to [-1, 1]. lambda = 0 is exact.
//   pixelated: see pixelate().
VoxelBlock make_condition(const VoxelBlock& x, ConditionKind kind, std::uint64_t rng_seed,
                          std::int64_t peak = 1024);

} // namespace ctsynth
