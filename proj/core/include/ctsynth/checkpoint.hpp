#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctsynth/cgan_config.hpp"
#include "ctsynth/unet.hpp"

namespace ctsynth {

struct NamedTensorF32 {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<float> data;
};

// Versioned binary container: magic "CKPT", version u32, generator and
// discriminator parameter tensors (name, shape, f32 LE payload), optimizer
// state tensors, serialized configs, epoch, rng state. Payloads are f32,
// which makes reload-and-continue bit-exact in the f32 training mode.
struct CheckpointData {
    std::uint32_t version = 1;
    std::vector<NamedTensorF32> gen_params;
    std::vector<NamedTensorF32> disc_params;
    std::vector<NamedTensorF32> opt_tensors; // opt.{g,d}.{m,v}.<param-name>
    std::int64_t opt_g_step = 0;
    std::int64_t opt_d_step = 0;
    GeneratorConfig gen_cfg;
    DiscriminatorConfig disc_cfg;
    TrainConfig train_cfg;
    std::int64_t epoch = 0; // epochs completed
    std::uint64_t rng_seed = 0;
    std::uint64_t rng_state = 0;
};

void save_checkpoint(const std::string& path, const CheckpointData& ckpt);
CheckpointData load_checkpoint(const std::string& path);

// Snapshot / restore helpers between models and the flat tensor lists.

template <typename T>
std::vector<NamedTensorF32> snapshot_params(const std::vector<Parameter<T>*>& params) {
    std::vector<NamedTensorF32> out;
    out.reserve(params.size());
    for (const auto* p : params) {
        NamedTensorF32 t;
        t.name = p->name;
        t.shape = p->value.shape;
        t.data.resize(p->value.data.size());
        for (std::size_t i = 0; i < t.data.size(); ++i)
            t.data[i] = static_cast<float>(p->value.data[i]);
        out.push_back(std::move(t));
    }
    return out;
}

template <typename T>
void restore_params(const std::vector<NamedTensorF32>& stored,
                    const std::vector<Parameter<T>*>& params) {
    if (stored.size() != params.size())
        throw error(errc::state_shape_mismatch, "checkpoint parameter count mismatch");
    for (std::size_t i = 0; i < stored.size(); ++i) {
        if (stored[i].name != params[i]->name || stored[i].shape != params[i]->value.shape)
            throw error(errc::state_shape_mismatch,
                        "checkpoint parameter mismatch at " + stored[i].name);
        for (std::size_t j = 0; j < stored[i].data.size(); ++j)
            params[i]->value.data[j] = static_cast<T>(stored[i].data[j]);
    }
}

} // namespace ctsynth
