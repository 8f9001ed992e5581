#pragma once

#include <cstdint>

#include "ctsynth/adam.hpp"
#include "ctsynth/errors.hpp"

namespace ctsynth {

// Literal minimax form vs the stable -ln D(G) variant.
enum class GenLossMode { saturating, non_saturating };

struct GeneratorConfig {
    std::int64_t edge = 32;
    std::int64_t in_channels = 2; // condition + uniform-noise channel
    std::int64_t base_channels = 16;
    std::int64_t depth = 3; // down/up levels; 2 suits edges 8-16
    std::int64_t kernel = 3;
    bool noise_channel = true;

    void validate() const {
        if (depth < 1) throw error(errc::config_invalid, "generator depth must be >= 1");
        if (base_channels < 1 || in_channels < 1 || kernel < 1 || kernel % 2 == 0)
            throw error(errc::config_invalid, "bad generator channel/kernel config");
        if (edge < 2 || edge % (std::int64_t(1) << depth) != 0)
            throw error(errc::config_invalid, "block edge must be divisible by 2^depth");
    }

    static GeneratorConfig for_edge(std::int64_t edge) {
        GeneratorConfig cfg;
        cfg.edge = edge;
        cfg.depth = edge >= 32 ? 3 : 2;
        return cfg;
    }
};

struct DiscriminatorConfig {
    std::int64_t edge = 32;
    std::int64_t in_channels = 2; // condition + candidate, channel-concatenated
    std::int64_t base_channels = 16;
    std::int64_t layers = 3;
    std::int64_t kernel = 3;

    void validate() const {
        if (layers < 1) throw error(errc::config_invalid, "discriminator layers must be >= 1");
        if (base_channels < 1 || in_channels < 1 || kernel < 1 || kernel % 2 == 0)
            throw error(errc::config_invalid, "bad discriminator channel/kernel config");
        if (edge < 2) throw error(errc::config_invalid, "bad discriminator edge");
    }

    static DiscriminatorConfig for_edge(std::int64_t edge) {
        DiscriminatorConfig cfg;
        cfg.edge = edge;
        return cfg;
    }
};

struct TrainConfig {
    std::int64_t epochs = 50;     // paper-scale run uses 100
    std::int64_t batch_size = 8;  // paper-scale run uses 50
    double lambda_l1 = 100.0;
    std::uint64_t seed = 0;
    GenLossMode gen_loss_mode = GenLossMode::non_saturating;
    AdamConfig adam;
    std::int64_t checkpoint_every = 10; // epochs; 0 writes only the final one
    std::int64_t noise_peak = 1024;     // Poisson peak for on-the-fly conditions

    void validate() const {
        if (epochs < 1) throw error(errc::config_invalid, "epochs must be >= 1");
        if (batch_size < 1) throw error(errc::config_invalid, "batch_size must be >= 1");
        if (lambda_l1 < 0) throw error(errc::config_invalid, "lambda_l1 must be >= 0");
        if (checkpoint_every < 0)
            throw error(errc::config_invalid, "checkpoint_every must be >= 0");
    }

    static TrainConfig paper_scale() {
        TrainConfig cfg;
        cfg.epochs = 100;
        cfg.batch_size = 50;
        return cfg;
    }
};

} // namespace ctsynth
