#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "ctsynth/checkpoint.hpp"
#include "ctsynth/dataset.hpp"
#include "ctsynth/preprocess.hpp"
#include "ctsynth/unet.hpp"

namespace ctsynth {

// Conditional adversarial losses (the patch grid is treated as independent
// Bernoulli terms and averaged).

// -mean ln d_real - mean ln(1 - d_fake)
template <typename T>
Node<T>* discriminator_loss(Tape<T>& tape, Node<T>* d_real, Node<T>* d_fake,
                            double eps = 1e-7) {
    Tensor<T> ones(d_real->value.shape);
    ones.fill(T(1));
    Tensor<T> zeros(d_fake->value.shape);
    return tape.add(tape.bce_loss(d_real, ones, eps), tape.bce_loss(d_fake, zeros, eps));
}

template <typename T>
struct GenLossParts {
    Node<T>* total;
    Node<T>* adversarial;
    Node<T>* l1;
};

// saturating: mean ln(1 - d_fake) + lambda * L1
// non-saturating: -mean ln d_fake + lambda * L1
template <typename T>
GenLossParts<T> generator_loss(Tape<T>& tape, Node<T>* d_fake, Node<T>* g_out,
                               const Tensor<T>& target, double lambda_l1, GenLossMode mode,
                               double eps = 1e-7) {
    GenLossParts<T> parts{};
    if (mode == GenLossMode::non_saturating) {
        Tensor<T> ones(d_fake->value.shape);
        ones.fill(T(1));
        parts.adversarial = tape.bce_loss(d_fake, ones, eps);
    } else {
        Tensor<T> zeros(d_fake->value.shape);
        parts.adversarial = tape.scale(tape.bce_loss(d_fake, zeros, eps), -1.0);
    }
    parts.l1 = tape.l1_loss(g_out, target);
    parts.total = tape.add(parts.adversarial, tape.scale(parts.l1, lambda_l1));
    return parts;
}

struct StepLosses {
    double d_loss = 0.0;
    double g_loss = 0.0;
    double g_l1 = 0.0;
};

// One discriminator update (real pair + detached fake) followed by one
// generator update with fresh noise. All randomness comes from the trainer's
// single stream, so runs are reproducible and resumable.
template <typename T>
class GanTrainer {
public:
    GanTrainer(UNetGenerator<T>& gen, PatchDiscriminator<T>& disc, TrainConfig cfg)
        : gen_(gen), disc_(disc), cfg_(cfg), opt_g_(gen.parameters(), cfg.adam),
          opt_d_(disc.parameters(), cfg.adam), rng_(cfg.seed) {
        cfg_.validate();
        if (gen_.config().edge != disc_.config().edge)
            throw error(errc::config_invalid, "generator/discriminator edge mismatch");
    }

    StepLosses train_step(const std::vector<const TrainingPair*>& batch) {
        if (batch.empty()) throw error(errc::empty_input, "empty batch");
        const std::int64_t e = gen_.config().edge;
        const std::int64_t B = static_cast<std::int64_t>(batch.size());

        Tensor<T> cond({B, 1, e, e, e});
        Tensor<T> target({B, 1, e, e, e});
        const std::int64_t block_len = e * e * e;
        for (std::int64_t i = 0; i < B; ++i) {
            const auto& p = *batch[static_cast<std::size_t>(i)];
            if (p.condition.edge != e || p.target.edge != e)
                throw error(errc::shape_mismatch, "pair block edge does not match model");
            for (std::int64_t j = 0; j < block_len; ++j) {
                cond.data[i * block_len + j] = static_cast<T>(p.condition.data[j]);
                target.data[i * block_len + j] = static_cast<T>(p.target.data[j]);
            }
        }

        Tensor<T> noise1 = Tensor<T>::uniform({B, 1, e, e, e}, rng_, -1.0, 1.0);
        Tensor<T> noise2 = Tensor<T>::uniform({B, 1, e, e, e}, rng_, -1.0, 1.0);

        StepLosses out;

        // Discriminator step; the fake batch is generated without gradients.
        Tensor<T> fake_val;
        {
            Tape<T> tape;
            Node<T>* g_in = tape.concat_channels(tape.input(cond), tape.input(noise1));
            fake_val = gen_.forward(tape, g_in, false)->value;
        }
        {
            opt_d_.zero_grads();
            Tape<T> tape;
            Node<T>* c = tape.input(cond);
            Node<T>* d_real = disc_.forward(tape, tape.concat_channels(c, tape.input(target)));
            Node<T>* d_fake =
                disc_.forward(tape, tape.concat_channels(c, tape.input(fake_val)));
            Node<T>* loss = discriminator_loss(tape, d_real, d_fake);
            tape.backward(loss);
            opt_d_.step();
            out.d_loss = static_cast<double>(loss->value.data[0]);
        }

        // Generator step with fresh noise; discriminator weights stay fixed
        // (gradient flows through its graph to the generator only).
        {
            opt_g_.zero_grads();
            Tape<T> tape;
            Node<T>* c = tape.input(cond);
            Node<T>* g_in = tape.concat_channels(c, tape.input(noise2));
            Node<T>* fake = gen_.forward(tape, g_in, true);
            Node<T>* d_fake = disc_.forward(tape, tape.concat_channels(c, fake), false);
            auto parts =
                generator_loss(tape, d_fake, fake, target, cfg_.lambda_l1, cfg_.gen_loss_mode);
            tape.backward(parts.total);
            opt_g_.step();
            out.g_loss = static_cast<double>(parts.total->value.data[0]);
            out.g_l1 = static_cast<double>(parts.l1->value.data[0]);
        }
        return out;
    }

    // Runs the remaining epochs, appends one loss-log line per epoch, and
    // writes periodic checkpoints into ckpt_dir. Returns the final snapshot.
    CheckpointData train(const std::vector<TrainingPair>& pairs, const std::string& ckpt_dir) {
        if (pairs.empty()) throw error(errc::empty_input, "no training pairs");
        std::filesystem::create_directories(ckpt_dir);
        const std::string log_path = (std::filesystem::path(ckpt_dir) / "loss_log.txt").string();
        std::ofstream log(log_path, start_epoch_ == 0 ? std::ios::trunc : std::ios::app);
        if (!log) throw error(errc::io_failure, "cannot open loss log " + log_path);

        std::vector<std::size_t> order(pairs.size());
        std::iota(order.begin(), order.end(), 0);

        CheckpointData last;
        for (std::int64_t epoch = start_epoch_; epoch < cfg_.epochs; ++epoch) {
            rng_.shuffle(order);
            double d_sum = 0, g_sum = 0, l1_sum = 0;
            std::int64_t steps = 0;
            for (std::size_t begin = 0; begin < order.size();
                 begin += static_cast<std::size_t>(cfg_.batch_size)) {
                const std::size_t end =
                    std::min(order.size(), begin + static_cast<std::size_t>(cfg_.batch_size));
                std::vector<const TrainingPair*> batch;
                batch.reserve(end - begin);
                for (std::size_t i = begin; i < end; ++i) batch.push_back(&pairs[order[i]]);
                const StepLosses l = train_step(batch);
                if (!std::isfinite(l.d_loss) || !std::isfinite(l.g_loss))
                    throw error(errc::numeric_divergence, "loss became non-finite");
                d_sum += l.d_loss;
                g_sum += l.g_loss;
                l1_sum += l.g_l1;
                ++steps;
            }
            char line[160];
            std::snprintf(line, sizeof(line), "%lld, %.10g, %.10g, %.10g\n",
                          static_cast<long long>(epoch + 1), d_sum / steps, g_sum / steps,
                          l1_sum / steps);
            log << line;
            log.flush();

            const bool last_epoch = epoch + 1 == cfg_.epochs;
            if (last_epoch ||
                (cfg_.checkpoint_every > 0 && (epoch + 1) % cfg_.checkpoint_every == 0)) {
                last = snapshot(epoch + 1);
                char name[64];
                std::snprintf(name, sizeof(name), "ckpt_epoch%04lld.bin",
                              static_cast<long long>(epoch + 1));
                save_checkpoint((std::filesystem::path(ckpt_dir) / name).string(), last);
                if (last_epoch)
                    save_checkpoint(
                        (std::filesystem::path(ckpt_dir) / "ckpt_final.bin").string(), last);
            }
        }
        if (last.gen_params.empty()) last = snapshot(cfg_.epochs);
        return last;
    }

    CheckpointData snapshot(std::int64_t epochs_done) {
        CheckpointData c;
        c.gen_params = snapshot_params<T>(gen_.parameters());
        c.disc_params = snapshot_params<T>(disc_.parameters());
        append_opt_state(c, opt_g_, "opt.g.");
        append_opt_state(c, opt_d_, "opt.d.");
        c.opt_g_step = opt_g_.step_count();
        c.opt_d_step = opt_d_.step_count();
        c.gen_cfg = gen_.config();
        c.disc_cfg = disc_.config();
        c.train_cfg = cfg_;
        c.epoch = epochs_done;
        c.rng_seed = cfg_.seed;
        c.rng_state = rng_.state();
        return c;
    }

    void restore(const CheckpointData& c) {
        restore_params<T>(c.gen_params, gen_.parameters());
        restore_params<T>(c.disc_params, disc_.parameters());
        restore_opt_state(c, opt_g_, "opt.g.");
        restore_opt_state(c, opt_d_, "opt.d.");
        opt_g_.set_step_count(c.opt_g_step);
        opt_d_.set_step_count(c.opt_d_step);
        rng_.set_state(c.rng_state);
        start_epoch_ = c.epoch;
    }

    DetRng& rng() { return rng_; }
    const TrainConfig& config() const { return cfg_; }

private:
    void append_opt_state(CheckpointData& c, Adam<T>& opt, const std::string& prefix) {
        const auto& params = opt.params();
        auto add = [&](const std::vector<Tensor<T>>& ts, const char* kind) {
            for (std::size_t i = 0; i < ts.size(); ++i) {
                NamedTensorF32 t;
                t.name = prefix + kind + "." + params[i]->name;
                t.shape = ts[i].shape;
                t.data.resize(ts[i].data.size());
                for (std::size_t j = 0; j < t.data.size(); ++j)
                    t.data[j] = static_cast<float>(ts[i].data[j]);
                c.opt_tensors.push_back(std::move(t));
            }
        };
        add(opt.first_moments(), "m");
        add(opt.second_moments(), "v");
    }

    void restore_opt_state(const CheckpointData& c, Adam<T>& opt, const std::string& prefix) {
        const auto& params = opt.params();
        auto restore_kind = [&](std::vector<Tensor<T>>& ts, const char* kind) {
            for (std::size_t i = 0; i < ts.size(); ++i) {
                const std::string want = prefix + kind + "." + params[i]->name;
                const NamedTensorF32* found = nullptr;
                for (const auto& t : c.opt_tensors)
                    if (t.name == want) {
                        found = &t;
                        break;
                    }
                if (!found || found->shape != ts[i].shape)
                    throw error(errc::state_shape_mismatch, "missing optimizer state " + want);
                for (std::size_t j = 0; j < found->data.size(); ++j)
                    ts[i].data[j] = static_cast<T>(found->data[j]);
            }
        };
        restore_kind(opt.first_moments(), "m");
        restore_kind(opt.second_moments(), "v");
    }

    UNetGenerator<T>& gen_;
    PatchDiscriminator<T>& disc_;
    TrainConfig cfg_;
    Adam<T> opt_g_, opt_d_;
    DetRng rng_;
    std::int64_t start_epoch_ = 0;
};

// Seeded single-block inference: condition + uniform(-1,1) noise channel.
template <typename T>
VoxelBlock infer_block(UNetGenerator<T>& gen, const VoxelBlock& condition, std::uint64_t seed) {
    const std::int64_t e = gen.config().edge;
    if (condition.edge != e)
        throw error(errc::shape_mismatch, "condition edge does not match generator");
    Tensor<T> cond({1, 1, e, e, e});
    for (std::size_t i = 0; i < condition.data.size(); ++i)
        cond.data[i] = static_cast<T>(condition.data[i]);
    DetRng rng(seed);
    Tensor<T> noise = Tensor<T>::uniform({1, 1, e, e, e}, rng, -1.0, 1.0);

    Tape<T> tape;
    Node<T>* out = gen.forward(tape, tape.concat_channels(tape.input(std::move(cond)),
                                                          tape.input(std::move(noise))),
                               false);
    VoxelBlock result(e, condition.origin);
    for (std::size_t i = 0; i < result.data.size(); ++i)
        result.data[i] = static_cast<double>(out->value.data[i]);
    return result;
}

// Whole-volume inference pipeline: apply recorded preprocessing, partition,
// build per-block conditions, infer, stitch, reverse preprocessing. The
// block model is injected as a function so tests can swap in oracles.
using BlockInferFn = std::function<VoxelBlock(const VoxelBlock& condition, std::uint64_t seed)>;

Volume infer_volume(const BlockInferFn& fn, const Volume& raw, const PreprocessParams& params,
                    std::pair<double, double> bounds, ConditionKind kind, std::uint64_t seed,
                    std::int64_t edge, std::int64_t noise_peak = 1024);

template <typename T>
Volume infer_volume(UNetGenerator<T>& gen, const Volume& raw, const PreprocessParams& params,
                    std::pair<double, double> bounds, ConditionKind kind, std::uint64_t seed,
                    std::int64_t noise_peak = 1024) {
    BlockInferFn fn = [&gen](const VoxelBlock& cond, std::uint64_t s) {
        return infer_block(gen, cond, s);
    };
    return infer_volume(fn, raw, params, bounds, kind, seed, gen.config().edge, noise_peak);
}

} // namespace ctsynth
