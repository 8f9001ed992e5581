#pragma once

#include <deque>
#include <string>
#include <vector>

#include "ctsynth/autodiff.hpp"
#include "ctsynth/cgan_config.hpp"
#include "ctsynth/rng.hpp"

namespace ctsynth {

// Encoder of stride-2 convs doubling channels, a stride-1 bottleneck, and a
// decoder of stride-2 transpose convs with channel-concatenated skips from
// the matching encoder level, closed by a k3 conv + tanh. Input is the
// condition block with a per-voxel uniform noise channel concatenated by the
// caller.
template <typename T>
class UNetGenerator {
public:
    UNetGenerator(GeneratorConfig cfg, std::uint64_t init_seed)
        : cfg_(cfg), init_rng_(mix_seed(init_seed, 0x67656eULL)) {
        cfg_.validate();
        const std::int64_t C = cfg_.base_channels;
        const std::int64_t k = cfg_.kernel;
        const std::int64_t kp = k / 2;

        std::int64_t in_ch = cfg_.in_channels;
        for (std::int64_t i = 0; i < cfg_.depth; ++i) {
            const std::int64_t out_ch = C << i;
            enc_.push_back(add_conv("gen.enc" + std::to_string(i), {out_ch, in_ch, k, k, k},
                                    out_ch, 2, kp));
            in_ch = out_ch;
        }
        bottleneck_ = add_conv("gen.bottleneck", {in_ch, in_ch, k, k, k}, in_ch, 1, kp);

        // Transpose convs use kernel 4 / pad 1 so stride 2 exactly doubles
        // the extent ((S-1)*2 - 2p + k == 2S).
        std::int64_t cur = in_ch;
        for (std::int64_t i = cfg_.depth - 1; i >= 1; --i) {
            const std::int64_t out_ch = C << (i - 1);
            dec_.push_back(add_conv("gen.dec" + std::to_string(i), {cur, out_ch, 4, 4, 4},
                                    out_ch, 2, 1));
            cur = out_ch * 2; // skip concat doubles the channels
        }
        dec_.push_back(add_conv("gen.dec0", {cur, C, 4, 4, 4}, C, 2, 1));
        out_ = add_conv("gen.out", {1, C, k, k, k}, 1, 1, kp);
    }

    // input: [N, in_channels, e, e, e]; returns [N, 1, e, e, e] in (-1, 1).
    // with_grad=false builds a pure inference graph (no parameter nodes).
    Node<T>* forward(Tape<T>& tape, Node<T>* input, bool with_grad = true) {
        check_input(input);
        std::vector<Node<T>*> skips;
        Node<T>* h = input;
        for (auto& l : enc_) {
            h = tape.leaky_relu(conv(tape, l, h, with_grad), 0.2);
            skips.push_back(h);
        }
        h = tape.leaky_relu(conv(tape, bottleneck_, h, with_grad), 0.2);
        for (std::size_t d = 0; d < dec_.size(); ++d) {
            h = tape.leaky_relu(tconv(tape, dec_[d], h, with_grad), 0.2);
            const std::int64_t skip_level =
                static_cast<std::int64_t>(dec_.size()) - 2 - static_cast<std::int64_t>(d);
            if (skip_level >= 0) h = tape.concat_channels(h, skips[skip_level]);
        }
        return tape.tanh(conv(tape, out_, h, with_grad));
    }

    std::vector<Parameter<T>*> parameters() {
        std::vector<Parameter<T>*> out;
        for (auto& p : store_) out.push_back(&p);
        return out;
    }

    const GeneratorConfig& config() const { return cfg_; }

private:
    struct Layer {
        Parameter<T>* w = nullptr;
        Parameter<T>* b = nullptr;
        std::int64_t stride = 1, pad = 1;
    };

    // Conv weights N(0, 0.02), biases zero.
    Layer add_conv(const std::string& name, std::vector<std::int64_t> wshape,
                   std::int64_t bias_ch, std::int64_t stride, std::int64_t pad) {
        store_.emplace_back(name + ".w",
                            Tensor<T>::normal(std::move(wshape), init_rng_, 0.0, 0.02));
        Parameter<T>* w = &store_.back();
        store_.emplace_back(name + ".b", Tensor<T>({bias_ch}));
        Parameter<T>* b = &store_.back();
        return Layer{w, b, stride, pad};
    }

    Node<T>* conv(Tape<T>& tape, Layer& l, Node<T>* x, bool with_grad) {
        Node<T>* w = with_grad ? tape.param(*l.w) : tape.input(l.w->value);
        Node<T>* b = with_grad ? tape.param(*l.b) : tape.input(l.b->value);
        return tape.conv3d(x, w, b, l.stride, l.pad);
    }

    Node<T>* tconv(Tape<T>& tape, Layer& l, Node<T>* x, bool with_grad) {
        Node<T>* w = with_grad ? tape.param(*l.w) : tape.input(l.w->value);
        Node<T>* b = with_grad ? tape.param(*l.b) : tape.input(l.b->value);
        return tape.conv_transpose3d(x, w, b, l.stride, l.pad);
    }

    void check_input(Node<T>* input) const {
        const auto& s = input->value.shape;
        if (s.size() != 5 || s[1] != cfg_.in_channels || s[2] != cfg_.edge ||
            s[3] != cfg_.edge || s[4] != cfg_.edge)
            throw error(errc::shape_mismatch, "generator input shape mismatch");
    }

    GeneratorConfig cfg_;
    std::deque<Parameter<T>> store_;
    DetRng init_rng_;
    std::vector<Layer> enc_;
    Layer bottleneck_{};
    std::vector<Layer> dec_;
    Layer out_{};
};

// Stack of stride-2 convs + leaky relu, closed by a stride-1 conv + sigmoid
// producing a patch grid of probabilities. Input is (condition, candidate)
// channel-concatenated.
template <typename T>
class PatchDiscriminator {
public:
    PatchDiscriminator(DiscriminatorConfig cfg, std::uint64_t init_seed)
        : cfg_(cfg), init_rng_(mix_seed(init_seed, 0x64697363ULL)) {
        cfg_.validate();
        const std::int64_t C = cfg_.base_channels;
        const std::int64_t k = cfg_.kernel;
        const std::int64_t kp = k / 2;

        std::int64_t in_ch = cfg_.in_channels;
        for (std::int64_t i = 0; i < cfg_.layers; ++i) {
            const std::int64_t out_ch = C << i;
            layers_.push_back(add_conv("disc.l" + std::to_string(i), {out_ch, in_ch, k, k, k},
                                       out_ch, 2, kp));
            in_ch = out_ch;
        }
        final_ = add_conv("disc.out", {1, in_ch, k, k, k}, 1, 1, kp);
    }

    // input: [N, in_channels, e, e, e] -> patch grid [N, 1, g, g, g] of
    // probabilities, g = ceil(e / 2^layers).
    Node<T>* forward(Tape<T>& tape, Node<T>* input, bool with_grad = true) {
        const auto& s = input->value.shape;
        if (s.size() != 5 || s[1] != cfg_.in_channels)
            throw error(errc::shape_mismatch, "discriminator input shape mismatch");
        Node<T>* h = input;
        for (auto& l : layers_) {
            Node<T>* w = with_grad ? tape.param(*l.w) : tape.input(l.w->value);
            Node<T>* b = with_grad ? tape.param(*l.b) : tape.input(l.b->value);
            h = tape.leaky_relu(tape.conv3d(h, w, b, l.stride, l.pad), 0.2);
        }
        Node<T>* w = with_grad ? tape.param(*final_.w) : tape.input(final_.w->value);
        Node<T>* b = with_grad ? tape.param(*final_.b) : tape.input(final_.b->value);
        return tape.sigmoid(tape.conv3d(h, w, b, final_.stride, final_.pad));
    }

    std::vector<Parameter<T>*> parameters() {
        std::vector<Parameter<T>*> out;
        for (auto& p : store_) out.push_back(&p);
        return out;
    }

    const DiscriminatorConfig& config() const { return cfg_; }

private:
    struct Layer {
        Parameter<T>* w = nullptr;
        Parameter<T>* b = nullptr;
        std::int64_t stride = 1, pad = 1;
    };

    Layer add_conv(const std::string& name, std::vector<std::int64_t> wshape,
                   std::int64_t bias_ch, std::int64_t stride, std::int64_t pad) {
        store_.emplace_back(name + ".w",
                            Tensor<T>::normal(std::move(wshape), init_rng_, 0.0, 0.02));
        Parameter<T>* w = &store_.back();
        store_.emplace_back(name + ".b", Tensor<T>({bias_ch}));
        Parameter<T>* b = &store_.back();
        return Layer{w, b, stride, pad};
    }

    DiscriminatorConfig cfg_;
    std::deque<Parameter<T>> store_;
    DetRng init_rng_;
    std::vector<Layer> layers_;
    Layer final_{};
};

} // namespace ctsynth
