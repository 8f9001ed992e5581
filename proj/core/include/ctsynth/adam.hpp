#pragma once

#include <cstdint>
#include <vector>

#include "ctsynth/autodiff.hpp"

namespace ctsynth {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam with bias correction. State tensors live in the working
// precision so checkpoint round trips are exact in f32 mode.
template <typename T>
class Adam {
public:
    Adam(std::vector<Parameter<T>*> params, AdamConfig cfg = {})
        : params_(std::move(params)), cfg_(cfg) {
        for (auto* p : params_) {
            m_.emplace_back(p->value.shape);
            v_.emplace_back(p->value.shape);
        }
    }

    // One update from the gradients currently held in the parameters.
    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
        const T ib1 = T(1) - b1, ib2 = T(1) - b2;
        const T lr = static_cast<T>(cfg_.lr), eps = static_cast<T>(cfg_.eps);
        const T ibc1 = static_cast<T>(1.0 / bc1), ibc2 = static_cast<T>(1.0 / bc2);

        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            auto& val = params_[pi]->value.data;
            const auto& grad = params_[pi]->grad.data;
            auto& m = m_[pi].data;
            auto& v = v_[pi].data;
            if (grad.size() != val.size())
                throw error(errc::state_shape_mismatch, "gradient/state shape mismatch");
            for (std::size_t i = 0; i < val.size(); ++i) {
                const T g = grad[i];
                m[i] = b1 * m[i] + ib1 * g;
                v[i] = b2 * v[i] + ib2 * g * g;
                const T mhat = m[i] * ibc1;
                const T vhat = v[i] * ibc2;
                val[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    void zero_grads() {
        for (auto* p : params_) p->zero_grad();
    }

    std::int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    // Checkpoint access.
    std::vector<Tensor<T>>& first_moments() { return m_; }
    std::vector<Tensor<T>>& second_moments() { return v_; }
    void set_step_count(std::int64_t t) { t_ = t; }
    const std::vector<Parameter<T>*>& params() const { return params_; }

private:
    std::vector<Parameter<T>*> params_;
    AdamConfig cfg_;
    std::vector<Tensor<T>> m_, v_;
    std::int64_t t_ = 0;
};

} // namespace ctsynth
