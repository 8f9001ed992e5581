#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ctsynth/errors.hpp"
#include "ctsynth/rng.hpp"

namespace ctsynth {

// Dense row-major N-d array. Training instantiates T = float, gradient
// verification T = double.
template <typename T>
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel_of(shape)), T(0));
    }
    Tensor(std::vector<std::int64_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::int64_t>(data.size()) != numel_of(shape))
            throw error(errc::shape_mismatch, "tensor data length does not match shape");
    }

    static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
        std::int64_t n = 1;
        for (auto e : s) {
            if (e <= 0) throw error(errc::shape_mismatch, "non-positive tensor extent");
            n *= e;
        }
        return n;
    }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }

    static Tensor uniform(std::vector<std::int64_t> s, DetRng& rng, double lo, double hi) {
        Tensor t(std::move(s));
        for (auto& v : t.data) v = static_cast<T>(rng.uniform(lo, hi));
        return t;
    }

    static Tensor normal(std::vector<std::int64_t> s, DetRng& rng, double mean, double stddev) {
        Tensor t(std::move(s));
        for (auto& v : t.data) v = static_cast<T>(rng.normal(mean, stddev));
        return t;
    }
};

} // namespace ctsynth
