#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ctsynth/conv_kernels.hpp"
#include "ctsynth/tensor.hpp"

namespace ctsynth {

// Named trainable tensor; gradients accumulate here across a backward pass
// and are consumed by the optimizer.
template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;

    Parameter() = default;
    Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)) {
        grad = Tensor<T>(value.shape);
    }
    void zero_grad() { grad.fill(T(0)); }
};

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* bound_param = nullptr;
    std::function<void()> backward;
};

// Reverse-mode tape. Nodes are created in forward order; backward() walks
// them in reverse. One tape per loss evaluation; parameters persist outside.
template <typename T>
class Tape {
public:
    Node<T>* input(Tensor<T> value, bool requires_grad = false) {
        auto* n = alloc(std::move(value));
        n->requires_grad = requires_grad;
        return n;
    }

    Node<T>* param(Parameter<T>& p) {
        auto* n = alloc(p.value);
        n->requires_grad = true;
        n->bound_param = &p;
        return n;
    }

    // Copies the value and cuts the gradient path (for discriminator updates
    // on generator output).
    Node<T>* detach(Node<T>* x) { return input(x->value, false); }

    Node<T>* conv3d(Node<T>* x, Node<T>* w, Node<T>* b, std::int64_t stride, std::int64_t pad);
    Node<T>* conv_transpose3d(Node<T>* x, Node<T>* w, Node<T>* b, std::int64_t stride,
                              std::int64_t pad);

    Node<T>* leaky_relu(Node<T>* x, double slope = 0.2);
    Node<T>* relu(Node<T>* x) { return leaky_relu(x, 0.0); }
    Node<T>* tanh(Node<T>* x);
    Node<T>* sigmoid(Node<T>* x);

    Node<T>* concat_channels(Node<T>* a, Node<T>* b);
    Node<T>* slice_channels(Node<T>* x, std::int64_t from, std::int64_t count);

    Node<T>* add(Node<T>* a, Node<T>* b); // elementwise, equal shapes
    Node<T>* scale(Node<T>* x, double c); // elementwise constant multiply
    Node<T>* sum(Node<T>* x);             // scalar

    // mean of -[t ln p + (1-t) ln(1-p)], p clamped to [eps, 1-eps].
    Node<T>* bce_loss(Node<T>* pred, const Tensor<T>& target, double eps = 1e-7);
    // mean |a - b|, subgradient 0 at ties.
    Node<T>* l1_loss(Node<T>* a, const Tensor<T>& b);

    // Seeds root grad with 1, runs the tape in reverse, then flushes leaf
    // grads into their bound Parameters. Root must be scalar.
    void backward(Node<T>* root);

    std::size_t size() const { return nodes_.size(); }

private:
    Node<T>* alloc(Tensor<T> value) {
        nodes_.push_back(std::make_unique<Node<T>>());
        Node<T>* n = nodes_.back().get();
        n->grad = Tensor<T>(value.shape);
        n->value = std::move(value);
        return n;
    }

    std::vector<std::unique_ptr<Node<T>>> nodes_;
};

template <typename T>
void Tape<T>::backward(Node<T>* root) {
    if (root->value.numel() != 1)
        throw error(errc::shape_mismatch, "backward root must be scalar");
    root->grad.data[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        Node<T>* n = it->get();
        if (n->requires_grad && n->backward) n->backward();
    }
    for (auto& up : nodes_) {
        Node<T>* n = up.get();
        if (n->bound_param) {
            auto& g = n->bound_param->grad.data;
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n->grad.data[i];
        }
    }
}

template <typename T>
Node<T>* Tape<T>::conv3d(Node<T>* x, Node<T>* w, Node<T>* b, std::int64_t stride,
                         std::int64_t pad) {
    const auto& xs = x->value.shape;
    const auto& ws = w->value.shape;
    if (xs.size() != 5 || ws.size() != 5 || ws[2] != ws[3] || ws[3] != ws[4])
        throw error(errc::shape_mismatch, "conv3d expects [N,Ci,D,H,W] and [Co,Ci,k,k,k]");
    if (xs[1] != ws[1]) throw error(errc::shape_mismatch, "conv3d channel mismatch");
    if (b->value.shape != std::vector<std::int64_t>{ws[0]})
        throw error(errc::shape_mismatch, "conv3d bias shape mismatch");

    kernels::ConvDims g;
    g.n = xs[0];
    g.ci = xs[1];
    g.co = ws[0];
    g.d = xs[2];
    g.h = xs[3];
    g.w = xs[4];
    g.k = ws[2];
    g.stride = stride;
    g.pad = pad;
    g.od = kernels::conv_out_extent(g.d, g.k, stride, pad);
    g.oh = kernels::conv_out_extent(g.h, g.k, stride, pad);
    g.ow = kernels::conv_out_extent(g.w, g.k, stride, pad);
    if (g.od < 1 || g.oh < 1 || g.ow < 1)
        throw error(errc::shape_mismatch, "conv3d output would be empty");

    Tensor<T> out({g.n, g.co, g.od, g.oh, g.ow});
    kernels::conv_fwd(x->value.data.data(), w->value.data.data(), out.data.data(), g);
    kernels::bias_fwd(b->value.data.data(), out.data.data(), g.n, g.co, g.od * g.oh * g.ow);

    auto* n = alloc(std::move(out));
    n->requires_grad = x->requires_grad || w->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, x, w, b, g] {
            if (x->requires_grad)
                kernels::conv_bwd_input(n->grad.data.data(), w->value.data.data(),
                                        x->grad.data.data(), g);
            if (w->requires_grad)
                kernels::conv_bwd_weight(x->value.data.data(), n->grad.data.data(),
                                         w->grad.data.data(), g);
            if (b->requires_grad)
                kernels::bias_bwd(n->grad.data.data(), b->grad.data.data(), g.n, g.co,
                                  g.od * g.oh * g.ow);
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::conv_transpose3d(Node<T>* x, Node<T>* w, Node<T>* b, std::int64_t stride,
                                   std::int64_t pad) {
    const auto& xs = x->value.shape;
    const auto& ws = w->value.shape; // [Cin, Cout, k, k, k]
    if (xs.size() != 5 || ws.size() != 5 || ws[2] != ws[3] || ws[3] != ws[4])
        throw error(errc::shape_mismatch,
                    "conv_transpose3d expects [N,Ci,D,H,W] and [Ci,Co,k,k,k]");
    if (xs[1] != ws[0]) throw error(errc::shape_mismatch, "conv_transpose3d channel mismatch");
    if (b->value.shape != std::vector<std::int64_t>{ws[1]})
        throw error(errc::shape_mismatch, "conv_transpose3d bias shape mismatch");

    // Transpose runs the conv geometry in reverse: x sits on the small side,
    // the output on the large side. Forward is conv_bwd_input with the same
    // weight, which makes the adjoint identity with conv3d structural.
    kernels::ConvDims g;
    g.n = xs[0];
    g.co = xs[1];
    g.ci = ws[1];
    g.k = ws[2];
    g.stride = stride;
    g.pad = pad;
    g.od = xs[2];
    g.oh = xs[3];
    g.ow = xs[4];
    g.d = (xs[2] - 1) * stride - 2 * pad + g.k;
    g.h = (xs[3] - 1) * stride - 2 * pad + g.k;
    g.w = (xs[4] - 1) * stride - 2 * pad + g.k;
    if (g.d < 1 || g.h < 1 || g.w < 1)
        throw error(errc::shape_mismatch, "conv_transpose3d output would be empty");

    Tensor<T> out({g.n, g.ci, g.d, g.h, g.w});
    kernels::conv_bwd_input(x->value.data.data(), w->value.data.data(), out.data.data(), g);
    kernels::bias_fwd(b->value.data.data(), out.data.data(), g.n, g.ci, g.d * g.h * g.w);

    auto* n = alloc(std::move(out));
    n->requires_grad = x->requires_grad || w->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, x, w, b, g] {
            if (x->requires_grad)
                kernels::conv_fwd(n->grad.data.data(), w->value.data.data(), x->grad.data.data(),
                                  g);
            if (w->requires_grad)
                kernels::conv_bwd_weight(n->grad.data.data(), x->value.data.data(),
                                         w->grad.data.data(), g);
            if (b->requires_grad)
                kernels::bias_bwd(n->grad.data.data(), b->grad.data.data(), g.n, g.ci,
                                  g.d * g.h * g.w);
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::leaky_relu(Node<T>* x, double slope) {
    const T s = static_cast<T>(slope);
    Tensor<T> out(x->value.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const T v = x->value.data[i];
        out.data[i] = v >= T(0) ? v : s * v;
    }
    auto* n = alloc(std::move(out));
    n->requires_grad = x->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, x, s] {
            for (std::size_t i = 0; i < x->grad.data.size(); ++i)
                x->grad.data[i] += n->grad.data[i] * (x->value.data[i] >= T(0) ? T(1) : s);
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::tanh(Node<T>* x) {
    Tensor<T> out(x->value.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::tanh(x->value.data[i]);
    auto* n = alloc(std::move(out));
    n->requires_grad = x->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, x] {
            for (std::size_t i = 0; i < x->grad.data.size(); ++i) {
                const T y = n->value.data[i];
                x->grad.data[i] += n->grad.data[i] * (T(1) - y * y);
            }
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::sigmoid(Node<T>* x) {
    Tensor<T> out(x->value.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const T v = x->value.data[i];
        out.data[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v))
                                : std::exp(v) / (T(1) + std::exp(v));
    }
    auto* n = alloc(std::move(out));
    n->requires_grad = x->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, x] {
            for (std::size_t i = 0; i < x->grad.data.size(); ++i) {
                const T y = n->value.data[i];
                x->grad.data[i] += n->grad.data[i] * y * (T(1) - y);
            }
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::concat_channels(Node<T>* a, Node<T>* b) {
    const auto& as = a->value.shape;
    const auto& bs = b->value.shape;
    if (as.size() != 5 || bs.size() != 5 || as[0] != bs[0] || as[2] != bs[2] ||
        as[3] != bs[3] || as[4] != bs[4])
        throw error(errc::shape_mismatch, "concat_channels needs equal shapes except channels");

    const std::int64_t spatial = as[2] * as[3] * as[4];
    const std::int64_t ca = as[1], cb = bs[1];
    Tensor<T> out({as[0], ca + cb, as[2], as[3], as[4]});
    for (std::int64_t n = 0; n < as[0]; ++n) {
        std::copy(a->value.data.begin() + n * ca * spatial,
                  a->value.data.begin() + (n + 1) * ca * spatial,
                  out.data.begin() + n * (ca + cb) * spatial);
        std::copy(b->value.data.begin() + n * cb * spatial,
                  b->value.data.begin() + (n + 1) * cb * spatial,
                  out.data.begin() + (n * (ca + cb) + ca) * spatial);
    }
    auto* n = alloc(std::move(out));
    n->requires_grad = a->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, a, b, ca, cb, spatial] {
            const std::int64_t batch = n->value.shape[0];
            for (std::int64_t i = 0; i < batch; ++i) {
                if (a->requires_grad) {
                    const T* src = n->grad.data.data() + i * (ca + cb) * spatial;
                    T* dst = a->grad.data.data() + i * ca * spatial;
                    for (std::int64_t j = 0; j < ca * spatial; ++j) dst[j] += src[j];
                }
                if (b->requires_grad) {
                    const T* src = n->grad.data.data() + (i * (ca + cb) + ca) * spatial;
                    T* dst = b->grad.data.data() + i * cb * spatial;
                    for (std::int64_t j = 0; j < cb * spatial; ++j) dst[j] += src[j];
                }
            }
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::slice_channels(Node<T>* x, std::int64_t from, std::int64_t count) {
    const auto& xs = x->value.shape;
    if (xs.size() != 5 || from < 0 || count < 1 || from + count > xs[1])
        throw error(errc::shape_mismatch, "slice_channels range out of bounds");
    const std::int64_t spatial = xs[2] * xs[3] * xs[4];
    Tensor<T> out({xs[0], count, xs[2], xs[3], xs[4]});
    for (std::int64_t n = 0; n < xs[0]; ++n)
        std::copy(x->value.data.begin() + (n * xs[1] + from) * spatial,
                  x->value.data.begin() + (n * xs[1] + from + count) * spatial,
                  out.data.begin() + n * count * spatial);
    auto* n = alloc(std::move(out));
    n->requires_grad = x->requires_grad;
    if (n->requires_grad) {
        const std::int64_t channels = xs[1];
        n->backward = [n, x, from, count, spatial, channels] {
            const std::int64_t batch = n->value.shape[0];
            for (std::int64_t i = 0; i < batch; ++i) {
                const T* src = n->grad.data.data() + i * count * spatial;
                T* dst = x->grad.data.data() + (i * channels + from) * spatial;
                for (std::int64_t j = 0; j < count * spatial; ++j) dst[j] += src[j];
            }
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::add(Node<T>* a, Node<T>* b) {
    if (!a->value.same_shape(b->value))
        throw error(errc::shape_mismatch, "add needs equal shapes");
    Tensor<T> out(a->value.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = a->value.data[i] + b->value.data[i];
    auto* n = alloc(std::move(out));
    n->requires_grad = a->requires_grad || b->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, a, b] {
            if (a->requires_grad)
                for (std::size_t i = 0; i < a->grad.data.size(); ++i)
                    a->grad.data[i] += n->grad.data[i];
            if (b->requires_grad)
                for (std::size_t i = 0; i < b->grad.data.size(); ++i)
                    b->grad.data[i] += n->grad.data[i];
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::scale(Node<T>* x, double c) {
    const T s = static_cast<T>(c);
    Tensor<T> out(x->value.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = s * x->value.data[i];
    auto* n = alloc(std::move(out));
    n->requires_grad = x->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, x, s] {
            for (std::size_t i = 0; i < x->grad.data.size(); ++i)
                x->grad.data[i] += s * n->grad.data[i];
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::sum(Node<T>* x) {
    T acc = 0;
    for (T v : x->value.data) acc += v;
    auto* n = alloc(Tensor<T>({1}, {acc}));
    n->requires_grad = x->requires_grad;
    if (n->requires_grad) {
        n->backward = [n, x] {
            const T g = n->grad.data[0];
            for (std::size_t i = 0; i < x->grad.data.size(); ++i) x->grad.data[i] += g;
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::bce_loss(Node<T>* pred, const Tensor<T>& target, double eps) {
    if (!pred->value.same_shape(target))
        throw error(errc::shape_mismatch, "bce_loss shape mismatch");
    const T e = static_cast<T>(eps);
    const T n_inv = T(1) / static_cast<T>(pred->value.numel());
    T acc = 0;
    for (std::size_t i = 0; i < target.data.size(); ++i) {
        const T p = std::clamp(pred->value.data[i], e, T(1) - e);
        const T t = target.data[i];
        acc += -(t * std::log(p) + (T(1) - t) * std::log(T(1) - p));
    }
    auto* n = alloc(Tensor<T>({1}, {acc * n_inv}));
    n->requires_grad = pred->requires_grad;
    if (n->requires_grad) {
        Tensor<T> tgt = target;
        n->backward = [n, pred, tgt = std::move(tgt), e, n_inv] {
            const T g = n->grad.data[0] * n_inv;
            for (std::size_t i = 0; i < tgt.data.size(); ++i) {
                const T p = pred->value.data[i];
                if (p <= e || p >= T(1) - e) continue; // clamped region
                const T t = tgt.data[i];
                pred->grad.data[i] += g * (-t / p + (T(1) - t) / (T(1) - p));
            }
        };
    }
    return n;
}

template <typename T>
Node<T>* Tape<T>::l1_loss(Node<T>* a, const Tensor<T>& b) {
    if (!a->value.same_shape(b))
        throw error(errc::shape_mismatch, "l1_loss shape mismatch");
    const T n_inv = T(1) / static_cast<T>(a->value.numel());
    T acc = 0;
    for (std::size_t i = 0; i < b.data.size(); ++i)
        acc += std::abs(a->value.data[i] - b.data[i]);
    auto* n = alloc(Tensor<T>({1}, {acc * n_inv}));
    n->requires_grad = a->requires_grad;
    if (n->requires_grad) {
        Tensor<T> tgt = b;
        n->backward = [n, a, tgt = std::move(tgt), n_inv] {
            const T g = n->grad.data[0] * n_inv;
            for (std::size_t i = 0; i < tgt.data.size(); ++i) {
                const T d = a->value.data[i] - tgt.data[i];
                if (d > T(0))
                    a->grad.data[i] += g;
                else if (d < T(0))
                    a->grad.data[i] -= g;
            }
        };
    }
    return n;
}

} // namespace ctsynth
