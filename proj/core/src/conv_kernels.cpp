#include "ctsynth/conv_kernels.hpp"

#include <algorithm>

#include "ctsynth/threading.hpp"

namespace ctsynth::kernels {

std::int64_t conv_out_extent(std::int64_t in, std::int64_t k, std::int64_t stride,
                             std::int64_t pad) {
    return (in + 2 * pad - k) / stride + 1;
}

namespace {

// Valid small-side index range for one kernel tap: requires
// 0 <= o*stride + tap - pad < extent.
struct TapRange {
    std::int64_t lo, hi; // [lo, hi)
};

TapRange tap_range(std::int64_t out_extent, std::int64_t in_extent, std::int64_t tap,
                   std::int64_t stride, std::int64_t pad) {
    const std::int64_t shift = tap - pad;
    std::int64_t lo = 0;
    if (shift < 0) lo = (-shift + stride - 1) / stride;
    std::int64_t hi = 0;
    const std::int64_t top = in_extent - 1 - shift;
    if (top >= 0) hi = std::min(out_extent, top / stride + 1);
    return {std::min(lo, hi), hi};
}

} // namespace

template <typename T>
void conv_fwd(const T* in, const T* w, T* out, const ConvDims& g) {
    const std::int64_t in_chan = g.d * g.h * g.w;
    const std::int64_t out_chan = g.od * g.oh * g.ow;
    const std::int64_t ksz = g.k * g.k * g.k;

    parallel_for(g.n, [&](std::int64_t n) {
        for (std::int64_t co = 0; co < g.co; ++co) {
            T* ochan = out + (n * g.co + co) * out_chan;
            for (std::int64_t ci = 0; ci < g.ci; ++ci) {
                const T* ichan = in + (n * g.ci + ci) * in_chan;
                const T* wk = w + (co * g.ci + ci) * ksz;
                for (std::int64_t kz = 0; kz < g.k; ++kz) {
                    const auto rz = tap_range(g.od, g.d, kz, g.stride, g.pad);
                    for (std::int64_t ky = 0; ky < g.k; ++ky) {
                        const auto ry = tap_range(g.oh, g.h, ky, g.stride, g.pad);
                        for (std::int64_t kx = 0; kx < g.k; ++kx) {
                            const auto rx = tap_range(g.ow, g.w, kx, g.stride, g.pad);
                            const T wv = wk[(kz * g.k + ky) * g.k + kx];
                            if (wv == T(0)) continue;
                            for (std::int64_t oz = rz.lo; oz < rz.hi; ++oz) {
                                const std::int64_t iz = oz * g.stride + kz - g.pad;
                                for (std::int64_t oy = ry.lo; oy < ry.hi; ++oy) {
                                    const std::int64_t iy = oy * g.stride + ky - g.pad;
                                    const T* irow = ichan + (iz * g.h + iy) * g.w + (kx - g.pad);
                                    T* orow = ochan + (oz * g.oh + oy) * g.ow;
                                    if (g.stride == 1) {
                                        for (std::int64_t ox = rx.lo; ox < rx.hi; ++ox)
                                            orow[ox] += wv * irow[ox];
                                    } else {
                                        for (std::int64_t ox = rx.lo; ox < rx.hi; ++ox)
                                            orow[ox] += wv * irow[ox * g.stride];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    });
}

template <typename T>
void conv_bwd_input(const T* gout, const T* w, T* gin, const ConvDims& g) {
    const std::int64_t in_chan = g.d * g.h * g.w;
    const std::int64_t out_chan = g.od * g.oh * g.ow;
    const std::int64_t ksz = g.k * g.k * g.k;

    parallel_for(g.n, [&](std::int64_t n) {
        for (std::int64_t co = 0; co < g.co; ++co) {
            const T* ochan = gout + (n * g.co + co) * out_chan;
            for (std::int64_t ci = 0; ci < g.ci; ++ci) {
                T* ichan = gin + (n * g.ci + ci) * in_chan;
                const T* wk = w + (co * g.ci + ci) * ksz;
                for (std::int64_t kz = 0; kz < g.k; ++kz) {
                    const auto rz = tap_range(g.od, g.d, kz, g.stride, g.pad);
                    for (std::int64_t ky = 0; ky < g.k; ++ky) {
                        const auto ry = tap_range(g.oh, g.h, ky, g.stride, g.pad);
                        for (std::int64_t kx = 0; kx < g.k; ++kx) {
                            const auto rx = tap_range(g.ow, g.w, kx, g.stride, g.pad);
                            const T wv = wk[(kz * g.k + ky) * g.k + kx];
                            if (wv == T(0)) continue;
                            for (std::int64_t oz = rz.lo; oz < rz.hi; ++oz) {
                                const std::int64_t iz = oz * g.stride + kz - g.pad;
                                for (std::int64_t oy = ry.lo; oy < ry.hi; ++oy) {
                                    const std::int64_t iy = oy * g.stride + ky - g.pad;
                                    T* irow = ichan + (iz * g.h + iy) * g.w + (kx - g.pad);
                                    const T* orow = ochan + (oz * g.oh + oy) * g.ow;
                                    if (g.stride == 1) {
                                        for (std::int64_t ox = rx.lo; ox < rx.hi; ++ox)
                                            irow[ox] += wv * orow[ox];
                                    } else {
                                        for (std::int64_t ox = rx.lo; ox < rx.hi; ++ox)
                                            irow[ox * g.stride] += wv * orow[ox];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    });
}

template <typename T>
void conv_bwd_weight(const T* in, const T* gout, T* gw, const ConvDims& g) {
    const std::int64_t in_chan = g.d * g.h * g.w;
    const std::int64_t out_chan = g.od * g.oh * g.ow;
    const std::int64_t ksz = g.k * g.k * g.k;

    parallel_for(g.co, [&](std::int64_t co) {
        for (std::int64_t ci = 0; ci < g.ci; ++ci) {
            T* wk = gw + (co * g.ci + ci) * ksz;
            for (std::int64_t kz = 0; kz < g.k; ++kz) {
                const auto rz = tap_range(g.od, g.d, kz, g.stride, g.pad);
                for (std::int64_t ky = 0; ky < g.k; ++ky) {
                    const auto ry = tap_range(g.oh, g.h, ky, g.stride, g.pad);
                    for (std::int64_t kx = 0; kx < g.k; ++kx) {
                        const auto rx = tap_range(g.ow, g.w, kx, g.stride, g.pad);
                        T acc = 0;
                        for (std::int64_t n = 0; n < g.n; ++n) {
                            const T* ichan = in + (n * g.ci + ci) * in_chan;
                            const T* ochan = gout + (n * g.co + co) * out_chan;
                            for (std::int64_t oz = rz.lo; oz < rz.hi; ++oz) {
                                const std::int64_t iz = oz * g.stride + kz - g.pad;
                                for (std::int64_t oy = ry.lo; oy < ry.hi; ++oy) {
                                    const std::int64_t iy = oy * g.stride + ky - g.pad;
                                    const T* irow =
                                        ichan + (iz * g.h + iy) * g.w + (kx - g.pad);
                                    const T* orow = ochan + (oz * g.oh + oy) * g.ow;
                                    if (g.stride == 1) {
                                        for (std::int64_t ox = rx.lo; ox < rx.hi; ++ox)
                                            acc += orow[ox] * irow[ox];
                                    } else {
                                        for (std::int64_t ox = rx.lo; ox < rx.hi; ++ox)
                                            acc += orow[ox] * irow[ox * g.stride];
                                    }
                                }
                            }
                        }
                        wk[(kz * g.k + ky) * g.k + kx] += acc;
                    }
                }
            }
        }
    });
}

template <typename T>
void bias_fwd(const T* b, T* out, std::int64_t n, std::int64_t co, std::int64_t spatial) {
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t c = 0; c < co; ++c) {
            T* row = out + (i * co + c) * spatial;
            const T bv = b[c];
            for (std::int64_t s = 0; s < spatial; ++s) row[s] += bv;
        }
}

template <typename T>
void bias_bwd(const T* gout, T* gb, std::int64_t n, std::int64_t co, std::int64_t spatial) {
    for (std::int64_t c = 0; c < co; ++c) {
        T acc = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            const T* row = gout + (i * co + c) * spatial;
            for (std::int64_t s = 0; s < spatial; ++s) acc += row[s];
        }
        gb[c] += acc;
    }
}

template void conv_fwd<float>(const float*, const float*, float*, const ConvDims&);
template void conv_fwd<double>(const double*, const double*, double*, const ConvDims&);
template void conv_bwd_input<float>(const float*, const float*, float*, const ConvDims&);
template void conv_bwd_input<double>(const double*, const double*, double*, const ConvDims&);
template void conv_bwd_weight<float>(const float*, const float*, float*, const ConvDims&);
template void conv_bwd_weight<double>(const double*, const double*, double*, const ConvDims&);
template void bias_fwd<float>(const float*, float*, std::int64_t, std::int64_t, std::int64_t);
template void bias_fwd<double>(const double*, double*, std::int64_t, std::int64_t, std::int64_t);
template void bias_bwd<float>(const float*, float*, std::int64_t, std::int64_t, std::int64_t);
template void bias_bwd<double>(const double*, double*, std::int64_t, std::int64_t, std::int64_t);

} // namespace ctsynth::kernels
