#pragma once

#include <cstdint>

namespace ctsynth::kernels {

// Geometry of one 3D cross-correlation. Spatial "in" is the large side of
// the map (D,H,W), "out" the small side (OD,OH,OW):
//   OD = floor((D + 2*pad - k) / stride) + 1, same for H, W.
// conv_transpose3d runs the same geometry in the opposite direction.
struct ConvDims {
    std::int64_t n = 1;       // batch
    std::int64_t ci = 1;      // channels on the large side
    std::int64_t co = 1;      // channels on the small side
    std::int64_t d = 1, h = 1, w = 1;    // large-side spatial
    std::int64_t od = 1, oh = 1, ow = 1; // small-side spatial
    std::int64_t k = 3;
    std::int64_t stride = 1;
    std::int64_t pad = 0;
};

std::int64_t conv_out_extent(std::int64_t in, std::int64_t k, std::int64_t stride,
                             std::int64_t pad);

// out[n,co,od,oh,ow] += sum_{ci,k} w[co,ci,k] * in[n,ci,...]. Weight layout
// is [co, ci, k, k, k]. All kernels accumulate into their destination and
// keep fixed reduction order, so results do not depend on the worker count.
template <typename T>
void conv_fwd(const T* in, const T* w, T* out, const ConvDims& g);

// gin[n,ci,...] += sum_{co,k} w[co,ci,k] * gout[n,co,...]; the adjoint of
// conv_fwd and also the forward map of conv_transpose3d.
template <typename T>
void conv_bwd_input(const T* gout, const T* w, T* gin, const ConvDims& g);

// gw[co,ci,k] += sum_{n,out} gout[n,co,...] * in[n,ci,...].
template <typename T>
void conv_bwd_weight(const T* in, const T* gout, T* gw, const ConvDims& g);

// out[n,co,...] += b[co] broadcast; gb[co] += sum over batch and spatial.
template <typename T>
void bias_fwd(const T* b, T* out, std::int64_t n, std::int64_t co, std::int64_t spatial);
template <typename T>
void bias_bwd(const T* gout, T* gb, std::int64_t n, std::int64_t co, std::int64_t spatial);

} // namespace ctsynth::kernels
