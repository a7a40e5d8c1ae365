#pragma once

#include <vector>

#include "reenact/tensor.hpp"

REENACT_NS_BEGIN

// Differentiable primitives. Unless noted otherwise every op propagates
// gradients to each input that requires one.

inline constexpr Real kNormEpsilon = Real(1e-5);
inline constexpr Real kLogClamp = Real(1e-8);

// -- elementwise ------------------------------------------------------------

/// a + b, where b broadcasts along any of its unit extents.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real factor);
Tensor add_scalar(const Tensor& a, Real value);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, Real slope = Real(0.2));
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor abs(const Tensor& x);
/// log(max(x, 1e-8)); the clamped region has zero gradient.
Tensor log(const Tensor& x);

// -- reductions and layout --------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor concat_channels(const std::vector<Tensor>& parts);
Tensor stack_batch(const std::vector<Tensor>& parts);
Tensor slice_batch(const Tensor& x, int index);
Tensor slice_channels(const Tensor& x, int begin, int end);

// -- convolution and resampling ---------------------------------------------

/// Cross-correlation with weight (out_c, in_c, k, k) and optional bias
/// (1, out_c, 1, 1).
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding);

/// Sub-pixel rearrangement (n, c*r*r, h, w) -> (n, c, h*r, w*r).
Tensor pixel_shuffle(const Tensor& x, int r);
Tensor pixel_unshuffle(const Tensor& x, int r);

/// Align-corners bilinear resize.
Tensor bilinear_resize(const Tensor& x, int out_h, int out_w);
Tensor upsample_nearest(const Tensor& x, int factor);
Tensor avg_pool2(const Tensor& x);

/// Backward warp: output(p) = input(p + flow(p)) in [-1, 1] coordinates
/// (align-corners), bilinear, border clamped. flow is (n, 2, h, w) with
/// channel 0 horizontal and channel 1 vertical; output takes flow's extent.
Tensor grid_sample(const Tensor& input, const Tensor& flow);

/// Bilinear lookup at fixed absolute pixel coordinates. coords holds
/// (x, y) pairs laid out as (n, out_h, out_w, 2). Samples whose 2x2
/// footprint leaves the input read zeros for the missing taps. Only the
/// input receives a gradient.
Tensor remap_bilinear(const Tensor& input, const std::vector<Real>& coords, int out_h, int out_w);

// -- adaptive normalization -------------------------------------------------

/// Per-channel statistics pooled over batch and spatial extents.
struct ChannelStats {
  Tensor mean;  // (1, c, 1, 1)
  Tensor std;   // (1, c, 1, 1), sqrt(var + eps)
};

ChannelStats channel_stats(const Tensor& x, Real eps = kNormEpsilon);

/// gamma * (x - mean) / std + beta with gamma/beta of shape (1 or n, c, h, w).
Tensor adaptive_denormalize(const Tensor& x, const ChannelStats& stats, const Tensor& gamma,
                            const Tensor& beta);

REENACT_NS_END
