#pragma once

#include <array>
#include <random>

#include "reenact/layers.hpp"

REENACT_NS_BEGIN

/// Hourglass flow estimation net: stacked source/driving heatmaps
/// (n, 136, H, W) -> dense backward-warp flow (n, 2, H, W) in normalized
/// coordinates. Four stride-2 stages down to H/16 (64, 128, 256, 256
/// channels), four nearest-upsample + conv stages back up with additive
/// skips, and a gain head that starts at exactly zero flow.
class FlowEstimator {
 public:
  static constexpr std::array<int, 4> kWidths{64, 128, 256, 256};
  static constexpr int kTopWidth = 32;

  FlowEstimator() = default;
  explicit FlowEstimator(std::mt19937_64& rng);

  Tensor forward(const Tensor& source_heatmap, const Tensor& driving_heatmap,
                 const ForwardOptions& options);
  void collect(ParamList& out);

 private:
  std::array<Conv2d, 4> down_;
  std::array<Conv2d, 4> up_;
  GainHead head_;
};

/// Resizes the flow to the feature's extent, then backward-warps it.
Tensor warp_feature(const Tensor& feature, const Tensor& flow);

REENACT_NS_END
