#pragma once

#include <array>
#include <random>
#include <vector>

#include "reenact/layers.hpp"

REENACT_NS_BEGIN

/// One (gamma, beta) pair per fusion block, each shaped like that block's
/// input feature map.
struct AdaptiveParams {
  struct Entry {
    Tensor gamma;
    Tensor beta;
  };
  std::vector<Entry> entries;
};

struct AppearanceOutput {
  AdaptiveParams theta;
  Tensor feature;  // (n, 128, H/4, W/4)
};

/// Skip-connected encoder-decoder that predicts every adaptive parameter
/// of the fusion net, plus the appearance feature, from the source image in
/// a single pass.
///
/// Encoder: three stride-2 stages (32, 64, 128) down to H/8.
/// Decoder: three upsample stages to H/4, H/2 and H, each concatenating the
/// matching encoder skip (the image itself at full resolution). The H/4
/// decoder feature is the appearance feature; every decoder stage feeds a
/// gamma head (offset 1) and a beta head (offset 0) whose gains start small,
/// so the first forward pass is close to plain normalization.
class AppearanceExtractor {
 public:
  static constexpr int kFeatureChannels = 128;
  /// Channel count of each fusion block input, coarse to fine.
  static constexpr std::array<int, 3> kThetaChannels{128, 64, 32};
  static constexpr Real kInitialHeadGain = Real(0.01);

  AppearanceExtractor() = default;
  explicit AppearanceExtractor(std::mt19937_64& rng);

  /// image: (n, 3, H, W) with values in [-1, 1] and H, W divisible by 8.
  AppearanceOutput forward(const Tensor& image, const ForwardOptions& options);
  void collect(ParamList& out);

 private:
  std::array<Conv2d, 3> encoder_;
  std::array<Conv2d, 3> up_;
  std::array<Conv2d, 3> merge_;
  std::array<GainHead, 3> gamma_;
  std::array<GainHead, 3> beta_;
};

REENACT_NS_END
