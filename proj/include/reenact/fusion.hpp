#pragma once

#include <array>
#include <random>
#include <vector>

#include "reenact/appearance.hpp"
#include "reenact/layers.hpp"

REENACT_NS_BEGIN

struct FusionConfig {
  /// Input channels of each block (must match the appearance extractor).
  std::vector<int> channels{128, 64, 32};
  /// Output channels of each block after its upsample.
  std::vector<int> out_channels{64, 32, 32};
  /// Pixel-shuffle factor per block; the last block already sits at H.
  std::vector<int> upsample{2, 2, 1};
  int tail_blocks = 2;

  int n_blocks() const { return static_cast<int>(channels.size()); }
  /// Throws when shuffle divisibility or block chaining is violated.
  void validate() const;
};

/// One appearance-adaptive fusion block:
///   resize(locals) -> normalize F_i and modulate with (gamma, beta)
///   -> concat with locals -> conv (spectral) + ReLU -> pixel shuffle.
class FusionBlock {
 public:
  FusionBlock() = default;
  FusionBlock(const std::string& name, int in_c, int out_c, int upsample, std::mt19937_64& rng);

  Tensor forward(const Tensor& feature, const Tensor& locals_composite, const Tensor& gamma,
                 const Tensor& beta, const ForwardOptions& options);
  /// The modulated feature before concatenation, exposed for tests.
  static Tensor modulate(const Tensor& feature, const Tensor& gamma, const Tensor& beta);
  void collect(ParamList& out) { conv_.collect(out); }

 private:
  Conv2d conv_;
  int upsample_ = 2;
};

/// Chains the fusion blocks from H/4 to H, then residual tail blocks and a
/// tanh RGB head.
class FusionNet {
 public:
  FusionNet() = default;
  FusionNet(const FusionConfig& config, std::mt19937_64& rng);

  Tensor forward(const Tensor& warped_feature, const AdaptiveParams& theta,
                 const Tensor& locals_composite, const ForwardOptions& options);
  FusionBlock& block(int i) { return blocks_.at(i); }
  const FusionConfig& config() const { return config_; }
  void collect(ParamList& out);

 private:
  FusionConfig config_;
  std::vector<FusionBlock> blocks_;
  std::vector<std::array<Conv2d, 2>> tail_;
  Conv2d head_;
};

REENACT_NS_END
