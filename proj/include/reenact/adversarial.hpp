#pragma once

#include <array>
#include <filesystem>
#include <random>
#include <vector>

#include "reenact/layers.hpp"

REENACT_NS_BEGIN

struct LossWeights {
  Real lambda_gan = Real(10);
  Real lambda_c = Real(5);
  Real lambda_local = Real(5);
};

/// Patch discriminator: three 4x4 stride-2 convs (32, 64, 128) with
/// leaky ReLU, then a 3x3 conv to a 1-channel logit map at 1/8 scale.
class PatchDiscriminator {
 public:
  PatchDiscriminator() = default;
  PatchDiscriminator(const std::string& name, int in_channels, std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const ForwardOptions& options);
  void collect(ParamList& out);

 private:
  std::array<Conv2d, 4> convs_;
};

/// Two patch discriminators with separate weights, one on the input and one
/// on its 2x average-pooled copy.
class MultiScaleDiscriminator {
 public:
  static constexpr int kScales = 2;

  MultiScaleDiscriminator() = default;
  MultiScaleDiscriminator(const std::string& name, int in_channels, std::mt19937_64& rng);

  std::vector<Tensor> forward(const Tensor& x, const ForwardOptions& options);
  void collect(ParamList& out);

 private:
  std::array<PatchDiscriminator, kScales> scales_;
};

/// Pose-and-expression discriminator: image + 68 driving heatmaps.
std::vector<Tensor> disc_forward_landmark(MultiScaleDiscriminator& d, const Tensor& image,
                                          const Tensor& driving_heatmap,
                                          const ForwardOptions& options);
/// Appearance discriminator: source image + candidate image.
std::vector<Tensor> disc_forward_identity(MultiScaleDiscriminator& d, const Tensor& source,
                                          const Tensor& candidate, const ForwardOptions& options);

/// Fixed random-weight feature extractor standing in for a pretrained
/// perceptual network. Five 3x3 convs (16, 32, 64, 128, 128; strides
/// 1, 2, 2, 2, 1) with leaky ReLU; weights never train.
class PerceptualNet {
 public:
  static constexpr std::array<int, 5> kWidths{16, 32, 64, 128, 128};
  static constexpr std::uint64_t kDefaultSeed = 0x5eedfeedULL;

  explicit PerceptualNet(std::uint64_t seed = kDefaultSeed,
                         std::vector<int> taps = {0, 1, 2, 3, 4});

  /// Activations at every tap layer, in tap order.
  std::vector<Tensor> features(const Tensor& image);
  const std::vector<int>& taps() const { return taps_; }
  std::uint64_t seed() const { return seed_; }
  /// Layer parameters for serialization; they never receive gradients.
  ParamList parameters();

 private:
  std::uint64_t seed_;
  std::vector<int> taps_;
  std::array<Conv2d, 5> convs_;
};

enum class GanSide { Generator, Discriminator };

/// Discriminator side: sum over scales of -E[log s(real)] - E[log(1 - s(fake))].
/// Generator side (non-saturating): sum over scales of -E[log s(fake)].
Tensor gan_loss(const std::vector<Tensor>& real_maps, const std::vector<Tensor>& fake_maps,
                GanSide side);

/// Sum over tap layers of mean |phi_i(a) - phi_i(b)|.
Tensor perceptual_loss(const Tensor& a, const Tensor& b, PerceptualNet& net);
/// Pixel L1 plus perceptual loss.
Tensor content_loss(const Tensor& generated, const Tensor& target, PerceptualNet& net);
/// Sum of perceptual losses over the four region crops.
Tensor local_loss(const std::vector<Tensor>& generated, const std::vector<Tensor>& target,
                  PerceptualNet& net);
Tensor total_loss(const Tensor& gan, const Tensor& content, const Tensor& local,
                  const LossWeights& weights);

REENACT_NS_END
