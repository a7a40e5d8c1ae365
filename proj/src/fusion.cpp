#include "reenact/fusion.hpp"

#include "reenact/ops.hpp"

REENACT_NS_BEGIN

void FusionConfig::validate() const {
  const std::size_t n = channels.size();
  if (n == 0 || out_channels.size() != n || upsample.size() != n) {
    throw std::invalid_argument("FusionConfig: per-block lists must have equal, non-zero length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (upsample[i] < 1) throw std::invalid_argument("FusionConfig: upsample factor < 1");
    if (i + 1 < n && out_channels[i] != channels[i + 1]) {
      throw std::invalid_argument("FusionConfig: block " + std::to_string(i) +
                                  " output does not match next block input");
    }
  }
}

FusionBlock::FusionBlock(const std::string& name, int in_c, int out_c, int upsample,
                         std::mt19937_64& rng)
    : conv_(name + ".conv", in_c + 4, out_c * upsample * upsample, 3, 1, 1, true, rng),
      upsample_(upsample) {}

Tensor FusionBlock::modulate(const Tensor& feature, const Tensor& gamma, const Tensor& beta) {
  return adaptive_denormalize(feature, channel_stats(feature), gamma, beta);
}

Tensor FusionBlock::forward(const Tensor& feature, const Tensor& locals_composite,
                            const Tensor& gamma, const Tensor& beta,
                            const ForwardOptions& options) {
  const Shape& f = feature.shape();
  const Shape& l = locals_composite.shape();
  if (l.c != 4 || l.n != f.n) {
    throw ShapeError("fusion_block: locals " + l.str() + " incompatible with feature " + f.str());
  }
  const Tensor locals = bilinear_resize(locals_composite, f.h, f.w);
  const Tensor modulated = modulate(feature, gamma, beta);
  Tensor x = relu(conv_.forward(concat_channels({modulated, locals}), options));
  return upsample_ > 1 ? pixel_shuffle(x, upsample_) : x;
}

FusionNet::FusionNet(const FusionConfig& config, std::mt19937_64& rng) : config_(config) {
  config_.validate();
  for (int i = 0; i < config_.n_blocks(); ++i) {
    blocks_.emplace_back("fusion.block" + std::to_string(i), config_.channels[i],
                         config_.out_channels[i], config_.upsample[i], rng);
  }
  const int c = config_.out_channels.back();
  for (int i = 0; i < config_.tail_blocks; ++i) {
    const std::string n = "fusion.tail" + std::to_string(i);
    tail_.push_back(
        {Conv2d(n + ".a", c, c, 3, 1, 1, true, rng), Conv2d(n + ".b", c, c, 3, 1, 1, true, rng)});
  }
  head_ = Conv2d("fusion.head", c, 3, 3, 1, 1, true, rng);
}

Tensor FusionNet::forward(const Tensor& warped_feature, const AdaptiveParams& theta,
                          const Tensor& locals_composite, const ForwardOptions& options) {
  if (static_cast<int>(theta.entries.size()) != config_.n_blocks()) {
    throw ShapeError("fusion_forward: " + std::to_string(theta.entries.size()) +
                     " adaptive parameter pairs for " + std::to_string(config_.n_blocks()) +
                     " blocks");
  }
  Tensor x = warped_feature;
  for (int i = 0; i < config_.n_blocks(); ++i) {
    x = blocks_[i].forward(x, locals_composite, theta.entries[i].gamma, theta.entries[i].beta,
                           options);
  }
  for (auto& [a, b] : tail_) {
    x = add(x, b.forward(relu(a.forward(x, options)), options));
  }
  return tanh(head_.forward(x, options));
}

void FusionNet::collect(ParamList& out) {
  for (auto& b : blocks_) b.collect(out);
  for (auto& [a, b] : tail_) {
    a.collect(out);
    b.collect(out);
  }
  head_.collect(out);
}

REENACT_NS_END
