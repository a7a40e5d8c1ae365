#include "reenact/adversarial.hpp"

#include "reenact/ops.hpp"

REENACT_NS_BEGIN

PatchDiscriminator::PatchDiscriminator(const std::string& name, int in_channels,
                                       std::mt19937_64& rng) {
  convs_[0] = Conv2d(name + ".conv0", in_channels, 32, 4, 2, 1, false, rng);
  convs_[1] = Conv2d(name + ".conv1", 32, 64, 4, 2, 1, false, rng);
  convs_[2] = Conv2d(name + ".conv2", 64, 128, 4, 2, 1, false, rng);
  convs_[3] = Conv2d(name + ".logit", 128, 1, 3, 1, 1, false, rng);
}

Tensor PatchDiscriminator::forward(const Tensor& x, const ForwardOptions& options) {
  Tensor h = x;
  for (int i = 0; i < 3; ++i) h = leaky_relu(convs_[i].forward(h, options));
  return convs_[3].forward(h, options);
}

void PatchDiscriminator::collect(ParamList& out) {
  for (auto& c : convs_) c.collect(out);
}

MultiScaleDiscriminator::MultiScaleDiscriminator(const std::string& name, int in_channels,
                                                 std::mt19937_64& rng) {
  for (int s = 0; s < kScales; ++s) {
    scales_[s] = PatchDiscriminator(name + ".scale" + std::to_string(s), in_channels, rng);
  }
}

std::vector<Tensor> MultiScaleDiscriminator::forward(const Tensor& x,
                                                     const ForwardOptions& options) {
  std::vector<Tensor> maps;
  Tensor input = x;
  for (int s = 0; s < kScales; ++s) {
    if (s > 0) input = avg_pool2(input);
    maps.push_back(scales_[s].forward(input, options));
  }
  return maps;
}

void MultiScaleDiscriminator::collect(ParamList& out) {
  for (auto& s : scales_) s.collect(out);
}

namespace {

void require_spatial_match(const Tensor& a, const Tensor& b, const char* op) {
  const Shape& x = a.shape();
  const Shape& y = b.shape();
  if (x.n != y.n || x.h != y.h || x.w != y.w) {
    throw ShapeError(std::string(op) + ": " + x.str() + " vs " + y.str());
  }
}

}  // namespace

std::vector<Tensor> disc_forward_landmark(MultiScaleDiscriminator& d, const Tensor& image,
                                          const Tensor& driving_heatmap,
                                          const ForwardOptions& options) {
  require_spatial_match(image, driving_heatmap, "disc_forward_L");
  return d.forward(concat_channels({image, driving_heatmap}), options);
}

std::vector<Tensor> disc_forward_identity(MultiScaleDiscriminator& d, const Tensor& source,
                                          const Tensor& candidate, const ForwardOptions& options) {
  require_spatial_match(source, candidate, "disc_forward_I");
  return d.forward(concat_channels({source, candidate}), options);
}

// ---------------------------------------------------------------------------

PerceptualNet::PerceptualNet(std::uint64_t seed, std::vector<int> taps)
    : seed_(seed), taps_(std::move(taps)) {
  std::mt19937_64 rng(seed);
  static constexpr std::array<int, 5> strides{1, 2, 2, 2, 1};
  int c = 3;
  for (int i = 0; i < 5; ++i) {
    convs_[i] =
        Conv2d("perceptual.conv" + std::to_string(i), c, kWidths[i], 3, strides[i], 1, false, rng);
    convs_[i].weight.tensor.set_requires_grad(false);
    convs_[i].bias.tensor.set_requires_grad(false);
    c = kWidths[i];
  }
  for (int t : taps_) {
    if (t < 0 || t >= 5) throw std::invalid_argument("PerceptualNet: tap index out of range");
  }
}

std::vector<Tensor> PerceptualNet::features(const Tensor& image) {
  std::vector<Tensor> layers;
  Tensor x = image;
  const ForwardOptions options;
  int deepest = -1;
  for (int t : taps_) deepest = std::max(deepest, t);
  for (int i = 0; i <= deepest; ++i) {
    x = leaky_relu(convs_[i].forward(x, options));
    layers.push_back(x);
  }
  std::vector<Tensor> out;
  for (int t : taps_) out.push_back(layers[t]);
  return out;
}

ParamList PerceptualNet::parameters() {
  ParamList out;
  for (auto& c : convs_) c.collect(out);
  return out;
}

// ---------------------------------------------------------------------------

Tensor gan_loss(const std::vector<Tensor>& real_maps, const std::vector<Tensor>& fake_maps,
                GanSide side) {
  Tensor total = Tensor::scalar(Real(0));
  for (std::size_t s = 0; s < fake_maps.size(); ++s) {
    if (side == GanSide::Generator) {
      total = sub(total, mean(log(sigmoid(fake_maps[s]))));
    } else {
      const Tensor real_term = mean(log(sigmoid(real_maps.at(s))));
      const Tensor fake_term = mean(log(add_scalar(scale(sigmoid(fake_maps[s]), Real(-1)), 1)));
      total = sub(sub(total, real_term), fake_term);
    }
  }
  return total;
}

Tensor perceptual_loss(const Tensor& a, const Tensor& b, PerceptualNet& net) {
  require_same_shape(a, b, "perceptual_loss");
  const std::vector<Tensor> fa = net.features(a);
  const std::vector<Tensor> fb = net.features(b);
  Tensor total = Tensor::scalar(Real(0));
  for (std::size_t i = 0; i < fa.size(); ++i) total = add(total, mean(abs(sub(fa[i], fb[i]))));
  return total;
}

Tensor content_loss(const Tensor& generated, const Tensor& target, PerceptualNet& net) {
  require_same_shape(generated, target, "content_loss");
  return add(mean(abs(sub(generated, target))), perceptual_loss(generated, target, net));
}

Tensor local_loss(const std::vector<Tensor>& generated, const std::vector<Tensor>& target,
                  PerceptualNet& net) {
  if (generated.size() != target.size()) {
    throw ShapeError("local_loss: region count mismatch");
  }
  Tensor total = Tensor::scalar(Real(0));
  for (std::size_t r = 0; r < generated.size(); ++r) {
    total = add(total, perceptual_loss(generated[r], target[r], net));
  }
  return total;
}

Tensor total_loss(const Tensor& gan, const Tensor& content, const Tensor& local,
                  const LossWeights& w) {
  return add(add(scale(gan, w.lambda_gan), scale(content, w.lambda_c)),
             scale(local, w.lambda_local));
}

REENACT_NS_END
