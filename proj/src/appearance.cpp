#include "reenact/appearance.hpp"

#include <cmath>

#include "reenact/ops.hpp"

REENACT_NS_BEGIN

namespace {
constexpr std::array<int, 3> kEncoder{32, 64, 128};
}

AppearanceExtractor::AppearanceExtractor(std::mt19937_64& rng) {
  int c = 3;
  for (int i = 0; i < 3; ++i) {
    encoder_[i] = Conv2d("app.enc" + std::to_string(i), c, kEncoder[i], 3, 2, 1, true, rng);
    c = kEncoder[i];
  }
  // Skip partner for decoder stage i: enc1 (64), enc0 (32), the image (3).
  const std::array<int, 3> skip{kEncoder[1], kEncoder[0], 3};
  for (int i = 0; i < 3; ++i) {
    const int out = kThetaChannels[i];
    const std::string n = std::to_string(i);
    up_[i] = Conv2d("app.up" + n, c, out, 3, 1, 1, true, rng);
    merge_[i] = Conv2d("app.merge" + n, out + skip[i], out, 3, 1, 1, true, rng);
    gamma_[i] = GainHead("app.gamma" + n, out, out, kInitialHeadGain, Real(1), rng);
    beta_[i] = GainHead("app.beta" + n, out, out, kInitialHeadGain, Real(0), rng);
    c = out;
  }
}

AppearanceOutput AppearanceExtractor::forward(const Tensor& image, const ForwardOptions& options) {
  const Shape& s = image.shape();
  if (s.c != 3 || s.h % 8 != 0 || s.w % 8 != 0) {
    throw ShapeError("appearance.extract: expected (n, 3, H, W) with H, W divisible by 8, got " +
                     s.str());
  }
  for (Real v : image.data()) {
    if (!(std::abs(v) <= Real(1) + Real(1e-5))) {
      throw std::invalid_argument("appearance.extract: image value " + std::to_string(v) +
                                  " outside [-1, 1]");
    }
  }
  const Tensor e0 = leaky_relu(encoder_[0].forward(image, options));
  const Tensor e1 = leaky_relu(encoder_[1].forward(e0, options));
  Tensor x = leaky_relu(encoder_[2].forward(e1, options));
  const std::array<Tensor, 3> skips{e1, e0, image};

  AppearanceOutput out;
  for (int i = 0; i < 3; ++i) {
    x = relu(up_[i].forward(upsample_nearest(x, 2), options));
    x = relu(merge_[i].forward(concat_channels({x, skips[i]}), options));
    if (i == 0) out.feature = x;
    out.theta.entries.push_back({gamma_[i].forward(x, options), beta_[i].forward(x, options)});
  }
  return out;
}

void AppearanceExtractor::collect(ParamList& out) {
  for (int i = 0; i < 3; ++i) {
    encoder_[i].collect(out);
    up_[i].collect(out);
    merge_[i].collect(out);
    gamma_[i].collect(out);
    beta_[i].collect(out);
  }
}

REENACT_NS_END
