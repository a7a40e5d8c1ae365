#include "reenact/layers.hpp"

#include <cmath>

#include "reenact/ops.hpp"

REENACT_NS_BEGIN

Tensor he_normal(Shape shape, std::mt19937_64& rng, Real gain) {
  const double fan_in = static_cast<double>(shape.c) * shape.h * shape.w;
  std::normal_distribution<double> normal(0.0, gain * std::sqrt(2.0 / fan_in));
  std::vector<Real> values(shape.numel());
  for (Real& v : values) v = static_cast<Real>(normal(rng));
  return Tensor::from(shape, std::move(values));
}

Conv2d::Conv2d(std::string name, int in_c, int out_c, int k, int stride_, int padding_,
               bool spectral_, std::mt19937_64& rng, Real init_gain)
    : weight(name + ".weight", he_normal(Shape{out_c, in_c, k, k}, rng, init_gain)),
      bias(name + ".bias", Tensor::zeros(Shape{1, out_c, 1, 1})),
      stride(stride_),
      padding(padding_),
      spectral(spectral_) {
  if (spectral) weight.enable_spectral(rng);
}

Tensor Conv2d::forward(const Tensor& x, const ForwardOptions& options) {
  const Tensor w = spectral ? spectral_normalize(weight, options.spectral) : weight.tensor;
  return conv2d(x, w, bias.tensor, stride, padding);
}

GainHead::GainHead(std::string name, int in_c, int out_c, Real initial_gain, Real initial_offset,
                   std::mt19937_64& rng)
    : conv(name + ".conv", in_c, out_c, 3, 1, 1, true, rng),
      gain(name + ".gain", Tensor::scalar(initial_gain)),
      offset(name + ".offset", Tensor::full(Shape{1, out_c, 1, 1}, initial_offset)) {}

Tensor GainHead::forward(const Tensor& x, const ForwardOptions& options) {
  return add(mul(conv.forward(x, options), gain.tensor), offset.tensor);
}

void GainHead::collect(ParamList& out) {
  conv.collect(out);
  out.push_back(&gain);
  out.push_back(&offset);
}

REENACT_NS_END
