#include "reenact/flow.hpp"

#include "reenact/ops.hpp"

REENACT_NS_BEGIN

FlowEstimator::FlowEstimator(std::mt19937_64& rng) {
  int in_c = 2 * 68;
  for (int i = 0; i < 4; ++i) {
    down_[i] = Conv2d("fen.down" + std::to_string(i), in_c, kWidths[i], 3, 2, 1, true, rng);
    in_c = kWidths[i];
  }
  // up_[i] lands on the resolution of down_[2 - i]; the last one on H.
  const std::array<int, 4> up_out{kWidths[2], kWidths[1], kWidths[0], kTopWidth};
  for (int i = 0; i < 4; ++i) {
    up_[i] = Conv2d("fen.up" + std::to_string(i), in_c, up_out[i], 3, 1, 1, true, rng);
    in_c = up_out[i];
  }
  head_ = GainHead("fen.head", kTopWidth, 2, Real(0), Real(0), rng);
}

Tensor FlowEstimator::forward(const Tensor& source_heatmap, const Tensor& driving_heatmap,
                              const ForwardOptions& options) {
  const Shape& s = source_heatmap.shape();
  const Shape& d = driving_heatmap.shape();
  if (s.n != d.n || s.h != d.h || s.w != d.w) {
    throw ShapeError("fen_forward: source heatmap " + s.str() + " vs driving heatmap " + d.str());
  }
  if (s.h % 16 != 0 || s.w % 16 != 0) {
    throw ShapeError("fen_forward: extent " + s.str() + " not divisible by 16");
  }
  std::array<Tensor, 4> skips;
  Tensor x = concat_channels({source_heatmap, driving_heatmap});
  for (int i = 0; i < 4; ++i) {
    x = leaky_relu(down_[i].forward(x, options));
    skips[i] = x;
  }
  for (int i = 0; i < 4; ++i) {
    x = relu(up_[i].forward(upsample_nearest(x, 2), options));
    if (i < 3) x = add(x, skips[2 - i]);
  }
  return head_.forward(x, options);
}

void FlowEstimator::collect(ParamList& out) {
  for (auto& c : down_) c.collect(out);
  for (auto& c : up_) c.collect(out);
  head_.collect(out);
}

Tensor warp_feature(const Tensor& feature, const Tensor& flow) {
  const Shape& f = feature.shape();
  const Tensor resized = bilinear_resize(flow, f.h, f.w);
  return grid_sample(feature, resized);
}

REENACT_NS_END
