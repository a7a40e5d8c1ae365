#include "reenact/localnet.hpp"

#include "reenact/ops.hpp"

REENACT_NS_BEGIN

namespace {
constexpr std::array<int, 3> kWidths{32, 64, 128};
}

RegionUNet::RegionUNet(const std::string& name, int in_channels, std::mt19937_64& rng) {
  int c = in_channels;
  for (int i = 0; i < 3; ++i) {
    down_[i] = Conv2d(name + ".down" + std::to_string(i), c, kWidths[i], 3, 2, 1, true, rng);
    c = kWidths[i];
  }
  // up0: 128 -> 64, concat down1 (64); up1: 128 -> 32, concat down0 (32);
  // up2: 64 -> 32, concat the input.
  up_[0] = Conv2d(name + ".up0", 128, 64, 3, 1, 1, true, rng);
  up_[1] = Conv2d(name + ".up1", 128, 32, 3, 1, 1, true, rng);
  up_[2] = Conv2d(name + ".up2", 64, 32, 3, 1, 1, true, rng);
  head_ = Conv2d(name + ".head", 32 + in_channels, 3, 3, 1, 1, true, rng);
}

Tensor RegionUNet::forward(const Tensor& x, const ForwardOptions& options) {
  const Shape& s = x.shape();
  if (s.h % 8 != 0 || s.w % 8 != 0) {
    throw ShapeError("RegionUNet: crop extent " + s.str() + " not divisible by 8");
  }
  const Tensor d0 = leaky_relu(down_[0].forward(x, options));
  const Tensor d1 = leaky_relu(down_[1].forward(d0, options));
  const Tensor d2 = leaky_relu(down_[2].forward(d1, options));
  Tensor u = relu(up_[0].forward(upsample_nearest(d2, 2), options));
  u = concat_channels({u, d1});
  u = relu(up_[1].forward(upsample_nearest(u, 2), options));
  u = concat_channels({u, d0});
  u = relu(up_[2].forward(upsample_nearest(u, 2), options));
  u = concat_channels({u, x});
  return tanh(head_.forward(u, options));
}

void RegionUNet::collect(ParamList& out) {
  for (auto& c : down_) c.collect(out);
  for (auto& c : up_) c.collect(out);
  head_.collect(out);
}

LocalNet::LocalNet(int resolution, std::mt19937_64& rng, double heatmap_variance)
    : regions_(all_regions(resolution)), heatmap_variance_(heatmap_variance) {
  for (int i = 0; i < 4; ++i) {
    const int in_c = 3 + 2 * static_cast<int>(regions_[i].indices.size());
    nets_[i] = RegionUNet("local." + regions_[i].name, in_c, rng);
  }
}

Tensor local_input(const Tensor& source_image, const LandmarkSet& source_landmarks,
                   const LandmarkSet& driving_landmarks, const RegionSpec& region,
                   double heatmap_variance) {
  const Shape& is = source_image.shape();
  const SimilarityTransform src_frame = region_frame(source_landmarks, region);
  const SimilarityTransform drv_frame = region_frame(driving_landmarks, region);
  const Tensor image = source_image.detach();
  const Tensor src_heat =
      rasterize_heatmaps(region_landmarks(source_landmarks, region), is.h, is.w, heatmap_variance);
  const Tensor drv_heat =
      rasterize_heatmaps(region_landmarks(driving_landmarks, region), is.h, is.w, heatmap_variance);
  return concat_channels({resample_crop(image, src_frame, region.crop_h, region.crop_w),
                          resample_crop(src_heat, src_frame, region.crop_h, region.crop_w),
                          resample_crop(drv_heat, drv_frame, region.crop_h, region.crop_w)});
}

LocalReenactment LocalNet::reenact(const Tensor& source_images,
                                   std::span<const LandmarkSet> source_landmarks,
                                   std::span<const LandmarkSet> driving_landmarks, int region_index,
                                   const ForwardOptions& options) {
  const int n = source_images.shape().n;
  if (source_landmarks.size() != static_cast<std::size_t>(n) ||
      driving_landmarks.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("local_reenact: landmark count does not match batch " +
                     source_images.shape().str());
  }
  const RegionSpec& region = regions_.at(region_index);
  std::vector<Tensor> inputs;
  LocalReenactment out;
  out.region = region;
  for (int i = 0; i < n; ++i) {
    inputs.push_back(local_input(slice_batch(source_images.detach(), i), source_landmarks[i],
                                 driving_landmarks[i], region, heatmap_variance_));
    out.placements.push_back(region_frame(driving_landmarks[i], region));
  }
  out.crop = nets_[region_index].forward(stack_batch(inputs), options);
  return out;
}

std::array<LocalReenactment, 4> LocalNet::reenact_all(
    const Tensor& source_images, std::span<const LandmarkSet> source_landmarks,
    std::span<const LandmarkSet> driving_landmarks, const ForwardOptions& options) {
  std::array<LocalReenactment, 4> out;
  for (int r = 0; r < 4; ++r) {
    out[r] = reenact(source_images, source_landmarks, driving_landmarks, r, options);
  }
  return out;
}

void LocalNet::collect(ParamList& out) {
  for (auto& net : nets_) net.collect(out);
}

void LocalNet::collect_region(int region_index, ParamList& out) {
  nets_.at(region_index).collect(out);
}

Tensor place_all(const std::array<LocalReenactment, 4>& locals, int canvas_h, int canvas_w) {
  Tensor colour;
  std::vector<Real> coverage;
  for (const LocalReenactment& local : locals) {
    const PlacedRegion placed = place_region(canvas_h, canvas_w, local.crop, local.placements);
    const auto m = placed.mask.data();
    if (!colour.defined()) {
      colour = placed.canvas;
      coverage.assign(m.begin(), m.end());
      continue;
    }
    // Overwrite: keep the previous composite only where this region is absent.
    std::vector<Real> keep(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      keep[i] = Real(1) - m[i];
      coverage[i] = std::max(coverage[i], m[i]);
    }
    const Tensor keep_t = Tensor::from(placed.mask.shape(), std::move(keep));
    colour = add(mul(colour, keep_t), placed.canvas);
  }
  const Shape ms{colour.shape().n, 1, canvas_h, canvas_w};
  return concat_channels({colour, Tensor::from(ms, std::move(coverage))});
}

REENACT_NS_END
