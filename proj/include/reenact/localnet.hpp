#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

#include "reenact/geometry.hpp"
#include "reenact/layers.hpp"

REENACT_NS_BEGIN

/// U-Net with three stride-2 down blocks (32, 64, 128) and three
/// upsample + conv blocks with skip concatenation, ending in a tanh head.
class RegionUNet {
 public:
  RegionUNet() = default;
  RegionUNet(const std::string& name, int in_channels, std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const ForwardOptions& options);
  void collect(ParamList& out);

 private:
  std::array<Conv2d, 3> down_;
  std::array<Conv2d, 3> up_;
  Conv2d head_;
};

/// Reenacted region crops for a batch, in the driving region frame.
struct LocalReenactment {
  RegionSpec region;
  Tensor crop;                                  // (n, 3, crop_h, crop_w), tanh range
  std::vector<SimilarityTransform> placements;  // crop -> image, per sample
};

/// The four independent region generators (eyes, nose, mouth).
class LocalNet {
 public:
  LocalNet() = default;
  LocalNet(int resolution, std::mt19937_64& rng, double heatmap_variance = kHeatmapVariance);

  /// Builds the (3 + 2|indices|)-channel region input for every sample and
  /// runs that region's U-Net. Driving landmarks must already be adapted.
  LocalReenactment reenact(const Tensor& source_images,
                           std::span<const LandmarkSet> source_landmarks,
                           std::span<const LandmarkSet> driving_landmarks, int region_index,
                           const ForwardOptions& options);
  std::array<LocalReenactment, 4> reenact_all(const Tensor& source_images,
                                              std::span<const LandmarkSet> source_landmarks,
                                              std::span<const LandmarkSet> driving_landmarks,
                                              const ForwardOptions& options);

  const std::array<RegionSpec, 4>& regions() const { return regions_; }
  RegionUNet& net(int region_index) { return nets_.at(region_index); }
  void collect(ParamList& out);
  void collect_region(int region_index, ParamList& out);

 private:
  std::array<RegionSpec, 4> regions_;
  std::array<RegionUNet, 4> nets_;
  double heatmap_variance_ = kHeatmapVariance;
};

/// Non-differentiable input assembly for one region and one sample:
/// source crop, source heatmap crop, driving heatmap crop.
Tensor local_input(const Tensor& source_image, const LandmarkSet& source_landmarks,
                   const LandmarkSet& driving_landmarks, const RegionSpec& region,
                   double heatmap_variance = kHeatmapVariance);

/// Composites the placed crops onto a (n, 4, H, W) canvas: 3 colour channels
/// plus the coverage mask. Later regions overwrite earlier ones.
Tensor place_all(const std::array<LocalReenactment, 4>& locals, int canvas_h, int canvas_w);

REENACT_NS_END
