#pragma once

#include <array>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "reenact/appearance.hpp"
#include "reenact/flow.hpp"
#include "reenact/fusion.hpp"
#include "reenact/geometry.hpp"
#include "reenact/localnet.hpp"

REENACT_NS_BEGIN

enum class ShapeAdaptation { CrossOnly, Always, Never };

struct GeneratorConfig {
  int resolution = 64;
  /// When false the local pathway is removed and fusion sees an all-zero
  /// locals composite.
  bool use_local_net = true;
  double heatmap_variance = kHeatmapVariance;
  std::uint64_t seed = 1;
};

struct GeneratorInput {
  Tensor source;  // (n, 3, H, W)
  std::vector<LandmarkSet> source_landmarks;
  std::vector<LandmarkSet> driving_landmarks;
  /// Per sample: whether driving landmarks are re-statisticized toward the
  /// source before use.
  std::vector<bool> adapt;
};

struct GeneratorOutput {
  Tensor image;      // (n, 3, H, W)
  Tensor flow;       // (n, 2, H, W)
  Tensor warped;     // (n, 128, H/4, W/4)
  Tensor composite;  // (n, 4, H, W)
  AdaptiveParams theta;
  std::optional<std::array<LocalReenactment, 4>> locals;
  /// Driving landmarks after optional adaptation.
  std::vector<LandmarkSet> driving_landmarks;
  Tensor driving_heatmap;  // (n, 68, H, W)
};

/// Stacks per-sample heatmaps into (n, 68, H, W).
Tensor batch_heatmaps(std::span<const LandmarkSet> landmarks, int h, int w,
                      double variance = kHeatmapVariance);

/// The full reenactment generator: flow estimation and feature warping,
/// local region reenactment, appearance extraction and fusion.
class Generator {
 public:
  Generator() = default;
  explicit Generator(const GeneratorConfig& config);

  GeneratorOutput forward(const GeneratorInput& input, const ForwardOptions& options);

  const GeneratorConfig& config() const { return config_; }
  FlowEstimator& flow() { return flow_; }
  LocalNet& local() { return local_; }
  AppearanceExtractor& appearance() { return appearance_; }
  FusionNet& fusion() { return fusion_; }
  /// Every trainable parameter, in a fixed order.
  void collect(ParamList& out);

 private:
  GeneratorConfig config_;
  FlowEstimator flow_;
  LocalNet local_;
  AppearanceExtractor appearance_;
  FusionNet fusion_;
};

REENACT_NS_END
