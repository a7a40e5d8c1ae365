#include "reenact/generator.hpp"

#include "reenact/ops.hpp"

REENACT_NS_BEGIN

Tensor batch_heatmaps(std::span<const LandmarkSet> landmarks, int h, int w, double variance) {
  std::vector<Tensor> maps;
  maps.reserve(landmarks.size());
  for (const LandmarkSet& l : landmarks) maps.push_back(rasterize_heatmaps(l, h, w, variance));
  return stack_batch(maps);
}

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

Generator::Generator(const GeneratorConfig& config) : config_(config) {
  if (config_.resolution < 16 || config_.resolution % 16 != 0) {
    throw std::invalid_argument("Generator: resolution must be a positive multiple of 16");
  }
  if (!(config_.heatmap_variance > 0.0)) {
    throw std::invalid_argument("Generator: heatmap variance must be positive");
  }
  // Each sub-net draws from its own stream so toggling the local pathway
  // leaves the other initializations unchanged.
  auto flow_rng = seeded(config_.seed, 1);
  auto local_rng = seeded(config_.seed, 2);
  auto app_rng = seeded(config_.seed, 3);
  auto fusion_rng = seeded(config_.seed, 4);
  flow_ = FlowEstimator(flow_rng);
  if (config_.use_local_net)
    local_ = LocalNet(config_.resolution, local_rng, config_.heatmap_variance);
  appearance_ = AppearanceExtractor(app_rng);
  fusion_ = FusionNet(FusionConfig{}, fusion_rng);
}

GeneratorOutput Generator::forward(const GeneratorInput& input, const ForwardOptions& options) {
  const Shape& s = input.source.shape();
  if (s.c != 3 || s.h != config_.resolution || s.w != config_.resolution) {
    throw ShapeError("generator: expected (n, 3, " + std::to_string(config_.resolution) + ", " +
                     std::to_string(config_.resolution) + "), got " + s.str());
  }
  const auto n = static_cast<std::size_t>(s.n);
  if (input.source_landmarks.size() != n || input.driving_landmarks.size() != n ||
      (!input.adapt.empty() && input.adapt.size() != n)) {
    throw ShapeError("generator: per-sample landmark lists do not match batch " + s.str());
  }

  GeneratorOutput out;
  out.driving_landmarks = input.driving_landmarks;
  for (std::size_t i = 0; i < n && !input.adapt.empty(); ++i) {
    if (input.adapt[i]) {
      out.driving_landmarks[i] =
          adapt_landmark_shape(input.driving_landmarks[i], input.source_landmarks[i]);
    }
  }

  const Tensor source_heatmap =
      batch_heatmaps(input.source_landmarks, s.h, s.w, config_.heatmap_variance);
  out.driving_heatmap = batch_heatmaps(out.driving_landmarks, s.h, s.w, config_.heatmap_variance);
  out.flow = flow_.forward(source_heatmap, out.driving_heatmap, options);

  AppearanceOutput app = appearance_.forward(input.source, options);
  out.theta = std::move(app.theta);
  out.warped = warp_feature(app.feature, out.flow);

  if (config_.use_local_net) {
    out.locals =
        local_.reenact_all(input.source, input.source_landmarks, out.driving_landmarks, options);
    out.composite = place_all(*out.locals, s.h, s.w);
  } else {
    out.composite = Tensor::zeros(Shape{s.n, 4, s.h, s.w});
  }
  out.image = fusion_.forward(out.warped, out.theta, out.composite, options);
  return out;
}

void Generator::collect(ParamList& out) {
  flow_.collect(out);
  if (config_.use_local_net) local_.collect(out);
  appearance_.collect(out);
  fusion_.collect(out);
}

REENACT_NS_END
