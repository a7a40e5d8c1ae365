#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "reenact/geometry.hpp"
#include "reenact/tensor.hpp"

REENACT_NS_BEGIN

/// Per-identity factors. Colours are RGB in [0, 1].
struct Appearance {
  std::array<double, 3> skin{0.8, 0.6, 0.5};
  std::array<double, 3> hair{0.3, 0.2, 0.1};
  std::array<double, 3> eye{0.3, 0.4, 0.6};
  double face_aspect = 0.8;   // head half-width / half-height, [0.72, 0.90]
  double eye_size = 0.14;     // eye half-width in face units, [0.11, 0.17]
  double nose_width = 0.11;   // [0.08, 0.14]
  double mouth_width = 0.27;  // [0.22, 0.32]
};

/// Per-frame head pose. Translation is in pixels.
struct Pose {
  double shear = 0.0;     // [-0.2, 0.2], yaw proxy
  double rotation = 0.0;  // radians, [-0.35, 0.35]
  double tx = 0.0;        // [-0.1 W, 0.1 W]
  double ty = 0.0;        // [-0.1 H, 0.1 H]
  double scale = 1.0;     // [0.85, 1.15]
};

struct Expression {
  double eye_open_left = 1.0;   // [0, 1]
  double eye_open_right = 1.0;  // [0, 1]
  double mouth_open = 0.0;      // [0, 1]
  double mouth_curve = 0.0;     // [-1, 1]
  double brow_raise = 0.0;      // [-1, 1]
};

struct FaceParams {
  Appearance appearance;
  Pose pose;
  Expression expression;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate(int h, int w) const;
};

struct SyntheticSample {
  Tensor image;  // (1, 3, H, W) in [-1, 1]
  LandmarkSet landmarks;
  FaceParams params;
};

/// Deterministic rasterisation of an abstract face plus its 68 landmarks.
SyntheticSample render(const FaceParams& params, int h, int w);

/// Landmarks only; identical to render(params, h, w).landmarks.
LandmarkSet face_landmarks(const FaceParams& params, int h, int w);

Appearance sample_appearance(std::uint64_t identity_seed);
/// Draws pose and expression from their uniform ranges.
std::pair<Pose, Expression> sample_frame(std::uint64_t frame_seed, int h, int w);

/// Seed for frame `index` of an identity.
std::uint64_t frame_seed(std::uint64_t identity_seed, std::uint64_t index);
/// Seed for identity `index` of a dataset.
std::uint64_t identity_seed(std::uint64_t dataset_seed, std::uint64_t index);

SyntheticSample render_frame(std::uint64_t identity_seed, std::uint64_t frame_seed, int resolution);

/// Two frames of one identity with independently drawn pose and expression.
std::pair<SyntheticSample, SyntheticSample> sample_pair(std::uint64_t identity_seed,
                                                        std::uint64_t frame_rng_seed,
                                                        int resolution = 64);

/// Source from identity a, driving from identity b. Rejects a == b.
std::pair<SyntheticSample, SyntheticSample> cross_pair(std::uint64_t identity_a,
                                                       std::uint64_t identity_b,
                                                       std::uint64_t frame_rng_seed,
                                                       int resolution = 64);

REENACT_NS_END
