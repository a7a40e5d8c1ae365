#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "reenact/adversarial.hpp"
#include "reenact/generator.hpp"

REENACT_NS_BEGIN

/// Training hyperparameters. Every key has a default; the text form is
/// flat `key = value` lines with `#` comments, and unknown keys are errors.
struct TrainConfig {
  double lr_generator = 2e-5;
  double lr_discriminator = 1e-5;
  /// Learning rate for both networks in overfit mode.
  double lr_overfit = 2e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  int batch_size = 2;
  int steps = 20000;
  int resolution = 64;
  double heatmap_variance = 3.0;
  double lambda_gan = 10.0;
  double lambda_c = 5.0;
  double lambda_local = 5.0;
  /// Network initialization seed.
  std::uint64_t seed = 1;
  /// Dataset seed: identity i of the training set is identity_seed(data_seed, i).
  std::uint64_t data_seed = 1;
  int identities = 200;
  int frames = 8;
  /// Directory written by `synth-data`; empty means render on the fly.
  std::string data_dir;
  bool overfit = false;
  bool use_local_net = true;
  ShapeAdaptation shape_adaptation = ShapeAdaptation::CrossOnly;
  std::uint64_t perceptual_seed = PerceptualNet::kDefaultSeed;
  /// Optional named-tensor file holding external feature-net weights.
  std::string perceptual_weights;
  int log_every = 50;
  int checkpoint_every = 500;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
  Real effective_lr_generator() const;
  Real effective_lr_discriminator() const;
  LossWeights loss_weights() const;
  GeneratorConfig generator_config() const;
};

/// Parses the key-value text form. Errors name the origin and line.
TrainConfig parse_config(const std::string& text, const std::string& origin);
TrainConfig read_config(const std::filesystem::path& path);
/// Canonical text form: every key, in declaration order, round-trippable.
std::string format_config(const TrainConfig& config);

std::string to_string(ShapeAdaptation mode);
ShapeAdaptation parse_shape_adaptation(const std::string& text);

REENACT_NS_END
