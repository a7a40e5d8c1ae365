#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "reenact/adversarial.hpp"
#include "reenact/checkpoint.hpp"
#include "reenact/config.hpp"
#include "reenact/dataset.hpp"
#include "reenact/generator.hpp"

REENACT_NS_BEGIN

/// Per-term values of one training step. `total` is the weighted generator
/// objective actually back-propagated.
struct LossReport {
  std::int64_t step = 0;
  double d_landmark = 0.0;
  double d_identity = 0.0;
  double gan = 0.0;
  double content = 0.0;
  double local = 0.0;
  double total = 0.0;
  /// Mean absolute error of the generated frame against the driving frame.
  double pixel_l1 = 0.0;
};

/// Same-identity (source, driving) pairs for one step.
struct Batch {
  Tensor source;
  Tensor driving;
  std::vector<LandmarkSet> source_landmarks;
  std::vector<LandmarkSet> driving_landmarks;
};

/// Whether the driving landmarks of a pair are re-statisticized toward the
/// source before use.
bool adapt_for(ShapeAdaptation mode, bool same_identity);

/// Target crops of `image` at each sample's driving region frames.
std::vector<Tensor> region_targets(const Tensor& image, std::span<const LandmarkSet> landmarks,
                                   int resolution);

/// Owns the generator, both discriminators and the feature net, and runs
/// alternating updates: one discriminator step on a detached fake, then one
/// generator step with the discriminators frozen.
class Trainer {
 public:
  Trainer(TrainConfig config, std::shared_ptr<const Dataset> data);

  /// Batch drawn for a step; a pure function of the seeds and the step.
  Batch batch_for_step(std::int64_t step) const;
  /// Runs one update and advances the step counter. Throws NumericalError
  /// naming the first non-finite loss term; no parameter changes then.
  LossReport step();
  std::int64_t steps_done() const { return step_; }

  CheckpointFile checkpoint();
  /// Restores parameters, optimizer moments, power-iteration vectors and the
  /// step counter. Throws DataError on missing entries or shape mismatches.
  void restore(const CheckpointFile& file);

  const TrainConfig& config() const { return config_; }
  Generator& generator() { return generator_; }
  MultiScaleDiscriminator& disc_landmark() { return disc_landmark_; }
  MultiScaleDiscriminator& disc_identity() { return disc_identity_; }
  PerceptualNet& perceptual() { return perceptual_; }
  ParamList generator_params();
  ParamList discriminator_params();

 private:
  TrainConfig config_;
  std::shared_ptr<const Dataset> data_;
  Generator generator_;
  MultiScaleDiscriminator disc_landmark_;
  MultiScaleDiscriminator disc_identity_;
  PerceptualNet perceptual_;
  std::int64_t step_ = 0;
};

/// Training data for a config: the single-pair overfit set, a loaded
/// directory, or on-the-fly rendered identities.
std::shared_ptr<const Dataset> dataset_for(const TrainConfig& config);

/// Copies named perceptual-net weights from a checkpoint-format file.
void load_perceptual_weights(PerceptualNet& net, const std::filesystem::path& path);

/// Generator plus its training config restored from a checkpoint.
struct LoadedModel {
  TrainConfig config;
  Generator generator;
};
LoadedModel load_model(const CheckpointFile& file);
/// Number of completed training steps recorded in a checkpoint.
std::int64_t checkpoint_steps(const CheckpointFile& file);

struct TrainLoopOptions {
  /// Train until this many total steps are done.
  std::int64_t until_step = 0;
  std::filesystem::path checkpoint_path;
  std::function<void(const LossReport&, double seconds_per_step)> on_log;
};

/// Steps the trainer, logging every `log_every` steps and checkpointing
/// every `checkpoint_every` steps and at the end.
void run_training(Trainer& trainer, const TrainLoopOptions& options);

REENACT_NS_END
