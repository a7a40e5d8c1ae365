#include "reenact/trainer.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "reenact/errors.hpp"
#include "reenact/ops.hpp"

REENACT_NS_BEGIN

namespace {

constexpr const char* kStateEntry = "trainer.state";

// Freezes a parameter set for the lifetime of the guard.
class FrozenParams {
 public:
  explicit FrozenParams(ParamList params) : params_(std::move(params)) {
    set_trainable(params_, false);
  }
  ~FrozenParams() { set_trainable(params_, true); }
  FrozenParams(const FrozenParams&) = delete;
  FrozenParams& operator=(const FrozenParams&) = delete;

 private:
  ParamList params_;
};

void require_finite(const Tensor& loss, const char* term, std::int64_t step) {
  if (!std::isfinite(loss.item())) {
    throw NumericalError("non-finite " + std::string(term) + " loss at step " +
                         std::to_string(step));
  }
}

std::vector<float> values_of(std::span<const Real> v) { return {v.begin(), v.end()}; }

NamedTensor entry(std::string name, Shape shape, std::vector<float> values) {
  return {std::move(name), shape, std::move(values)};
}

Shape row_shape(std::size_t len) { return Shape{1, 1, 1, static_cast<int>(len)}; }

void copy_into(std::span<Real> dst, const NamedTensor& src, Shape expected) {
  if (src.shape != expected) {
    throw DataError("checkpoint entry '" + src.name + "' has shape " + src.shape.str() +
                    ", expected " + expected.str());
  }
  std::copy(src.values.begin(), src.values.end(), dst.begin());
}

void restore_value(Parameter& p, const CheckpointFile& file) {
  copy_into(p.tensor.mutable_data(), file.get(p.name), p.tensor.shape());
  if (p.spectral()) {
    copy_into(p.spectral_u, file.get(p.name + "#sn_u"), row_shape(p.spectral_u.size()));
  }
}

void restore_optimizer(Parameter& p, const CheckpointFile& file) {
  copy_into(p.adam_m, file.get(p.name + "#adam_m"), p.tensor.shape());
  copy_into(p.adam_v, file.get(p.name + "#adam_v"), p.tensor.shape());
  p.step_count = static_cast<std::int64_t>(unpack_u64(file.get(p.name + "#adam_t").values));
}

void append_param(CheckpointFile& file, const Parameter& p, bool with_optimizer) {
  file.entries.push_back(entry(p.name, p.tensor.shape(), values_of(p.tensor.data())));
  if (p.spectral()) {
    file.entries.push_back(
        entry(p.name + "#sn_u", row_shape(p.spectral_u.size()), values_of(p.spectral_u)));
  }
  if (with_optimizer) {
    file.entries.push_back(entry(p.name + "#adam_m", p.tensor.shape(), values_of(p.adam_m)));
    file.entries.push_back(entry(p.name + "#adam_v", p.tensor.shape(), values_of(p.adam_v)));
    file.entries.push_back(entry(p.name + "#adam_t", row_shape(4),
                                 pack_u64(static_cast<std::uint64_t>(p.step_count))));
  }
}

}  // namespace

bool adapt_for(ShapeAdaptation mode, bool same_identity) {
  switch (mode) {
    case ShapeAdaptation::Always:
      return true;
    case ShapeAdaptation::Never:
      return false;
    case ShapeAdaptation::CrossOnly:
      return !same_identity;
  }
  return !same_identity;
}

std::vector<Tensor> region_targets(const Tensor& image, std::span<const LandmarkSet> landmarks,
                                   int resolution) {
  if (landmarks.size() != static_cast<std::size_t>(image.shape().n)) {
    throw ShapeError("region_targets: landmark count does not match batch " + image.shape().str());
  }
  std::vector<Tensor> out;
  for (const RegionSpec& region : all_regions(resolution)) {
    std::vector<Tensor> crops;
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
      crops.push_back(resample_crop(slice_batch(image, static_cast<int>(i)).detach(),
                                    region_frame(landmarks[i], region), region.crop_h,
                                    region.crop_w));
    }
    out.push_back(stack_batch(crops));
  }
  return out;
}

std::shared_ptr<const Dataset> dataset_for(const TrainConfig& config) {
  if (!config.data_dir.empty()) {
    return std::make_shared<const Dataset>(Dataset::load(config.data_dir));
  }
  const int identities = config.overfit ? 1 : config.identities;
  const int frames = config.overfit ? 2 : config.frames;
  return std::make_shared<const Dataset>(
      Dataset::synthetic(config.data_seed, identities, frames, config.resolution));
}

void load_perceptual_weights(PerceptualNet& net, const std::filesystem::path& path) {
  const CheckpointFile file = read_checkpoint(path);
  for (Parameter* p : net.parameters()) {
    copy_into(p->tensor.mutable_data(), file.get(p->name), p->tensor.shape());
  }
}

Trainer::Trainer(TrainConfig config, std::shared_ptr<const Dataset> data)
    : config_(std::move(config)),
      data_(std::move(data)),
      generator_(config_.generator_config()),
      perceptual_(config_.perceptual_seed) {
  config_.validate();
  if (!data_) throw std::invalid_argument("Trainer: no dataset");
  if (data_->resolution() != config_.resolution) {
    throw DataError("dataset resolution " + std::to_string(data_->resolution()) +
                    " differs from configured " + std::to_string(config_.resolution));
  }
  std::mt19937_64 rng(config_.seed ^ 0xd15c0ULL);
  disc_landmark_ = MultiScaleDiscriminator("disc_landmark", 3 + kNumLandmarks, rng);
  disc_identity_ = MultiScaleDiscriminator("disc_identity", 6, rng);
  if (!config_.perceptual_weights.empty()) {
    load_perceptual_weights(perceptual_, config_.perceptual_weights);
  }
}

ParamList Trainer::generator_params() {
  ParamList out;
  generator_.collect(out);
  return out;
}

ParamList Trainer::discriminator_params() {
  ParamList out;
  disc_landmark_.collect(out);
  disc_identity_.collect(out);
  return out;
}

Batch Trainer::batch_for_step(std::int64_t step) const {
  Batch b;
  std::vector<Tensor> sources;
  std::vector<Tensor> drivings;
  auto add_pair = [&](const Frame& s, const Frame& d) {
    sources.push_back(s.image);
    drivings.push_back(d.image);
    b.source_landmarks.push_back(s.landmarks);
    b.driving_landmarks.push_back(d.landmarks);
  };
  if (config_.overfit) {
    add_pair(data_->frame(0, 0), data_->frame(0, 1));
  } else {
    const auto s = static_cast<std::uint64_t>(step);
    std::seed_seq seq{static_cast<std::uint32_t>(config_.data_seed),
                      static_cast<std::uint32_t>(config_.data_seed >> 32),
                      static_cast<std::uint32_t>(config_.seed),
                      static_cast<std::uint32_t>(config_.seed >> 32),
                      static_cast<std::uint32_t>(s),
                      static_cast<std::uint32_t>(s >> 32)};
    std::mt19937_64 rng(seq);
    for (int i = 0; i < config_.batch_size; ++i) {
      const int id = static_cast<int>(rng() % static_cast<std::uint64_t>(data_->identities()));
      const auto frames = static_cast<std::uint64_t>(data_->frames(id));
      const auto a = rng() % frames;
      const auto d = (a + 1 + rng() % (frames - 1)) % frames;
      add_pair(data_->frame(id, static_cast<int>(a)), data_->frame(id, static_cast<int>(d)));
    }
  }
  b.source = stack_batch(sources);
  b.driving = stack_batch(drivings);
  return b;
}

LossReport Trainer::step() {
  const Batch batch = batch_for_step(step_);
  GeneratorInput input{
      batch.source, batch.source_landmarks, batch.driving_landmarks,
      std::vector<bool>(batch.source_landmarks.size(), adapt_for(config_.shape_adaptation, true))};
  const ForwardOptions options;
  GeneratorOutput out = generator_.forward(input, options);
  const Tensor& heat = out.driving_heatmap;

  LossReport report;
  report.step = step_;

  // Discriminator update on a detached fake.
  {
    const Tensor fake = out.image.detach();
    const Tensor d_l = gan_loss(disc_forward_landmark(disc_landmark_, batch.driving, heat, options),
                                disc_forward_landmark(disc_landmark_, fake, heat, options),
                                GanSide::Discriminator);
    const Tensor d_i = gan_loss(
        disc_forward_identity(disc_identity_, batch.source, batch.driving, options),
        disc_forward_identity(disc_identity_, batch.source, fake, options), GanSide::Discriminator);
    require_finite(d_l, "discriminator (landmark)", step_);
    require_finite(d_i, "discriminator (identity)", step_);
    report.d_landmark = d_l.item();
    report.d_identity = d_i.item();
    add(d_l, d_i).backward();
    const Real lr = config_.effective_lr_discriminator();
    adam_step(discriminator_params(), {lr, static_cast<Real>(config_.adam_beta1),
                                       static_cast<Real>(config_.adam_beta2), Real(1e-8)});
  }

  // Generator update with both discriminators frozen.
  {
    const FrozenParams frozen(discriminator_params());
    const Tensor gan =
        add(gan_loss({}, disc_forward_landmark(disc_landmark_, out.image, heat, options),
                     GanSide::Generator),
            gan_loss({}, disc_forward_identity(disc_identity_, batch.source, out.image, options),
                     GanSide::Generator));
    const Tensor content = content_loss(out.image, batch.driving, perceptual_);
    Tensor local = Tensor::scalar(Real(0));
    if (out.locals) {
      std::vector<Tensor> generated;
      for (const LocalReenactment& l : *out.locals) generated.push_back(l.crop);
      local = local_loss(generated,
                         region_targets(batch.driving, out.driving_landmarks, config_.resolution),
                         perceptual_);
    }
    Tensor total = total_loss(gan, content, local, config_.loss_weights());
    require_finite(gan, "adversarial", step_);
    require_finite(content, "content", step_);
    require_finite(local, "local", step_);
    require_finite(total, "total", step_);
    report.gan = gan.item();
    report.content = content.item();
    report.local = local.item();
    report.total = total.item();
    report.pixel_l1 = mean(abs(sub(out.image.detach(), batch.driving))).item();
    total.backward();
  }
  const Real lr = config_.effective_lr_generator();
  adam_step(generator_params(), {lr, static_cast<Real>(config_.adam_beta1),
                                 static_cast<Real>(config_.adam_beta2), Real(1e-8)});
  ++step_;
  return report;
}

CheckpointFile Trainer::checkpoint() {
  CheckpointFile file;
  file.config_text = format_config(config_);
  std::vector<float> state = pack_u64(config_.seed);
  for (float w : pack_u64(config_.data_seed)) state.push_back(w);
  for (float w : pack_u64(static_cast<std::uint64_t>(step_))) state.push_back(w);
  const Shape state_shape = row_shape(state.size());
  file.entries.push_back(entry(kStateEntry, state_shape, std::move(state)));
  for (const Parameter* p : generator_params()) append_param(file, *p, true);
  for (const Parameter* p : discriminator_params()) append_param(file, *p, true);
  for (const Parameter* p : perceptual_.parameters()) append_param(file, *p, false);
  return file;
}

void Trainer::restore(const CheckpointFile& file) {
  const NamedTensor& state = file.get(kStateEntry);
  if (state.values.size() != 12) throw DataError("checkpoint state entry is malformed");
  if (unpack_u64(state.values, 0) != config_.seed ||
      unpack_u64(state.values, 4) != config_.data_seed) {
    throw DataError("checkpoint was trained with different seeds than the current config");
  }
  for (Parameter* p : generator_params()) {
    restore_value(*p, file);
    restore_optimizer(*p, file);
  }
  for (Parameter* p : discriminator_params()) {
    restore_value(*p, file);
    restore_optimizer(*p, file);
  }
  for (Parameter* p : perceptual_.parameters()) restore_value(*p, file);
  step_ = static_cast<std::int64_t>(unpack_u64(state.values, 8));
}

std::int64_t checkpoint_steps(const CheckpointFile& file) {
  const NamedTensor& state = file.get(kStateEntry);
  if (state.values.size() != 12) throw DataError("checkpoint state entry is malformed");
  return static_cast<std::int64_t>(unpack_u64(state.values, 8));
}

LoadedModel load_model(const CheckpointFile& file) {
  LoadedModel model{parse_config(file.config_text, "checkpoint config"), Generator()};
  model.generator = Generator(model.config.generator_config());
  ParamList params;
  model.generator.collect(params);
  for (Parameter* p : params) restore_value(*p, file);
  return model;
}

void run_training(Trainer& trainer, const TrainLoopOptions& options) {
  const TrainConfig& config = trainer.config();
  auto last = std::chrono::steady_clock::now();
  std::int64_t last_step = trainer.steps_done();
  while (trainer.steps_done() < options.until_step) {
    const LossReport report = trainer.step();
    const std::int64_t done = trainer.steps_done();
    if (options.on_log && (done % config.log_every == 0 || done == options.until_step)) {
      const auto now = std::chrono::steady_clock::now();
      const double seconds = std::chrono::duration<double>(now - last).count();
      options.on_log(report, seconds / static_cast<double>(done - last_step));
      last = now;
      last_step = done;
    }
    if (!options.checkpoint_path.empty() &&
        (done % config.checkpoint_every == 0 || done == options.until_step)) {
      write_checkpoint(options.checkpoint_path, trainer.checkpoint());
    }
  }
}

REENACT_NS_END
