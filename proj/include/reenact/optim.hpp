#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "reenact/tensor.hpp"

REENACT_NS_BEGIN

/// A trainable tensor together with its optimizer state.
struct Parameter {
  std::string name;
  Tensor tensor;
  std::vector<Real> adam_m;
  std::vector<Real> adam_v;
  std::int64_t step_count = 0;
  /// Left singular vector estimate, present only for spectrally normalized
  /// convolution weights. Length equals the weight's output channels.
  std::vector<Real> spectral_u;

  Parameter() = default;
  Parameter(std::string name, Tensor value);

  bool spectral() const { return !spectral_u.empty(); }
  /// Enables power iteration state with a random unit start vector.
  void enable_spectral(std::mt19937_64& rng);
};

using ParamList = std::vector<Parameter*>;

struct AdamSettings {
  Real lr = Real(2e-5);
  Real beta1 = Real(0.5);
  Real beta2 = Real(0.999);
  Real eps = Real(1e-8);
};

/// Bias-corrected Adam update. Every parameter must hold a gradient; grads
/// are cleared afterwards.
void adam_step(const ParamList& params, const AdamSettings& settings);

/// Clears the gradient of every parameter.
void zero_grad(const ParamList& params);
/// Toggles requires_grad, used to freeze one network while the other trains.
void set_trainable(const ParamList& params, bool trainable);

struct SpectralOptions {
  int iterations = 1;
  /// When false the stored u is left untouched and iteration runs on a copy.
  bool update = true;
};

/// weight / sigma_max, with sigma_max estimated by power iteration on the
/// weight viewed as (out_c) x (in_c*k*k). The backward pass treats the
/// singular vectors as constants, so d sigma / dW = u v^T.
Tensor spectral_normalize(Parameter& weight, const SpectralOptions& options);

REENACT_NS_END
