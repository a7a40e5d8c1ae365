#pragma once

#include <random>
#include <string>

#include "reenact/optim.hpp"

REENACT_NS_BEGIN

/// Options threaded through every network forward pass.
struct ForwardOptions {
  SpectralOptions spectral;
};

/// 3x3 (or k x k) convolution with bias. Generator layers read their weight
/// through spectral_normalize; discriminator and feature-net layers do not.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_c, int out_c, int k, int stride, int padding, bool spectral,
         std::mt19937_64& rng, Real init_gain = Real(1));

  Tensor forward(const Tensor& x, const ForwardOptions& options);
  void collect(ParamList& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  Parameter weight;
  Parameter bias;
  int stride = 1;
  int padding = 0;
  bool spectral = false;
};

/// Spectrally normalized conv followed by a learnable scalar gain and a
/// per-channel offset. The gain lets a head start at (or near) a constant
/// output even though its normalized weight has unit spectral norm.
class GainHead {
 public:
  GainHead() = default;
  GainHead(std::string name, int in_c, int out_c, Real initial_gain, Real initial_offset,
           std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const ForwardOptions& options);
  void collect(ParamList& out);

  Conv2d conv;
  Parameter gain;    // (1, 1, 1, 1)
  Parameter offset;  // (1, out_c, 1, 1)
};

/// He-normal initialisation for a (out_c, in_c, k, k) weight.
Tensor he_normal(Shape shape, std::mt19937_64& rng, Real gain = Real(1));

REENACT_NS_END
