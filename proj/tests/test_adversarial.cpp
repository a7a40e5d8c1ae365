#include <doctest.h>

#include <cmath>
#include <random>

#include "reenact/adversarial.hpp"
#include "reenact/generator.hpp"
#include "reenact/ops.hpp"
#include "reenact/synthdata.hpp"
#include "test_util.hpp"

using namespace reenact;
using testing::random_tensor;

namespace {

// Layer-by-layer perceptual distance accumulated in double.
double perceptual_oracle(const Tensor& a, const Tensor& b, PerceptualNet& net) {
  const auto fa = net.features(a);
  const auto fb = net.features(b);
  double total = 0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    double s = 0;
    for (std::size_t k = 0; k < fa[i].numel(); ++k)
      s += std::abs(double(fa[i].data()[k]) - fb[i].data()[k]);
    total += s / static_cast<double>(fa[i].numel());
  }
  return total;
}

double l1_oracle(const Tensor& a, const Tensor& b) { return testing::mean_abs_diff(a, b); }

}  // namespace

TEST_SUITE("gan loss") {
  TEST_CASE("zero logits give 2 log 2 per scale on the discriminator side") {
    const std::vector<Tensor> zeros1{Tensor::zeros({2, 1, 8, 8})};
    const std::vector<Tensor> zeros2{Tensor::zeros({2, 1, 8, 8}), Tensor::zeros({2, 1, 4, 4})};
    CHECK(std::abs(gan_loss(zeros1, zeros1, GanSide::Discriminator).item() - 2 * std::log(2.0)) <
          1e-6);
    CHECK(std::abs(gan_loss(zeros2, zeros2, GanSide::Discriminator).item() - 4 * std::log(2.0)) <
          1e-6);
    CHECK(std::abs(gan_loss({}, zeros2, GanSide::Generator).item() - 2 * std::log(2.0)) < 1e-6);
  }

  TEST_CASE("confident correct logits drive the discriminator loss to zero") {
    const std::vector<Tensor> real{Tensor::full({1, 1, 4, 4}, 30)};
    const std::vector<Tensor> fake{Tensor::full({1, 1, 4, 4}, -30)};
    CHECK(gan_loss(real, fake, GanSide::Discriminator).item() < 1e-6);
  }

  TEST_CASE("generator-side gradient is -sigmoid(-logit) per element") {
    std::mt19937_64 rng(1);
    Tensor logits = random_tensor({1, 1, 3, 3}, rng, -4, 4, true);
    gan_loss({}, {logits}, GanSide::Generator).backward();
    for (std::size_t i = 0; i < logits.numel(); ++i) {
      const double l = logits.data()[i];
      const double expected = -1.0 / (1.0 + std::exp(l)) / 9.0;  // mean over 9 entries
      CHECK(logits.grad()[i] == doctest::Approx(expected).epsilon(1e-5));
    }
  }
}

TEST_SUITE("content and perceptual losses") {
  TEST_CASE("identical inputs give exactly zero") {
    std::mt19937_64 rng(2);
    PerceptualNet net;
    const Tensor a = random_tensor({1, 3, 16, 16}, rng);
    CHECK(perceptual_loss(a, a, net).item() == 0.0f);
    CHECK(content_loss(a, a, net).item() == 0.0f);
    const std::vector<Tensor> crops{a, a, a, a};
    CHECK(local_loss(crops, crops, net).item() == 0.0f);
  }

  TEST_CASE("perceptual loss is symmetric and matches the per-layer oracle") {
    std::mt19937_64 rng(3);
    PerceptualNet net;
    const Tensor a = random_tensor({2, 3, 16, 16}, rng);
    const Tensor b = random_tensor({2, 3, 16, 16}, rng);
    const double ab = perceptual_loss(a, b, net).item();
    CHECK(ab == perceptual_loss(b, a, net).item());
    CHECK(std::abs(ab - perceptual_oracle(a, b, net)) < 1e-6);
  }

  TEST_CASE("content loss is pixel L1 plus perceptual, and plain L1 with no taps") {
    std::mt19937_64 rng(4);
    PerceptualNet net;
    PerceptualNet empty(PerceptualNet::kDefaultSeed, {});
    const Tensor a = random_tensor({1, 3, 16, 16}, rng);
    const Tensor b = random_tensor({1, 3, 16, 16}, rng);
    CHECK(std::abs(content_loss(a, b, empty).item() - l1_oracle(a, b)) < 1e-6);
    CHECK(std::abs(content_loss(a, b, net).item() -
                   (l1_oracle(a, b) + perceptual_oracle(a, b, net))) < 1e-6);
  }

  TEST_CASE("local loss sums the region terms") {
    std::mt19937_64 rng(5);
    PerceptualNet net;
    std::vector<Tensor> gen, tgt;
    for (int r = 0; r < 4; ++r) {
      const Shape s{1, 3, 16, r == 3 ? 24 : 16};
      gen.push_back(random_tensor(s, rng));
      tgt.push_back(random_tensor(s, rng));
    }
    double oracle = 0;
    for (int r = 0; r < 4; ++r) oracle += perceptual_oracle(gen[r], tgt[r], net);
    CHECK(std::abs(local_loss(gen, tgt, net).item() - oracle) < 1e-5);

    // Only one region differs: the loss is that region's term alone.
    std::vector<Tensor> same = tgt;
    same[2] = gen[2];
    CHECK(std::abs(local_loss(same, tgt, net).item() -
                   perceptual_loss(gen[2], tgt[2], net).item()) < 1e-6);
  }

  TEST_CASE("the feature net is fixed, seeded and never trainable") {
    std::mt19937_64 rng(6);
    PerceptualNet a, b;
    PerceptualNet c(123);
    const Tensor x = random_tensor({1, 3, 16, 16}, rng);
    const auto fa = a.features(x), fb = b.features(x), fc = c.features(x);
    REQUIRE(fa.size() == 5);
    for (std::size_t i = 0; i < fa.size(); ++i) CHECK(testing::bit_equal(fa[i], fb[i]));
    CHECK_FALSE(testing::bit_equal(fa[0], fc[0]));
    for (const Parameter* p : a.parameters()) CHECK_FALSE(p->tensor.requires_grad());
  }
}

TEST_SUITE("total loss") {
  TEST_CASE("unit terms with the default weights give 20") {
    const Tensor one = Tensor::scalar(1);
    CHECK(total_loss(one, one, one, LossWeights{}).item() == 20.0f);
    const LossWeights w{};
    CHECK(w.lambda_gan == 10);
    CHECK(w.lambda_c == 5);
    CHECK(w.lambda_local == 5);
  }

  TEST_CASE("zero weights give zero and each term enters linearly") {
    const Tensor g = Tensor::scalar(0.7f), c = Tensor::scalar(1.3f), l = Tensor::scalar(2.1f);
    CHECK(total_loss(g, c, l, LossWeights{0, 0, 0}).item() == 0.0f);
    const double base = total_loss(g, c, l, LossWeights{}).item();
    CHECK(total_loss(Tensor::scalar(1.7f), c, l, LossWeights{}).item() ==
          doctest::Approx(base + 10));
    CHECK(total_loss(g, Tensor::scalar(2.3f), l, LossWeights{}).item() ==
          doctest::Approx(base + 5));
    CHECK(total_loss(g, c, Tensor::scalar(3.1f), LossWeights{}).item() ==
          doctest::Approx(base + 5));
  }
}

TEST_CASE("discriminator and generator updates do not leak gradients into each other") {
  Generator g(GeneratorConfig{});
  std::mt19937_64 rng(7);
  MultiScaleDiscriminator d("disc_identity", 6, rng);
  ParamList gp, dp;
  g.collect(gp);
  d.collect(dp);
  const std::uint64_t id = identity_seed(8, 0);
  const auto [src, drv] = sample_pair(id, 1);
  const GeneratorInput in{src.image, {src.landmarks}, {drv.landmarks}, {false}};
  const ForwardOptions options;

  // Discriminator step on a detached fake.
  const GeneratorOutput out = g.forward(in, options);
  gan_loss(disc_forward_identity(d, src.image, drv.image, options),
           disc_forward_identity(d, src.image, out.image.detach(), options), GanSide::Discriminator)
      .backward();
  for (const Parameter* p : gp) CHECK_FALSE(p->tensor.has_grad());
  int d_reached = 0;
  for (const Parameter* p : dp) d_reached += p->tensor.has_grad();
  CHECK(d_reached == static_cast<int>(dp.size()));
  zero_grad(dp);

  // Generator step with the discriminator frozen.
  set_trainable(dp, false);
  gan_loss({}, disc_forward_identity(d, src.image, out.image, options), GanSide::Generator)
      .backward();
  set_trainable(dp, true);
  for (const Parameter* p : dp) CHECK_FALSE(p->tensor.has_grad());
  int g_reached = 0;
  for (const Parameter* p : gp) g_reached += p->tensor.has_grad();
  CHECK(g_reached > 0);
}
