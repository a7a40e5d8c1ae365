// Acceptance runner: one PASS/FAIL line per criterion. Long criteria read
// checkpoints produced by `reenact train` with runs/full.cfg and
// runs/ablation.cfg; a missing or unfinished checkpoint is a FAIL.

#include <CLI11.hpp>
#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "gradient_suite.hpp"
#include "reenact/adversarial.hpp"
#include "reenact/checkpoint.hpp"
#include "reenact/errors.hpp"
#include "reenact/evaluate.hpp"
#include "reenact/flow.hpp"
#include "reenact/geometry.hpp"
#include "reenact/image_io.hpp"
#include "reenact/metrics.hpp"
#include "reenact/ops.hpp"
#include "reenact/optim.hpp"
#include "reenact/trainer.hpp"

namespace fs = std::filesystem;
using namespace reenact;

namespace {

// Pinned thresholds.
constexpr double kGradTolerance = 1e-3;
constexpr int kGradProbes = 20;
constexpr double kGradBudgetSeconds = 300;
constexpr double kNormMeanTol = 1e-5;
constexpr double kNormStdTol = 1e-4;
constexpr double kAffineTol = 1e-6;
constexpr double kWarpTol = 1e-6;
constexpr double kSimilarityTol = 1e-4;
constexpr double kSigmaLo = 0.99, kSigmaHi = 1.01;
constexpr double kHeatmapTol = 1e-6;
constexpr double kTotalRelTol = 1e-6;
constexpr double kGanZeroTol = 1e-6;
constexpr int kOverfitSteps = 500;
constexpr double kOverfitL1 = 0.05;
constexpr double kOverfitBudgetSeconds = 600;
constexpr int kToySteps = 20000;
constexpr int kToyIdentities = 200;
constexpr int kToyFrames = 8;
constexpr double kToyLrG = 2e-5, kToyLrD = 1e-5;
constexpr double kWinFraction = 0.8;
constexpr double kToyBudgetSeconds = 6 * 3600;
constexpr int kHeldOutSelf = 50;
constexpr int kSwapPairs = 20;
constexpr double kSwapChange = 0.02;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<Real> v(shape.numel());
  for (Real& x : v) x = static_cast<Real>(dist(rng));
  return Tensor::from(shape, std::move(v));
}

double mean_abs_diff(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += std::abs(double(a.data()[i]) - b.data()[i]);
  return s / static_cast<double>(a.numel());
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(double(a.data()[i]) - b.data()[i]));
  return m;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

// ---------------------------------------------------------------------------

Verdict gradients() {
  gradcheck::prepare();
  const auto t0 = std::chrono::steady_clock::now();
  int failed = 0, total = 0, min_probes = 1 << 30;
  double worst = 0;
  std::string worst_name, first_failure;
  for (const std::string& name : gradcheck::case_names()) {
    const gradcheck::Result r = gradcheck::run_case(name);
    ++total;
    min_probes = std::min(min_probes, r.significant);
    if (r.max_rel_error > worst) worst = r.max_rel_error, worst_name = name;
    if (!(r.max_rel_error < kGradTolerance) || r.significant < kGradProbes) {
      if (failed++ == 0) first_failure = name;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = failed == 0 && secs < kGradBudgetSeconds;
  std::string d = fmt("%d/%d checks pass, worst rel err %.2e (%s), min probes %d, %.1f s",
                      total - failed, total, worst, worst_name.c_str(), min_probes, secs);
  if (failed) d += ", first failure " + first_failure;
  return {pass, d};
}

Verdict normalization() {
  std::mt19937_64 rng(20);
  double worst_mean = 0, worst_std = 0, worst_affine = 0;
  bool reduction_exact = true;
  for (const Shape s : {Shape{2, 3, 8, 8}, Shape{1, 16, 4, 4}, Shape{4, 8, 16, 16}}) {
    const Tensor x = random_tensor(s, rng, -3, 7);
    const ChannelStats stats = channel_stats(x);
    const Shape ms{1, s.c, s.h, s.w};
    const Tensor y = adaptive_denormalize(x, stats, Tensor::full(ms, 1), Tensor::zeros(ms));
    // Double-precision statistics of the output, pooled over batch and space.
    const std::size_t plane = s.plane();
    for (int c = 0; c < s.c; ++c) {
      double m = 0, v = 0;
      for (int n = 0; n < s.n; ++n)
        for (std::size_t i = 0; i < plane; ++i) m += y.data()[(n * s.c + c) * plane + i];
      m /= static_cast<double>(s.n * plane);
      for (int n = 0; n < s.n; ++n)
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = y.data()[(n * s.c + c) * plane + i] - m;
          v += d * d;
        }
      v /= static_cast<double>(s.n * plane);
      worst_mean = std::max(worst_mean, std::abs(m));
      worst_std = std::max(worst_std, std::abs(std::sqrt(v) - 1));
      // Unit gamma and zero beta reduce to (x - mean) / std exactly.
      const Real inv = Real(1) / stats.std.data()[c];
      for (int n = 0; n < s.n; ++n)
        for (std::size_t i = 0; i < plane; ++i) {
          const std::size_t e = (n * s.c + c) * plane + i;
          if (y.data()[e] != (x.data()[e] - stats.mean.data()[c]) * inv) reduction_exact = false;
        }
    }
    // Affine in beta with slope 1, in gamma with slope the normalized input.
    const Tensor gamma = random_tensor(s, rng, 0.5, 1.5);
    const Tensor beta = random_tensor(s, rng, -1, 1);
    const Tensor delta = random_tensor(s, rng, -1, 1);
    const Tensor base = adaptive_denormalize(x, stats, gamma, beta);
    const Tensor shifted = adaptive_denormalize(x, stats, gamma, add(beta, delta));
    const Tensor stretched = adaptive_denormalize(x, stats, add(gamma, delta), beta);
    for (std::size_t i = 0; i < x.numel(); ++i) {
      worst_affine = std::max(
          worst_affine, std::abs((shifted.data()[i] - base.data()[i]) - double(delta.data()[i])));
      worst_affine = std::max(worst_affine, std::abs((stretched.data()[i] - base.data()[i]) -
                                                     double(delta.data()[i]) * y.data()[i]));
    }
  }
  const bool pass = worst_mean < kNormMeanTol && worst_std < kNormStdTol && reduction_exact &&
                    worst_affine < kAffineTol;
  return {pass, fmt("max |mean| %.2e, max |std-1| %.2e, unit/zero reduction %s, affine err %.2e",
                    worst_mean, worst_std, reduction_exact ? "exact" : "inexact", worst_affine)};
}

double largest_singular_value(const Tensor& w) {
  const Shape s = w.shape();
  const int cols = static_cast<int>(s.numel() / s.n);
  Eigen::MatrixXd m(s.n, cols);
  for (int r = 0; r < s.n; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = w.data()[static_cast<std::size_t>(r) * cols + c];
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

Verdict structural() {
  std::mt19937_64 rng(30);
  bool shuffle_exact = true;
  for (int r : {2, 3}) {
    const Tensor x = random_tensor({2, 2 * r * r, 5, 4}, rng, -1, 1);
    const Tensor z = random_tensor({1, 3, 4 * r, 2 * r}, rng, -1, 1);
    shuffle_exact = shuffle_exact && bit_equal(pixel_unshuffle(pixel_shuffle(x, r), r), x) &&
                    bit_equal(pixel_shuffle(pixel_unshuffle(z, r), r), z);
  }

  double warp_err = 0;
  for (const Shape s : {Shape{1, 4, 32, 32}, Shape{2, 8, 16, 16}}) {
    const Tensor f = random_tensor(s, rng, -1, 1);
    warp_err = std::max(warp_err, max_abs_diff(warp_feature(f, Tensor::zeros({s.n, 2, 8, 8})), f));
    warp_err =
        std::max(warp_err, max_abs_diff(warp_feature(f, Tensor::zeros({s.n, 2, s.h, s.w})), f));
  }

  double sim_err = 0;
  std::uniform_real_distribution<double> u(-10, 10), sc(0.5, 2.0), th(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point> src(kNumLandmarks), dst;
    for (Point& p : src) p = {u(rng) * 3, u(rng) * 3};
    const SimilarityTransform truth{sc(rng), th(rng), u(rng), u(rng)};
    for (const Point& p : src) dst.push_back(truth.apply(p));
    const SimilarityTransform t = estimate_similarity(src, dst);
    double dth = std::remainder(t.rotation - truth.rotation, 2 * std::numbers::pi);
    sim_err = std::max({sim_err, std::abs(t.scale - truth.scale), std::abs(dth),
                        std::abs(t.tx - truth.tx), std::abs(t.ty - truth.ty)});
  }

  double sigma_lo = 1e9, sigma_hi = -1e9;
  for (const Shape s : {Shape{64, 64, 1, 1}, Shape{64, 32, 1, 1}, Shape{32, 64, 1, 1}}) {
    Parameter w("w", random_tensor(s, rng, -1, 1));
    w.enable_spectral(rng);
    const double sigma = largest_singular_value(spectral_normalize(w, SpectralOptions{50, true}));
    sigma_lo = std::min(sigma_lo, sigma);
    sigma_hi = std::max(sigma_hi, sigma);
  }

  // (7 - sqrt 2, 5) to pixel (7, 7): squared distance 2 + 4 = 6 at variance 3.
  const std::vector<Point> pts{{7.0 - std::sqrt(2.0), 5.0}, {3.0, 4.0}};
  const Tensor h = rasterize_heatmaps(pts, 12, 12, 3.0);
  const double peak = h.at(0, 1, 4, 3);
  const double tail = h.at(0, 0, 7, 7);
  const bool heat_ok = peak == 1.0 && std::abs(tail - std::exp(-1.0)) < kHeatmapTol;

  const bool pass = shuffle_exact && warp_err < kWarpTol && sim_err < kSimilarityTol &&
                    sigma_lo >= kSigmaLo && sigma_hi <= kSigmaHi && heat_ok;
  return {pass, fmt("shuffle round trip %s, zero-flow warp err %.1e, similarity err %.1e, "
                    "sigma in [%.4f, %.4f], heatmap peak %.6f tail %.6f",
                    shuffle_exact ? "exact" : "inexact", warp_err, sim_err, sigma_lo, sigma_hi,
                    peak, tail)};
}

TrainConfig small_config() {
  TrainConfig c;
  c.resolution = 32;
  c.identities = 3;
  c.frames = 2;
  c.batch_size = 1;
  c.steps = 10;
  return c;
}

Verdict loss_wiring() {
  Trainer t(small_config(), dataset_for(small_config()));
  const LossWeights w = t.config().loss_weights();
  double worst_total = 0;
  for (int i = 0; i < 5; ++i) {
    const LossReport r = t.step();
    const double expected = 10 * r.gan + 5 * r.content + 5 * r.local;
    worst_total = std::max(worst_total, std::abs(r.total - expected) / std::abs(expected));
  }
  const bool weights_ok = w.lambda_gan == 10 && w.lambda_c == 5 && w.lambda_local == 5;

  double worst_gan = 0;
  for (int scales = 1; scales <= 3; ++scales) {
    std::vector<Tensor> zeros;
    for (int k = 0; k < scales; ++k) zeros.push_back(Tensor::zeros({2, 1, 8 >> k, 8 >> k}));
    const double d = gan_loss(zeros, zeros, GanSide::Discriminator).item();
    worst_gan = std::max(worst_gan, std::abs(d - scales * 2 * std::log(2.0)));
  }

  std::mt19937_64 rng(40);
  const Tensor a = random_tensor({2, 3, 32, 32}, rng, -1, 1);
  std::vector<Tensor> crops;
  for (int r = 0; r < 4; ++r)
    crops.push_back(random_tensor({2, 3, 16, r == 3 ? 24 : 16}, rng, -1, 1));
  PerceptualNet& net = t.perceptual();
  const bool zero_exact = content_loss(a, a, net).item() == 0 &&
                          perceptual_loss(a, a, net).item() == 0 &&
                          local_loss(crops, crops, net).item() == 0;

  const bool pass =
      weights_ok && worst_total <= kTotalRelTol && worst_gan < kGanZeroTol && zero_exact;
  return {pass, fmt("weights %s, total rel err %.1e over 5 steps, zero-logit err %.1e, "
                    "a=b losses %s",
                    weights_ok ? "10/5/5" : "wrong", worst_total, worst_gan,
                    zero_exact ? "exactly 0" : "nonzero")};
}

Verdict overfit() {
  TrainConfig c;
  c.overfit = true;
  c.resolution = 64;
  c.steps = kOverfitSteps;
  const auto t0 = std::chrono::steady_clock::now();
  Trainer t(c, dataset_for(c));
  for (int i = 0; i < kOverfitSteps; ++i) t.step();
  const double secs = seconds_since(t0);
  const Batch b = t.batch_for_step(0);
  const Tensor out = reenact_image(t.generator(), c.shape_adaptation, b.source,
                                   b.source_landmarks[0], b.driving_landmarks[0], true);
  const double l1 = mean_abs_diff(out, b.driving);
  const double copy = mean_abs_diff(b.source, b.driving);
  const bool pass = l1 < kOverfitL1 && secs < kOverfitBudgetSeconds;
  return {pass,
          fmt("L1 %.4f after %d steps (copy-source %.4f), %.0f s", l1, kOverfitSteps, copy, secs)};
}

// Sum of interval durations logged by `reenact train`.
double logged_training_seconds(const fs::path& log) {
  std::ifstream in(log);
  const std::regex line(R"(^step\s+(\d+).*\(([0-9.]+) s/step\))");
  double total = 0;
  long long previous = 0;
  for (std::string s; std::getline(in, s);) {
    std::smatch m;
    if (!std::regex_search(s, m, line)) continue;
    const long long step = std::stoll(m[1]);
    if (step <= previous) previous = 0;  // a fresh run restarted the log
    total += static_cast<double>(step - previous) * std::stod(m[2]);
    previous = step;
  }
  return total;
}

struct ToyModel {
  std::string problem;
  LoadedModel model;
};

ToyModel load_toy(const fs::path& ckpt, bool want_local) {
  ToyModel out{{}, {TrainConfig{}, Generator()}};
  if (!fs::exists(ckpt)) {
    out.problem = ckpt.string() + " not found";
    return out;
  }
  const CheckpointFile file = read_checkpoint(ckpt);
  out.model = load_model(file);
  const TrainConfig& c = out.model.config;
  const std::int64_t steps = checkpoint_steps(file);
  if (steps < kToySteps) {
    out.problem = fmt("%s has %lld of %d steps", ckpt.string().c_str(),
                      static_cast<long long>(steps), kToySteps);
  } else if (c.identities != kToyIdentities || c.frames != kToyFrames || c.overfit ||
             c.lr_generator != kToyLrG || c.lr_discriminator != kToyLrD ||
             c.use_local_net != want_local) {
    out.problem = ckpt.string() + " was trained with a different configuration";
  }
  return out;
}

std::vector<EvalPair> pairs_of(const std::vector<EvalPair>& all, PairKind kind) {
  std::vector<EvalPair> out;
  for (const EvalPair& p : all)
    if (p.kind == kind) out.push_back(p);
  return out;
}

Verdict toy_convergence(const fs::path& ckpt, const fs::path& log,
                        const std::vector<EvalPair>& manifest, EvalSummary* summary_out) {
  ToyModel toy = load_toy(ckpt, true);
  if (!toy.problem.empty()) return {false, toy.problem};
  const std::vector<EvalPair> self = pairs_of(manifest, PairKind::Self);
  if (self.size() != kHeldOutSelf) return {false, fmt("%zu held-out self pairs", self.size())};
  const EvalSummary s = evaluate(toy.model.generator, toy.model.config.shape_adaptation, self, {});
  *summary_out = s;
  const double secs = logged_training_seconds(log);
  const bool pass = s.win_fraction >= kWinFraction && s.mean_model_l1 < s.mean_baseline_l1 &&
                    secs > 0 && secs <= kToyBudgetSeconds;
  return {pass, fmt("model beats copy-source on %.0f%% of %d pairs, mean L1 %.4f vs %.4f, "
                    "training %.2f h",
                    100 * s.win_fraction, s.self_pairs, s.mean_model_l1, s.mean_baseline_l1,
                    secs / 3600)};
}

Verdict disentanglement(const fs::path& ckpt, const std::vector<EvalPair>& manifest) {
  ToyModel toy = load_toy(ckpt, true);
  if (!toy.problem.empty()) return {false, toy.problem};
  std::vector<EvalPair> cross = pairs_of(manifest, PairKind::Cross);
  if (cross.size() < kSwapPairs) return {false, fmt("%zu cross pairs", cross.size())};
  cross.resize(kSwapPairs);
  std::vector<Tensor> src;
  std::vector<LandmarkSet> src_lm, drv_lm;
  for (const EvalPair& p : cross) {
    src.push_back(read_png(p.source_image));
    src_lm.push_back(read_landmarks(p.source_landmarks));
    drv_lm.push_back(read_landmarks(p.driving_landmarks));
  }
  Generator& g = toy.model.generator;
  const ShapeAdaptation mode = toy.model.config.shape_adaptation;
  auto run = [&](int s, int d) {
    return reenact_image(g, mode, src[s], src_lm[s], drv_lm[d], false);
  };
  double drv_sum = 0, src_sum = 0, drv_min = 1e9, src_min = 1e9;
  for (int i = 0; i < kSwapPairs; ++i) {
    const int j = (i + 1) % kSwapPairs;
    const Tensor base = run(i, i);
    const double dd = mean_abs_diff(base, run(i, j));
    const double ds = mean_abs_diff(base, run(j, i));
    drv_sum += dd, src_sum += ds;
    drv_min = std::min(drv_min, dd);
    src_min = std::min(src_min, ds);
  }
  const double drv_mean = drv_sum / kSwapPairs, src_mean = src_sum / kSwapPairs;
  const bool pass = drv_mean > kSwapChange && src_mean > kSwapChange;
  return {pass, fmt("driving swap changes output by %.4f (min %.4f), source swap by %.4f "
                    "(min %.4f) over %d pairs",
                    drv_mean, drv_min, src_mean, src_min, kSwapPairs)};
}

Verdict ablation(const fs::path& ckpt, const std::vector<EvalPair>& manifest,
                 const EvalSummary& full) {
  if (full.self_pairs == 0) return {false, "full model result unavailable"};
  ToyModel toy = load_toy(ckpt, false);
  if (!toy.problem.empty()) return {false, toy.problem};
  const EvalSummary s = evaluate(toy.model.generator, toy.model.config.shape_adaptation,
                                 pairs_of(manifest, PairKind::Self), {});
  const bool pass = s.mean_model_l1 > full.mean_model_l1;
  return {pass, fmt("held-out mean L1 without local nets %.4f vs full %.4f", s.mean_model_l1,
                    full.mean_model_l1)};
}

Verdict metrics_and_resume() {
  const std::vector<double> a{1, 2, 2}, b{2, 1, 2};
  const std::vector<int> au1{1, 0, 1, 1}, au2{1, 0, 0, 1}, au3{0, 1, 0, 0};
  const bool metrics_ok = csim(a, b) == 8.0 / 9.0 && csim(a, a) == 1.0 &&
                          prmse({10, 20, 30}, {10, 20, 30}) == 0.0 &&
                          prmse({3, 0, 0}, {0, 0, 0}) == std::sqrt(3.0) && aucon(au1, au1) == 1.0 &&
                          aucon(au1, au3) == 0.0 && aucon(au1, au2) == 0.75;

  const TrainConfig config = small_config();
  const auto data = dataset_for(config);
  Trainer straight(config, data);
  std::vector<LossReport> reference;
  for (int i = 0; i < 10; ++i) reference.push_back(straight.step());
  Trainer first(config, data);
  for (int i = 0; i < 5; ++i) first.step();
  const std::string half = serialize_checkpoint(first.checkpoint());
  Trainer resumed(config, data);
  resumed.restore(deserialize_checkpoint(half, "half"));
  bool reports_equal = true;
  for (int i = 5; i < 10; ++i) {
    const LossReport r = resumed.step();
    const LossReport& e = reference[i];
    reports_equal = reports_equal && r.total == e.total && r.gan == e.gan &&
                    r.content == e.content && r.local == e.local && r.d_landmark == e.d_landmark &&
                    r.d_identity == e.d_identity;
  }
  const bool bytes_equal =
      serialize_checkpoint(resumed.checkpoint()) == serialize_checkpoint(straight.checkpoint());
  const bool pass = metrics_ok && reports_equal && bytes_equal;
  return {pass, fmt("metric examples %s, resumed losses %s, final checkpoint bytes %s",
                    metrics_ok ? "exact" : "inexact", reports_equal ? "identical" : "differ",
                    bytes_equal ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  flush_denormals();
  CLI::App app{"Acceptance criteria"};
  fs::path root = REENACT_SOURCE_DIR;
  fs::path full = root / "runs/full.ckpt";
  fs::path full_log = root / "runs/full.log";
  fs::path ablated = root / "runs/ablation.ckpt";
  fs::path manifest_path = root / "data/eval/manifest.txt";
  std::vector<int> only;
  app.add_option("--full", full, "Full-model checkpoint");
  app.add_option("--full-log", full_log, "Training log of the full model");
  app.add_option("--ablation", ablated, "Checkpoint trained without local nets");
  app.add_option("--manifest", manifest_path, "Held-out pair manifest");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  std::vector<EvalPair> manifest;
  std::string manifest_problem;
  try {
    manifest = read_manifest(manifest_path);
  } catch (const std::exception& e) {
    manifest_problem = e.what();
  }
  EvalSummary full_summary;

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient checks", gradients},
      {"adaptive normalization", normalization},
      {"structural invariants", structural},
      {"loss wiring", loss_wiring},
      {"single-pair overfit", overfit},
      {"toy convergence", [&] { return toy_convergence(full, full_log, manifest, &full_summary); }},
      {"appearance/pose disentanglement", [&] { return disentanglement(full, manifest); }},
      {"local-net ablation",
       [&] {
         if (full_summary.self_pairs == 0 && manifest_problem.empty()) {
           ToyModel toy = load_toy(full, true);
           if (toy.problem.empty()) {
             full_summary = evaluate(toy.model.generator, toy.model.config.shape_adaptation,
                                     pairs_of(manifest, PairKind::Self), {});
           }
         }
         return ablation(ablated, manifest, full_summary);
       }},
      {"metrics and resume", metrics_and_resume},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Verdict v;
    if (id >= 6 && id <= 8 && !manifest_problem.empty()) {
      v = {false, manifest_problem};
    } else {
      try {
        v = criteria[i].second();
      } catch (const std::exception& e) {
        v = {false, std::string("error: ") + e.what()};
      }
    }
    failures += !v.pass;
    std::printf("criterion %d %s  %-32s %s\n", id, v.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
