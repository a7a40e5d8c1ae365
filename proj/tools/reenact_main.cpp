// Command-line front end: synthetic data, training, reenactment, evaluation.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical abort.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "reenact/checkpoint.hpp"
#include "reenact/config.hpp"
#include "reenact/dataset.hpp"
#include "reenact/errors.hpp"
#include "reenact/evaluate.hpp"
#include "reenact/image_io.hpp"
#include "reenact/trainer.hpp"

namespace fs = std::filesystem;
using namespace reenact;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct SynthArgs {
  fs::path out;
  int identities = 0;
  int frames = 0;
  std::uint64_t seed = 0;
  int resolution = 64;
};

struct EvalSetArgs {
  fs::path out;
  int self_pairs = 50;
  int cross_pairs = 50;
  std::uint64_t seed = 0xe7a1ULL;
  int resolution = 64;
};

struct TrainArgs {
  fs::path config;
  fs::path out;
  fs::path resume;
  bool overfit = false;
};

struct ReenactArgs {
  fs::path ckpt;
  fs::path source;
  fs::path source_lm;
  fs::path driving_lm;
  fs::path out;
  bool same_identity = false;
};

struct EvalArgs {
  fs::path ckpt;
  fs::path manifest;
  fs::path id_vectors;
  fs::path poses;
  fs::path aus;
  fs::path report;
};

int run_synth(const SynthArgs& a) {
  if (a.identities < 1 || a.frames < 2)
    throw UsageError("need --identities >= 1 and --frames >= 2");
  if (a.resolution < 16 || a.resolution % 16 != 0) {
    throw UsageError("--resolution must be a positive multiple of 16");
  }
  write_synthetic_dataset(a.out, a.seed, a.identities, a.frames, a.resolution);
  std::cout << "wrote " << a.identities << " identities x " << a.frames << " frames to "
            << a.out.string() << "\n";
  return kOk;
}

int run_eval_set(const EvalSetArgs& a) {
  if (a.self_pairs < 0 || a.cross_pairs < 0 || a.self_pairs + a.cross_pairs == 0) {
    throw UsageError("need a positive number of pairs");
  }
  write_eval_set(a.out, a.seed, a.self_pairs, a.cross_pairs, a.resolution);
  std::cout << "wrote " << a.self_pairs << " self and " << a.cross_pairs << " cross pairs to "
            << (a.out / "manifest.txt").string() << "\n";
  return kOk;
}

int run_train(const TrainArgs& a) {
  TrainConfig config = read_config(a.config);
  if (a.overfit) config.overfit = true;
  Trainer trainer(config, dataset_for(config));
  if (!a.resume.empty()) {
    trainer.restore(read_checkpoint(a.resume));
    std::cout << "resumed at step " << trainer.steps_done() << "\n";
  }
  TrainLoopOptions loop;
  loop.until_step = config.steps;
  loop.checkpoint_path = a.out;
  loop.on_log = [](const LossReport& r, double sec) {
    std::printf(
        "step %7lld  d_lm %.4f  d_id %.4f  gan %.4f  content %.4f  local %.4f  total %.4f  "
        "l1 %.4f  (%.3f s/step)\n",
        static_cast<long long>(r.step + 1), r.d_landmark, r.d_identity, r.gan, r.content, r.local,
        r.total, r.pixel_l1, sec);
    std::fflush(stdout);
  };
  run_training(trainer, loop);
  if (trainer.steps_done() == config.steps && config.steps == 0) {
    write_checkpoint(a.out, trainer.checkpoint());
  }
  std::cout << "checkpoint written to " << a.out.string() << "\n";
  return kOk;
}

int run_reenact(const ReenactArgs& a) {
  LoadedModel model = load_model(read_checkpoint(a.ckpt));
  const Tensor source = read_png(a.source);
  const Tensor output =
      reenact_image(model.generator, model.config.shape_adaptation, source,
                    read_landmarks(a.source_lm), read_landmarks(a.driving_lm), a.same_identity);
  write_png(a.out, output);
  return kOk;
}

int run_eval(const EvalArgs& a) {
  LoadedModel model = load_model(read_checkpoint(a.ckpt));
  const std::vector<EvalPair> pairs = read_manifest(a.manifest);
  MetricInputs metrics;
  if (!a.id_vectors.empty()) read_identity_vectors(a.id_vectors, metrics);
  if (!a.poses.empty()) read_poses(a.poses, metrics);
  if (!a.aus.empty()) read_action_units(a.aus, metrics);
  const EvalSummary summary =
      evaluate(model.generator, model.config.shape_adaptation, pairs, metrics);
  const std::string table = format_table(summary);
  std::cout << table;
  std::ofstream report(a.report);
  report << table;
  fs::path record = a.report;
  record += ".json";
  std::ofstream json(record);
  json << format_record(summary);
  if (!report || !json) throw DataError("cannot write report " + a.report.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  flush_denormals();
  CLI::App app{"One-shot face reenactment on synthetic faces"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth-data", "Render a synthetic identity/frame dataset");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--identities", synth.identities, "Number of identities")->required();
  s->add_option("--frames", synth.frames, "Frames per identity")->required();
  s->add_option("--seed", synth.seed, "Dataset seed")->required();
  s->add_option("--resolution", synth.resolution, "Image size in pixels");

  EvalSetArgs evalset;
  auto* e = app.add_subcommand("make-eval-set", "Render held-out evaluation pairs and a manifest");
  e->add_option("--out", evalset.out, "Output directory")->required();
  e->add_option("--self", evalset.self_pairs, "Same-identity pairs");
  e->add_option("--cross", evalset.cross_pairs, "Cross-identity pairs");
  e->add_option("--seed", evalset.seed, "Held-out identity seed");
  e->add_option("--resolution", evalset.resolution, "Image size in pixels");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the generator and discriminators");
  t->add_option("--config", train.config, "key = value config file")->required();
  t->add_option("--out", train.out, "Checkpoint path (written periodically)")->required();
  t->add_option("--resume", train.resume, "Checkpoint to resume from");
  t->add_flag("--overfit", train.overfit, "Single-pair overfit harness");

  ReenactArgs reenact;
  auto* r = app.add_subcommand("reenact", "Reenact a source image with driving landmarks");
  r->add_option("--ckpt", reenact.ckpt, "Checkpoint")->required();
  r->add_option("--source", reenact.source, "Source PNG")->required();
  r->add_option("--source-lm", reenact.source_lm, "Source landmarks")->required();
  r->add_option("--driving-lm", reenact.driving_lm, "Driving landmarks")->required();
  r->add_option("--out", reenact.out, "Output PNG")->required();
  r->add_flag("--same-identity", reenact.same_identity,
              "Driving landmarks come from the source identity");

  EvalArgs eval;
  auto* v = app.add_subcommand("eval", "Evaluate a checkpoint on a pair manifest");
  v->add_option("--ckpt", eval.ckpt, "Checkpoint")->required();
  v->add_option("--manifest", eval.manifest, "Pair manifest")->required();
  v->add_option("--id-vectors", eval.id_vectors, "Identity vector pairs");
  v->add_option("--poses", eval.poses, "Head pose angle pairs");
  v->add_option("--aus", eval.aus, "Action-unit activation pairs");
  v->add_option("--report", eval.report, "Report path (table; record at PATH.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kUsage;
  }

  try {
    if (*s) return run_synth(synth);
    if (*e) return run_eval_set(evalset);
    if (*t) return run_train(train);
    if (*r) return run_reenact(reenact);
    if (*v) return run_eval(eval);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const NumericalError& err) {
    std::cerr << "numerical abort: " << err.what() << "\n";
    return kNumerical;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kData;
  }
  return kUsage;
}
