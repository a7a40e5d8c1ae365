#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reenact/generator.hpp"

REENACT_NS_BEGIN

enum class PairKind { Self, Cross };

struct EvalPair {
  PairKind kind = PairKind::Self;
  std::filesystem::path source_image;
  std::filesystem::path source_landmarks;
  std::filesystem::path driving_image;
  std::filesystem::path driving_landmarks;
};

/// Lines of `self|cross SRC.png SRC.txt DRV.png DRV.txt`, paths relative to
/// the manifest's directory; `#` starts a comment. Every referenced file is
/// checked and all missing ones are listed in a single DataError.
std::vector<EvalPair> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<EvalPair>& pairs);

/// Writes `self_pairs` same-identity and `cross_pairs` cross-identity pairs
/// from identities that are disjoint from any training seed other than
/// `eval_seed`, together with DIR/manifest.txt.
void write_eval_set(const std::filesystem::path& dir, std::uint64_t eval_seed, int self_pairs,
                    int cross_pairs, int resolution);

/// Optional externally computed metric inputs, one line per manifest pair:
/// `a_1 ... a_k ; b_1 ... b_k`.
struct MetricInputs {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> identity_vectors;
  std::vector<std::pair<std::array<double, 3>, std::array<double, 3>>> poses;
  std::vector<std::pair<std::vector<int>, std::vector<int>>> action_units;
};

void read_identity_vectors(const std::filesystem::path& path, MetricInputs& into);
void read_poses(const std::filesystem::path& path, MetricInputs& into);
void read_action_units(const std::filesystem::path& path, MetricInputs& into);

struct EvalRow {
  int index = 0;
  PairKind kind = PairKind::Self;
  /// Self pairs only: mean |output - driving frame| and |source - driving frame|.
  std::optional<double> model_l1;
  std::optional<double> baseline_l1;
  std::optional<double> csim;
  std::optional<double> prmse;
  std::optional<double> aucon;
};

struct EvalSummary {
  std::vector<EvalRow> rows;
  int self_pairs = 0;
  int cross_pairs = 0;
  double mean_model_l1 = 0.0;
  double mean_baseline_l1 = 0.0;
  /// Fraction of self pairs where the model beats the copy-source baseline.
  double win_fraction = 0.0;
  std::optional<double> mean_csim;
  std::optional<double> mean_prmse;
  std::optional<double> mean_aucon;
};

/// Single-pass reenactment of one source image by driving landmarks. The
/// driving image itself is never read.
Tensor reenact_image(Generator& generator, ShapeAdaptation mode, const Tensor& source,
                     const LandmarkSet& source_landmarks, const LandmarkSet& driving_landmarks,
                     bool same_identity);

EvalSummary evaluate(Generator& generator, ShapeAdaptation mode, const std::vector<EvalPair>& pairs,
                     const MetricInputs& metrics);

/// Column-aligned table, one row per pair, followed by the summary.
std::string format_table(const EvalSummary& summary);
/// JSON record of the same content.
std::string format_record(const EvalSummary& summary);

REENACT_NS_END
