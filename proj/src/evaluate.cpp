#include "reenact/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "reenact/errors.hpp"
#include "reenact/image_io.hpp"
#include "reenact/metrics.hpp"
#include "reenact/ops.hpp"
#include "reenact/synthdata.hpp"

REENACT_NS_BEGIN

namespace {

namespace fs = std::filesystem;

const char* kind_name(PairKind k) { return k == PairKind::Self ? "self" : "cross"; }

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string strip_comment(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
  return line;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

// Reads "a1 a2 ... ; b1 b2 ..." lines into pairs of numeric vectors.
template <typename T>
std::vector<std::pair<std::vector<T>, std::vector<T>>> read_paired(const fs::path& path) {
  std::vector<std::pair<std::vector<T>, std::vector<T>>> out;
  const auto lines = lines_of(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = strip_comment(lines[i]);
    if (blank(line)) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto semi = line.find(';');
    if (semi == std::string::npos) throw DataError(where + ": expected 'a... ; b...'");
    auto parse = [&](const std::string& part) {
      std::istringstream is(part);
      std::vector<T> v;
      T x;
      while (is >> x) v.push_back(x);
      if (!is.eof()) throw DataError(where + ": non-numeric value");
      return v;
    };
    auto a = parse(line.substr(0, semi));
    auto b = parse(line.substr(semi + 1));
    if (a.empty() || a.size() != b.size()) {
      throw DataError(where + ": both sides must be non-empty and equally long");
    }
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

std::string fmt(std::optional<double> v, int precision = 4) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

std::string numbered(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03d", prefix, index);
  return buf;
}

}  // namespace

std::vector<EvalPair> read_manifest(const fs::path& path) {
  const fs::path base = path.parent_path();
  const auto lines = lines_of(path);
  std::vector<EvalPair> pairs;
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = strip_comment(lines[i]);
    if (blank(line)) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    std::istringstream is(line);
    std::string kind;
    std::array<std::string, 4> files;
    is >> kind >> files[0] >> files[1] >> files[2] >> files[3];
    std::string extra;
    if (!is || (is >> extra)) {
      throw DataError(where + ": expected 'self|cross SRC.png SRC.txt DRV.png DRV.txt'");
    }
    EvalPair p;
    if (kind == "self") {
      p.kind = PairKind::Self;
    } else if (kind == "cross") {
      p.kind = PairKind::Cross;
    } else {
      throw DataError(where + ": unknown pair kind '" + kind + "'");
    }
    p.source_image = base / files[0];
    p.source_landmarks = base / files[1];
    p.driving_image = base / files[2];
    p.driving_landmarks = base / files[3];
    // The driving image of a cross pair is optional: it is never read.
    for (const fs::path& f : {p.source_image, p.source_landmarks, p.driving_landmarks}) {
      if (!fs::exists(f)) missing.push_back(where + ": " + f.string());
    }
    if (p.kind == PairKind::Self && !fs::exists(p.driving_image)) {
      missing.push_back(where + ": " + p.driving_image.string());
    }
    pairs.push_back(std::move(p));
  }
  if (!missing.empty()) {
    std::string msg = "manifest references " + std::to_string(missing.size()) + " missing file(s):";
    for (const std::string& m : missing) msg += "\n  " + m;
    throw DataError(msg);
  }
  if (pairs.empty()) throw DataError(path.string() + ": manifest lists no pairs");
  return pairs;
}

void write_manifest(const fs::path& path, const std::vector<EvalPair>& pairs) {
  const fs::path base = path.parent_path();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const EvalPair& p : pairs) {
    out << kind_name(p.kind);
    for (const fs::path& f :
         {p.source_image, p.source_landmarks, p.driving_image, p.driving_landmarks}) {
      out << ' ' << f.lexically_relative(base).generic_string();
    }
    out << '\n';
  }
}

void write_eval_set(const fs::path& dir, std::uint64_t eval_seed, int self_pairs, int cross_pairs,
                    int resolution) {
  fs::create_directories(dir);
  std::vector<EvalPair> pairs;
  auto emit = [&](PairKind kind, const std::string& stem, const SyntheticSample& src,
                  const SyntheticSample& drv) {
    EvalPair p{kind, dir / (stem + "_src.png"), dir / (stem + "_src.txt"),
               dir / (stem + "_drv.png"), dir / (stem + "_drv.txt")};
    write_png(p.source_image, src.image);
    write_landmarks(p.source_landmarks, src.landmarks);
    write_png(p.driving_image, drv.image);
    write_landmarks(p.driving_landmarks, drv.landmarks);
    pairs.push_back(std::move(p));
  };
  for (int i = 0; i < self_pairs; ++i) {
    const std::uint64_t id = identity_seed(eval_seed, static_cast<std::uint64_t>(i));
    const auto [src, drv] = sample_pair(id, frame_seed(id, 0), resolution);
    emit(PairKind::Self, numbered("self_", i), src, drv);
  }
  for (int i = 0; i < cross_pairs; ++i) {
    const std::uint64_t a = identity_seed(eval_seed, 1000 + static_cast<std::uint64_t>(i));
    const std::uint64_t b = identity_seed(eval_seed, 2000 + static_cast<std::uint64_t>(i));
    const auto [src, drv] = cross_pair(a, b, frame_seed(a, 0), resolution);
    emit(PairKind::Cross, numbered("cross_", i), src, drv);
  }
  write_manifest(dir / "manifest.txt", pairs);
}

void read_identity_vectors(const fs::path& path, MetricInputs& into) {
  into.identity_vectors = read_paired<double>(path);
}

void read_poses(const fs::path& path, MetricInputs& into) {
  into.poses.clear();
  for (auto& [a, b] : read_paired<double>(path)) {
    if (a.size() != 3) throw DataError(path.string() + ": poses need exactly 3 angles per side");
    into.poses.push_back({{a[0], a[1], a[2]}, {b[0], b[1], b[2]}});
  }
}

void read_action_units(const fs::path& path, MetricInputs& into) {
  into.action_units = read_paired<int>(path);
}

Tensor reenact_image(Generator& generator, ShapeAdaptation mode, const Tensor& source,
                     const LandmarkSet& source_landmarks, const LandmarkSet& driving_landmarks,
                     bool same_identity) {
  GeneratorInput input{source, {source_landmarks}, {driving_landmarks}, {}};
  input.adapt.push_back(mode == ShapeAdaptation::Always ||
                        (mode == ShapeAdaptation::CrossOnly && !same_identity));
  ForwardOptions options;
  options.spectral.update = false;
  return generator.forward(input, options).image.detach();
}

EvalSummary evaluate(Generator& generator, ShapeAdaptation mode, const std::vector<EvalPair>& pairs,
                     const MetricInputs& metrics) {
  const std::size_t n = pairs.size();
  auto check_count = [n](std::size_t got, const char* what) {
    if (got != 0 && got != n) {
      throw DataError(std::string(what) + " file has " + std::to_string(got) + " entries for " +
                      std::to_string(n) + " manifest pairs");
    }
  };
  check_count(metrics.identity_vectors.size(), "identity-vector");
  check_count(metrics.poses.size(), "pose");
  check_count(metrics.action_units.size(), "action-unit");

  EvalSummary s;
  double csim_sum = 0.0;
  double prmse_sum = 0.0;
  double aucon_sum = 0.0;
  int wins = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const EvalPair& p = pairs[i];
    EvalRow row;
    row.index = static_cast<int>(i);
    row.kind = p.kind;
    const Tensor source = read_png(p.source_image);
    const LandmarkSet src_lm = read_landmarks(p.source_landmarks);
    const LandmarkSet drv_lm = read_landmarks(p.driving_landmarks);
    const Tensor output =
        reenact_image(generator, mode, source, src_lm, drv_lm, p.kind == PairKind::Self);
    if (p.kind == PairKind::Self) {
      const Tensor truth = read_png(p.driving_image);
      row.model_l1 = mean(abs(sub(output, truth))).item();
      row.baseline_l1 = mean(abs(sub(source, truth))).item();
      s.mean_model_l1 += *row.model_l1;
      s.mean_baseline_l1 += *row.baseline_l1;
      wins += *row.model_l1 < *row.baseline_l1;
      ++s.self_pairs;
    } else {
      ++s.cross_pairs;
    }
    try {
      if (!metrics.identity_vectors.empty()) {
        const auto& [a, b] = metrics.identity_vectors[i];
        row.csim = csim(a, b);
        csim_sum += *row.csim;
      }
      if (!metrics.poses.empty()) {
        row.prmse = prmse(metrics.poses[i].first, metrics.poses[i].second);
        prmse_sum += *row.prmse;
      }
      if (!metrics.action_units.empty()) {
        const auto& [a, b] = metrics.action_units[i];
        row.aucon = aucon(a, b);
        aucon_sum += *row.aucon;
      }
    } catch (const std::invalid_argument& e) {
      throw DataError("metric input for pair " + std::to_string(i) + ": " + e.what());
    }
    s.rows.push_back(row);
  }
  if (s.self_pairs > 0) {
    s.mean_model_l1 /= s.self_pairs;
    s.mean_baseline_l1 /= s.self_pairs;
    s.win_fraction = static_cast<double>(wins) / s.self_pairs;
  }
  const double count = static_cast<double>(n);
  if (!metrics.identity_vectors.empty()) s.mean_csim = csim_sum / count;
  if (!metrics.poses.empty()) s.mean_prmse = prmse_sum / count;
  if (!metrics.action_units.empty()) s.mean_aucon = aucon_sum / count;
  return s;
}

std::string format_table(const EvalSummary& s) {
  std::ostringstream os;
  auto row = [&os](const std::array<std::string, 7>& cells) {
    static constexpr std::array<int, 7> widths{5, 6, 10, 12, 8, 8, 8};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      os << std::setw(widths[c]) << cells[c] << (c + 1 < cells.size() ? "  " : "\n");
    }
  };
  row({"pair", "kind", "model_l1", "baseline_l1", "csim", "prmse", "aucon"});
  for (const EvalRow& r : s.rows) {
    row({std::to_string(r.index), kind_name(r.kind), fmt(r.model_l1), fmt(r.baseline_l1),
         fmt(r.csim), fmt(r.prmse), fmt(r.aucon)});
  }
  os << "\nself pairs: " << s.self_pairs << "  cross pairs: " << s.cross_pairs << "\n";
  if (s.self_pairs > 0) {
    os << "mean model L1: " << fmt(s.mean_model_l1)
       << "  mean copy-source L1: " << fmt(s.mean_baseline_l1)
       << "  model wins: " << fmt(100.0 * s.win_fraction, 1) << "%\n";
  }
  if (s.mean_csim) os << "mean CSIM: " << fmt(s.mean_csim) << "\n";
  if (s.mean_prmse) os << "mean PRMSE: " << fmt(s.mean_prmse) << "\n";
  if (s.mean_aucon) os << "mean AUCON: " << fmt(s.mean_aucon) << "\n";
  return os.str();
}

std::string format_record(const EvalSummary& s) {
  using nlohmann::json;
  auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
  json rows = json::array();
  for (const EvalRow& r : s.rows) {
    rows.push_back({{"pair", r.index},
                    {"kind", kind_name(r.kind)},
                    {"model_l1", opt(r.model_l1)},
                    {"baseline_l1", opt(r.baseline_l1)},
                    {"csim", opt(r.csim)},
                    {"prmse", opt(r.prmse)},
                    {"aucon", opt(r.aucon)}});
  }
  json record = {{"self_pairs", s.self_pairs},
                 {"cross_pairs", s.cross_pairs},
                 {"mean_model_l1", s.self_pairs ? json(s.mean_model_l1) : json(nullptr)},
                 {"mean_baseline_l1", s.self_pairs ? json(s.mean_baseline_l1) : json(nullptr)},
                 {"win_fraction", s.self_pairs ? json(s.win_fraction) : json(nullptr)},
                 {"mean_csim", opt(s.mean_csim)},
                 {"mean_prmse", opt(s.mean_prmse)},
                 {"mean_aucon", opt(s.mean_aucon)},
                 {"rows", rows}};
  return record.dump(2) + "\n";
}

REENACT_NS_END
