#include "reenact/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "reenact/errors.hpp"

REENACT_NS_BEGIN

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& v) {
  std::size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

template <typename Int>
Int parse_integer(const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw std::invalid_argument("not an integer");
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true or false");
}

std::string format_double(double d) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << d;
  return os.str();
}

struct Key {
  std::string name;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Key double_key(std::string name, T TrainConfig::*field) {
  return {std::move(name),
          [field](TrainConfig& c, const std::string& v) { c.*field = parse_double(v); },
          [field](const TrainConfig& c) { return format_double(c.*field); }};
}

template <typename T>
Key int_key(std::string name, T TrainConfig::*field) {
  return {std::move(name),
          [field](TrainConfig& c, const std::string& v) { c.*field = parse_integer<T>(v); },
          [field](const TrainConfig& c) { return std::to_string(c.*field); }};
}

Key bool_key(std::string name, bool TrainConfig::*field) {
  return {std::move(name),
          [field](TrainConfig& c, const std::string& v) { c.*field = parse_bool(v); },
          [field](const TrainConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

Key string_key(std::string name, std::string TrainConfig::*field) {
  return {std::move(name), [field](TrainConfig& c, const std::string& v) { c.*field = v; },
          [field](const TrainConfig& c) { return c.*field; }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      double_key("lr_generator", &TrainConfig::lr_generator),
      double_key("lr_discriminator", &TrainConfig::lr_discriminator),
      double_key("lr_overfit", &TrainConfig::lr_overfit),
      double_key("adam_beta1", &TrainConfig::adam_beta1),
      double_key("adam_beta2", &TrainConfig::adam_beta2),
      int_key("batch_size", &TrainConfig::batch_size),
      int_key("steps", &TrainConfig::steps),
      int_key("resolution", &TrainConfig::resolution),
      double_key("heatmap_variance", &TrainConfig::heatmap_variance),
      double_key("lambda_gan", &TrainConfig::lambda_gan),
      double_key("lambda_c", &TrainConfig::lambda_c),
      double_key("lambda_local", &TrainConfig::lambda_local),
      int_key("seed", &TrainConfig::seed),
      int_key("data_seed", &TrainConfig::data_seed),
      int_key("identities", &TrainConfig::identities),
      int_key("frames", &TrainConfig::frames),
      string_key("data_dir", &TrainConfig::data_dir),
      bool_key("overfit", &TrainConfig::overfit),
      bool_key("use_local_net", &TrainConfig::use_local_net),
      {"shape_adaptation",
       [](TrainConfig& c, const std::string& v) { c.shape_adaptation = parse_shape_adaptation(v); },
       [](const TrainConfig& c) { return to_string(c.shape_adaptation); }},
      int_key("perceptual_seed", &TrainConfig::perceptual_seed),
      string_key("perceptual_weights", &TrainConfig::perceptual_weights),
      int_key("log_every", &TrainConfig::log_every),
      int_key("checkpoint_every", &TrainConfig::checkpoint_every),
  };
  return table;
}

}  // namespace

std::string to_string(ShapeAdaptation mode) {
  switch (mode) {
    case ShapeAdaptation::CrossOnly:
      return "cross";
    case ShapeAdaptation::Always:
      return "always";
    case ShapeAdaptation::Never:
      return "never";
  }
  return "cross";
}

ShapeAdaptation parse_shape_adaptation(const std::string& text) {
  if (text == "cross") return ShapeAdaptation::CrossOnly;
  if (text == "always") return ShapeAdaptation::Always;
  if (text == "never") return ShapeAdaptation::Never;
  throw std::invalid_argument("expected cross, always or never");
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("config: " + what);
  };
  require(lr_generator > 0 && lr_discriminator > 0 && lr_overfit > 0,
          "learning rates must be positive");
  require(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1,
          "Adam betas must lie in [0, 1)");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(steps >= 0, "steps must be non-negative");
  require(resolution >= 16 && resolution % 16 == 0, "resolution must be a multiple of 16");
  require(heatmap_variance > 0, "heatmap_variance must be positive");
  require(lambda_gan >= 0 && lambda_c >= 0 && lambda_local >= 0,
          "loss weights must be non-negative");
  require(identities >= 1, "identities must be at least 1");
  require(frames >= 2, "frames must be at least 2");
  require(log_every >= 1 && checkpoint_every >= 1, "log and checkpoint intervals must be positive");
}

Real TrainConfig::effective_lr_generator() const {
  return static_cast<Real>(overfit ? lr_overfit : lr_generator);
}

Real TrainConfig::effective_lr_discriminator() const {
  return static_cast<Real>(overfit ? lr_overfit : lr_discriminator);
}

LossWeights TrainConfig::loss_weights() const {
  return {static_cast<Real>(lambda_gan), static_cast<Real>(lambda_c),
          static_cast<Real>(lambda_local)};
}

GeneratorConfig TrainConfig::generator_config() const {
  GeneratorConfig g;
  g.resolution = resolution;
  g.use_local_net = use_local_net;
  g.heatmap_variance = heatmap_variance;
  g.seed = seed;
  return g;
}

TrainConfig parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, const Key*> by_name;
  for (const Key& k : keys()) by_name[k.name] = &k;

  TrainConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = by_name.find(key);
    if (it == by_name.end()) throw UsageError(where + ": unknown key '" + key + "'");
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw UsageError(where + ": duplicate key '" + key + "' (first set on line " +
                       std::to_string(prev->second) + ")");
    }
    seen[key] = line_no;
    try {
      it->second->set(config, value);
    } catch (const std::exception& e) {
      throw UsageError(where + ": bad value '" + value + "' for '" + key + "': " + e.what());
    }
  }
  config.validate();
  return config;
}

TrainConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string format_config(const TrainConfig& config) {
  std::string out;
  for (const Key& k : keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

REENACT_NS_END
