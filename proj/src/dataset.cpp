#include "reenact/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "reenact/errors.hpp"
#include "reenact/image_io.hpp"
#include "reenact/synthdata.hpp"

REENACT_NS_BEGIN

namespace {

std::string numbered(const char* prefix, int index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, index);
  return buf;
}

}  // namespace

Dataset::Dataset(std::vector<std::vector<Frame>> identities) : frames_(std::move(identities)) {
  if (frames_.empty()) throw DataError("dataset has no identities");
  const Shape first = frames_.front().front().image.shape();
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (frames_[i].size() < 2) {
      throw DataError("identity " + std::to_string(i) + " has fewer than two frames");
    }
    for (const Frame& f : frames_[i]) {
      if (f.image.shape() != first) {
        throw DataError("identity " + std::to_string(i) + ": image " + f.image.shape().str() +
                        " differs from " + first.str());
      }
    }
  }
}

int Dataset::resolution() const { return frames_.front().front().image.shape().h; }

Dataset Dataset::synthetic(std::uint64_t data_seed, int identities, int frames, int resolution) {
  std::vector<std::vector<Frame>> all(identities);
  for (int i = 0; i < identities; ++i) {
    const std::uint64_t id = identity_seed(data_seed, i);
    for (int f = 0; f < frames; ++f) {
      SyntheticSample s = render_frame(id, frame_seed(id, f), resolution);
      all[i].push_back({std::move(s.image), s.landmarks});
    }
  }
  return Dataset(std::move(all));
}

Dataset Dataset::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("dataset directory " + dir.string() + " not found");
  std::vector<fs::path> id_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("id_", 0) == 0) {
      id_dirs.push_back(entry.path());
    }
  }
  std::sort(id_dirs.begin(), id_dirs.end());
  std::vector<std::vector<Frame>> all;
  for (const fs::path& id_dir : id_dirs) {
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(id_dir)) {
      if (entry.path().extension() == ".png") images.push_back(entry.path());
    }
    std::sort(images.begin(), images.end());
    std::vector<Frame> frames;
    for (const fs::path& png : images) {
      fs::path txt = png;
      txt.replace_extension(".txt");
      frames.push_back({read_png(png), read_landmarks(txt)});
    }
    all.push_back(std::move(frames));
  }
  if (all.empty()) throw DataError(dir.string() + ": no id_* directories");
  return Dataset(std::move(all));
}

void write_synthetic_dataset(const std::filesystem::path& dir, std::uint64_t data_seed,
                             int identities, int frames, int resolution) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (int i = 0; i < identities; ++i) {
    const std::uint64_t id = identity_seed(data_seed, i);
    const fs::path id_dir = dir / numbered("id_", i, 4);
    fs::create_directories(id_dir);
    for (int f = 0; f < frames; ++f) {
      const SyntheticSample s = render_frame(id, frame_seed(id, f), resolution);
      const std::string stem = numbered("frame_", f, 3);
      write_png(id_dir / (stem + ".png"), s.image);
      write_landmarks(id_dir / (stem + ".txt"), s.landmarks);
    }
  }
  std::ofstream meta(dir / "dataset.txt");
  meta << "identities = " << identities << "\nframes = " << frames << "\nseed = " << data_seed
       << "\nresolution = " << resolution << "\n";
  if (!meta) throw DataError("cannot write " + (dir / "dataset.txt").string());
}

REENACT_NS_END
