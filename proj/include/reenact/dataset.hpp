#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "reenact/geometry.hpp"

REENACT_NS_BEGIN

struct Frame {
  Tensor image;  // (1, 3, H, W)
  LandmarkSet landmarks;
};

/// Frames grouped by identity. Every identity holds at least two frames.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::vector<Frame>> identities);

  /// Renders identity i from identity_seed(data_seed, i), frame f from
  /// frame_seed(identity, f).
  static Dataset synthetic(std::uint64_t data_seed, int identities, int frames, int resolution);
  /// Loads the directory layout written by write_dataset. Throws DataError.
  static Dataset load(const std::filesystem::path& dir);

  int identities() const { return static_cast<int>(frames_.size()); }
  int frames(int identity) const { return static_cast<int>(frames_.at(identity).size()); }
  const Frame& frame(int identity, int index) const { return frames_.at(identity).at(index); }
  int resolution() const;

 private:
  std::vector<std::vector<Frame>> frames_;
};

/// DIR/id_NNNN/frame_MM.png and frame_MM.txt for every frame, plus
/// DIR/dataset.txt recording the generating parameters.
void write_synthetic_dataset(const std::filesystem::path& dir, std::uint64_t data_seed,
                             int identities, int frames, int resolution);

REENACT_NS_END
