#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reenact/tensor.hpp"

REENACT_NS_BEGIN

/// One named entry: a 4-d shape and 32-bit float payload.
struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

/// Self-describing container:
///   magic "RNCK", u32 version, u32 config length, config text,
///   u32 entry count, then per entry: u32 name length, name,
///   4 x u32 dims (n, c, h, w), numel x f32 values.
/// Every integer and float is little-endian.
struct CheckpointFile {
  static constexpr std::uint32_t kVersion = 1;

  std::uint32_t version = kVersion;
  std::string config_text;
  std::vector<NamedTensor> entries;

  /// Throws DataError when the name is absent.
  const NamedTensor& get(const std::string& name) const;
  const NamedTensor* find(const std::string& name) const;
};

std::string serialize_checkpoint(const CheckpointFile& file);
/// Throws DataError on a truncated, mismatched or otherwise malformed buffer.
CheckpointFile deserialize_checkpoint(const std::string& bytes, const std::string& origin);

/// Writes through a temporary sibling and renames it into place.
void write_checkpoint(const std::filesystem::path& path, const CheckpointFile& file);
CheckpointFile read_checkpoint(const std::filesystem::path& path);

/// Integer state packed into exactly representable floats (16 bits each).
std::vector<float> pack_u64(std::uint64_t value);
std::uint64_t unpack_u64(const std::vector<float>& words, std::size_t offset = 0);

REENACT_NS_END
