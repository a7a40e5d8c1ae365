#pragma once

#include <filesystem>

#include "reenact/tensor.hpp"

REENACT_NS_BEGIN

/// Reads an 8-bit PNG as a (1, 3, H, W) tensor with v -> v / 127.5 - 1.
/// Grey, palette and alpha inputs are expanded or dropped to RGB; 16-bit
/// inputs are reduced to 8 bits. Throws DataError on unreadable files.
Tensor read_png(const std::filesystem::path& path);

/// Writes a (1, 3, H, W) tensor as 8-bit RGB, clamping to [-1, 1] and
/// rounding (v + 1) * 127.5 to the nearest integer.
void write_png(const std::filesystem::path& path, const Tensor& image);

/// The exact 8-bit quantization write_png applies, as a tensor.
Tensor quantize_8bit(const Tensor& image);

REENACT_NS_END
