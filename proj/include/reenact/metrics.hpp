#pragma once

#include <array>
#include <span>

#include "reenact/config_ns.hpp"

REENACT_NS_BEGIN

/// Cosine similarity of two identity vectors. Throws std::invalid_argument
/// on a length mismatch or a zero vector.
double csim(std::span<const double> a, std::span<const double> b);

/// Root-mean-square of the three head-pose angle differences, in degrees.
double prmse(const std::array<double, 3>& a, const std::array<double, 3>& b);

/// Fraction of action-unit positions whose binary activations agree.
/// Entries must be 0 or 1 and the vectors non-empty and of equal length.
double aucon(std::span<const int> a, std::span<const int> b);

REENACT_NS_END
