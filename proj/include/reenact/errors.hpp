#pragma once

#include <stdexcept>

#include "reenact/config_ns.hpp"

REENACT_NS_BEGIN

/// Malformed or missing input data (landmark files, images, manifests).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss or activation became NaN/Inf during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or command-line usage.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

REENACT_NS_END
