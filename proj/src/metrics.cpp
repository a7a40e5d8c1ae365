#include "reenact/metrics.hpp"

#include <cmath>
#include <stdexcept>

REENACT_NS_BEGIN

double csim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("csim: vectors must be non-empty and of equal length");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("csim: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double prmse(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / 3.0);
}

double aucon(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("aucon: vectors must be non-empty and of equal length");
  }
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != 0 && a[i] != 1) || (b[i] != 0 && b[i] != 1)) {
      throw std::invalid_argument("aucon: activations must be 0 or 1");
    }
    agree += a[i] == b[i];
  }
  return static_cast<double>(agree) / static_cast<double>(a.size());
}

REENACT_NS_END
