#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "reenact/tensor.hpp"

int main(int argc, char** argv) {
  reenact::flush_denormals();
  doctest::Context context(argc, argv);
  return context.run();
}
