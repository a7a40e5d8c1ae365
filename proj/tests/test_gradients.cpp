#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "gradient_suite.hpp"

TEST_CASE("central differences agree with reverse mode for every primitive and sub-net") {
  for (const std::string& name : gradcheck::case_names()) {
    CAPTURE(name);
    const gradcheck::Result r = gradcheck::run_case(name);
    CHECK(r.probes >= gradcheck::kMinProbes);
    CHECK(r.significant >= gradcheck::kMinProbes);
    CHECK(r.max_rel_error < gradcheck::kTolerance);
  }
}

int main(int argc, char** argv) {
  gradcheck::prepare();
  doctest::Context context(argc, argv);
  return context.run();
}
