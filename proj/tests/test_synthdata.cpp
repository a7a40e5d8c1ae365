#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "reenact/synthdata.hpp"
#include "test_util.hpp"

using namespace reenact;

namespace {

double inner_lip_gap(const LandmarkSet& lm) {
  double upper = 0, lower = 0;
  for (int i : {61, 62, 63}) upper += lm.points[i].y;
  for (int i : {65, 66, 67}) lower += lm.points[i].y;
  return (lower - upper) / 3;
}

}  // namespace

TEST_SUITE("synthetic faces") {
  TEST_CASE("rendering is deterministic") {
    const auto [src, drv] = sample_pair(identity_seed(11, 3), 99);
    const auto [src2, drv2] = sample_pair(identity_seed(11, 3), 99);
    CHECK(testing::bit_equal(src.image, src2.image));
    CHECK(testing::bit_equal(drv.image, drv2.image));
  }

  TEST_CASE("images lie in [-1, 1] with landmarks inside the frame") {
    for (std::uint64_t id = 0; id < 5; ++id) {
      const SyntheticSample s =
          render_frame(identity_seed(5, id), frame_seed(identity_seed(5, id), 0), 64);
      REQUIRE(s.image.shape() == Shape{1, 3, 64, 64});
      for (Real v : s.image.data()) {
        CHECK(v >= -1);
        CHECK(v <= 1);
      }
      for (const Point& p : s.landmarks.points) {
        CHECK(p.x >= 0);
        CHECK(p.x <= 63);
        CHECK(p.y >= 0);
        CHECK(p.y <= 63);
      }
    }
  }

  TEST_CASE("render and face_landmarks agree") {
    FaceParams p;
    p.pose.rotation = -0.2;
    p.expression.mouth_open = 0.6;
    const SyntheticSample s = render(p, 64, 64);
    const LandmarkSet lm = face_landmarks(p, 64, 64);
    for (int i = 0; i < kNumLandmarks; ++i) {
      CHECK(s.landmarks.points[i].x == lm.points[i].x);
      CHECK(s.landmarks.points[i].y == lm.points[i].y);
    }
  }

  TEST_CASE("opening the mouth widens the inner-lip gap monotonically") {
    double previous = -1e9;
    for (double open : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      FaceParams p;
      p.expression.mouth_open = open;
      const double gap = inner_lip_gap(render(p, 64, 64).landmarks);
      CHECK(gap > previous);
      previous = gap;
    }
  }

  TEST_CASE("a horizontal translation shifts every landmark by the same amount") {
    FaceParams p;
    p.pose.rotation = 0.1;
    const LandmarkSet base = face_landmarks(p, 64, 64);
    p.pose.tx += 5;
    const LandmarkSet moved = face_landmarks(p, 64, 64);
    for (int i = 0; i < kNumLandmarks; ++i) {
      CHECK(std::abs(moved.points[i].x - base.points[i].x - 5) < 1e-9);
      CHECK(std::abs(moved.points[i].y - base.points[i].y) < 1e-9);
    }
  }

  TEST_CASE("out-of-range parameters are rejected") {
    FaceParams p;
    p.expression.mouth_open = 1.5;
    CHECK_THROWS_AS(render(p, 64, 64), std::invalid_argument);
    FaceParams q;
    q.pose.rotation = 1.0;
    CHECK_THROWS_AS(q.validate(64, 64), std::invalid_argument);
  }

  TEST_CASE("pairs share appearance and differ across identities") {
    const auto [a_src, a_drv] = sample_pair(identity_seed(1, 0), 5);
    const auto [b_src, b_drv] = sample_pair(identity_seed(1, 1), 5);
    CHECK(a_src.params.appearance.skin == a_drv.params.appearance.skin);
    CHECK(a_src.params.appearance.eye_size == a_drv.params.appearance.eye_size);
    CHECK(a_src.params.appearance.skin != b_src.params.appearance.skin);
    CHECK(a_src.params.pose.rotation != a_drv.params.pose.rotation);
  }

  TEST_CASE("1000 pairs cover the declared pose ranges") {
    const int res = 32;
    double rot_min = 1e9, rot_max = -1e9, tx_min = 1e9, tx_max = -1e9;
    double sc_min = 1e9, sc_max = -1e9, sh_min = 1e9, sh_max = -1e9;
    for (int i = 0; i < 1000; ++i) {
      const auto [src, drv] = sample_pair(identity_seed(77, i % 50), i, res);
      for (const Pose& p : {src.params.pose, drv.params.pose}) {
        rot_min = std::min(rot_min, p.rotation);
        rot_max = std::max(rot_max, p.rotation);
        tx_min = std::min(tx_min, p.tx);
        tx_max = std::max(tx_max, p.tx);
        sc_min = std::min(sc_min, p.scale);
        sc_max = std::max(sc_max, p.scale);
        sh_min = std::min(sh_min, p.shear);
        sh_max = std::max(sh_max, p.shear);
      }
    }
    const auto near = [](double value, double bound, double span) {
      return std::abs(value - bound) <= 0.05 * span;
    };
    CHECK(near(rot_min, -0.35, 0.7));
    CHECK(near(rot_max, 0.35, 0.7));
    CHECK(near(tx_min, -0.1 * res, 0.2 * res));
    CHECK(near(tx_max, 0.1 * res, 0.2 * res));
    CHECK(near(sc_min, 0.85, 0.3));
    CHECK(near(sc_max, 1.15, 0.3));
    CHECK(near(sh_min, -0.2, 0.4));
    CHECK(near(sh_max, 0.2, 0.4));
  }

  TEST_CASE("cross pairs take appearance from a and geometry from b") {
    const std::uint64_t a = identity_seed(3, 0), b = identity_seed(3, 1);
    const auto [src, drv] = cross_pair(a, b, 42);
    CHECK(src.params.appearance.skin == sample_appearance(a).skin);
    CHECK(drv.params.appearance.mouth_width == sample_appearance(b).mouth_width);
    const auto [src2, drv2] = cross_pair(a, b, 42);
    CHECK(testing::bit_equal(drv.image, drv2.image));
    CHECK_THROWS_AS(cross_pair(a, a, 42), std::invalid_argument);
  }
}
