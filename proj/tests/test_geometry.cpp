#include <doctest.h>

#include <cmath>
#include <random>

#include "reenact/errors.hpp"
#include "reenact/geometry.hpp"
#include "reenact/synthdata.hpp"
#include "test_util.hpp"

using namespace reenact;

namespace {

LandmarkSet reference_landmarks(int resolution = 64) {
  return face_landmarks(FaceParams{}, resolution, resolution);
}

std::string landmark_text(const LandmarkSet& lm) {
  std::string text;
  for (const Point& p : lm.points) text += std::to_string(p.x) + " " + std::to_string(p.y) + "\n";
  return text;
}

}  // namespace

TEST_SUITE("heatmaps") {
  TEST_CASE("peak value 1 at the landmark and e^-1 at squared distance 6") {
    const std::vector<Point> pts{{7.0 - std::sqrt(2.0), 5.0}, {3.0, 4.0}};
    const Tensor h = rasterize_heatmaps(pts, 12, 12, 3.0);
    REQUIRE(h.shape() == Shape{1, 2, 12, 12});
    CHECK(h.at(0, 1, 4, 3) == 1.0f);
    // (7, 7) is at dx^2 = 2, dy^2 = 4 from the first landmark.
    CHECK(h.at(0, 0, 7, 7) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    CHECK(h.at(0, 0, 7, 7) == doctest::Approx(0.36788).epsilon(1e-4));
  }

  TEST_CASE("coincident landmarks give identical channels") {
    const std::vector<Point> pts{{4.3, 2.9}, {4.3, 2.9}};
    const Tensor h = rasterize_heatmaps(pts, 8, 9);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 9; ++x) CHECK(h.at(0, 0, y, x) == h.at(0, 1, y, x));
  }

  TEST_CASE("a full set rasterizes to 68 channels in [0, 1]") {
    const Tensor h = rasterize_heatmaps(reference_landmarks(), 64, 64);
    CHECK(h.shape() == Shape{1, kNumLandmarks, 64, 64});
    for (Real v : h.data()) {
      CHECK(v >= 0);
      CHECK(v <= 1);
    }
  }
}

TEST_SUITE("regions") {
  TEST_CASE("region index sets follow the 68-point annotation") {
    const LandmarkSet lm = reference_landmarks();
    const RegionSpec eye = region_spec(Region::EyeLeft);
    const std::vector<Point> pts = region_landmarks(lm, eye);
    REQUIRE(pts.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(eye.indices[i] == 36 + i);
    const RegionSpec mouth = region_spec(Region::Mouth);
    REQUIRE(region_landmarks(lm, mouth).size() == 20);
    for (int i = 0; i < 20; ++i) CHECK(mouth.indices[i] == 48 + i);
    CHECK(region_landmarks(lm, region_spec(Region::EyeRight)).size() == 6);
    CHECK(region_landmarks(lm, full_face_spec()).size() == 68);
  }

  TEST_CASE("crop sizes scale with resolution") {
    CHECK(region_spec(Region::EyeLeft, 64).crop_h == 16);
    CHECK(region_spec(Region::Mouth, 64).crop_w == 24);
    CHECK(region_spec(Region::Mouth, 128).crop_w == 48);
  }

  TEST_CASE("the rendered left eye sits left of the right eye") {
    const LandmarkSet lm = reference_landmarks();
    const Point left = centroid(region_landmarks(lm, region_spec(Region::EyeLeft)));
    const Point right = centroid(region_landmarks(lm, region_spec(Region::EyeRight)));
    const Point mouth = centroid(region_landmarks(lm, region_spec(Region::Mouth)));
    CHECK(left.x < right.x);
    CHECK(mouth.y > left.y);
  }

  TEST_CASE("an axis-aligned region has zero rotation and doubles its scale with the landmarks") {
    const LandmarkSet lm = reference_landmarks();
    const RegionSpec mouth = region_spec(Region::Mouth);
    const SimilarityTransform frame = region_frame(lm, mouth);
    CHECK(std::abs(frame.rotation) < 1e-9);
    LandmarkSet doubled = lm;
    for (Point& p : doubled.points) p = {2 * p.x, 2 * p.y};
    CHECK(region_frame(doubled, mouth).scale == doctest::Approx(2 * frame.scale).epsilon(1e-12));
  }

  TEST_CASE("coincident region landmarks are rejected") {
    LandmarkSet lm = reference_landmarks();
    for (int i : region_spec(Region::Nose).indices) lm.points[i] = {10, 10};
    CHECK_THROWS_AS(region_frame(lm, region_spec(Region::Nose)), std::invalid_argument);
  }

  TEST_CASE("crop then place reproduces a smooth image inside the mask") {
    std::vector<Real> values(3 * 64 * 64);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
          values[(c * 64 + y) * 64 + x] =
              static_cast<Real>(0.6 * std::sin(0.11 * x + c) * std::cos(0.07 * y - c));
    const Tensor image = Tensor::from({1, 3, 64, 64}, values);
    FaceParams params;
    params.pose.rotation = 0.2;
    const LandmarkSet lm = face_landmarks(params, 64, 64);
    for (const RegionSpec& spec : all_regions()) {
      CAPTURE(spec.name);
      const RegionCrop crop = crop_region(image, lm, spec);
      const PlacedRegion placed = place_region(64, 64, crop.crop, crop.placement);
      double err = 0;
      int covered = 0;
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 64; ++y)
          for (int x = 0; x < 64; ++x) {
            if (placed.mask.at(0, 0, y, x) == 0) continue;
            err += std::abs(placed.canvas.at(0, c, y, x) - image.at(0, c, y, x));
            ++covered;
          }
      REQUIRE(covered > 0);
      CHECK(err / covered < 0.02);
    }
  }

  TEST_CASE("identity placement of a full-canvas crop copies it with a full mask") {
    std::mt19937_64 rng(1);
    const Tensor crop = testing::random_tensor({1, 3, 9, 11}, rng);
    const PlacedRegion placed = place_region(9, 11, crop, SimilarityTransform{});
    CHECK(testing::max_abs_diff(placed.canvas, crop) < 1e-6);
    for (Real m : placed.mask.data()) CHECK(m == 1);
  }

  TEST_CASE("a placement entirely off the canvas yields zeros") {
    std::mt19937_64 rng(2);
    const Tensor crop = testing::random_tensor({1, 3, 8, 8}, rng);
    const PlacedRegion placed =
        place_region(16, 16, crop, SimilarityTransform{1.0, 0.0, 100.0, -50.0});
    for (Real v : placed.canvas.data()) CHECK(v == 0);
    for (Real m : placed.mask.data()) CHECK(m == 0);
  }
}

TEST_SUITE("similarity") {
  TEST_CASE("identical point sets give the identity transform") {
    const LandmarkSet lm = reference_landmarks();
    const SimilarityTransform t = estimate_similarity(lm.view(), lm.view());
    CHECK(std::abs(t.scale - 1) < 1e-6);
    CHECK(std::abs(t.rotation) < 1e-6);
    CHECK(std::abs(t.tx) < 1e-6);
    CHECK(std::abs(t.ty) < 1e-6);
  }

  TEST_CASE("a pure shift is recovered as a translation") {
    const LandmarkSet lm = reference_landmarks();
    std::vector<Point> dst;
    for (const Point& p : lm.points) dst.push_back({p.x + 5, p.y - 3});
    const SimilarityTransform t = estimate_similarity(lm.view(), dst);
    CHECK(std::abs(t.scale - 1) < 1e-6);
    CHECK(std::abs(t.rotation) < 1e-6);
    CHECK(std::abs(t.tx - 5) < 1e-6);
    CHECK(std::abs(t.ty + 3) < 1e-6);
  }

  TEST_CASE("a known transform of a random cloud is recovered") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10, 10);
    std::vector<Point> src(6), dst;
    for (Point& p : src) p = {u(rng), u(rng)};
    const SimilarityTransform truth{1.7, 0.4, 3, 8};
    for (const Point& p : src) dst.push_back(truth.apply(p));
    const SimilarityTransform t = estimate_similarity(src, dst);
    CHECK(std::abs(t.scale - 1.7) < 1e-4);
    CHECK(std::abs(t.rotation - 0.4) < 1e-4);
    CHECK(std::abs(t.tx - 3) < 1e-4);
    CHECK(std::abs(t.ty - 8) < 1e-4);
  }

  TEST_CASE("coincident source points are rejected") {
    const std::vector<Point> src(4, Point{1, 1});
    const std::vector<Point> dst{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    CHECK_THROWS_AS(estimate_similarity(src, dst), std::invalid_argument);
  }

  TEST_CASE("composition and inverse") {
    const SimilarityTransform a{1.3, 0.2, -4, 2};
    const SimilarityTransform b{0.7, -0.9, 1, 5};
    const Point p{3.5, -1.25};
    const Point q = a.then(b).apply(p);
    const Point r = b.apply(a.apply(p));
    CHECK(q.x == doctest::Approx(r.x));
    CHECK(q.y == doctest::Approx(r.y));
    const Point back = a.inverse().apply(a.apply(p));
    CHECK(back.x == doctest::Approx(p.x));
    CHECK(back.y == doctest::Approx(p.y));
  }
}

TEST_SUITE("shape adaptation") {
  TEST_CASE("adapting a set to itself is the identity") {
    const LandmarkSet lm = reference_landmarks();
    const LandmarkSet out = adapt_landmark_shape(lm, lm);
    for (int i = 0; i < kNumLandmarks; ++i) {
      CHECK(std::abs(out.points[i].x - lm.points[i].x) < 1e-6);
      CHECK(std::abs(out.points[i].y - lm.points[i].y) < 1e-6);
    }
  }

  TEST_CASE("a scaled and shifted copy maps back onto the source") {
    const LandmarkSet lm = reference_landmarks();
    LandmarkSet drv;
    for (int i = 0; i < kNumLandmarks; ++i)
      drv.points[i] = {2 * lm.points[i].x + 7, 2 * lm.points[i].y - 3};
    const LandmarkSet out = adapt_landmark_shape(drv, lm);
    for (int i = 0; i < kNumLandmarks; ++i) {
      CHECK(std::abs(out.points[i].x - lm.points[i].x) < 1e-5);
      CHECK(std::abs(out.points[i].y - lm.points[i].y) < 1e-5);
    }
  }

  TEST_CASE("output centroid and spread equal the source's for random inputs") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 64);
    for (int trial = 0; trial < 20; ++trial) {
      LandmarkSet a, b;
      for (Point& p : a.points) p = {u(rng), u(rng)};
      for (Point& p : b.points) p = {u(rng), u(rng)};
      const LandmarkSet out = adapt_landmark_shape(a, b);
      const Point co = centroid(out.view()), cb = centroid(b.view());
      CHECK(std::abs(co.x - cb.x) < 1e-9);
      CHECK(std::abs(co.y - cb.y) < 1e-9);
      CHECK(std::abs(rms_spread(out.view()) - rms_spread(b.view())) < 1e-9);
    }
  }
}

TEST_SUITE("landmark files") {
  TEST_CASE("text round trip") {
    const LandmarkSet lm = reference_landmarks();
    const LandmarkSet back = parse_landmarks(landmark_text(lm), "mem");
    for (int i = 0; i < kNumLandmarks; ++i)
      CHECK(back.points[i].x == doctest::Approx(lm.points[i].x).epsilon(1e-6));
  }

  TEST_CASE("wrong line count is rejected") {
    std::string text = landmark_text(reference_landmarks());
    text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    CHECK_THROWS_AS(parse_landmarks(text, "short.txt"), DataError);
  }

  TEST_CASE("a malformed line is reported with its number") {
    std::string text = landmark_text(reference_landmarks());
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) pos = text.find('\n', pos) + 1;
    text.replace(pos, text.find('\n', pos) - pos, "1.0 abc");
    try {
      parse_landmarks(text, "bad.txt");
      FAIL("expected a data error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("bad.txt:5") != std::string::npos);
    }
  }

  TEST_CASE("a missing file is a data error") {
    CHECK_THROWS_AS(read_landmarks("/nonexistent/landmarks.txt"), DataError);
  }
}
