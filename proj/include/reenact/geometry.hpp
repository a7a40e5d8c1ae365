#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reenact/tensor.hpp"

REENACT_NS_BEGIN

inline constexpr int kNumLandmarks = 68;
inline constexpr double kHeatmapVariance = 3.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// 68 ordered landmarks in pixel coordinates (x = column, y = row), following
/// the iBUG 68-point annotation order.
struct LandmarkSet {
  std::array<Point, kNumLandmarks> points{};

  std::span<const Point> view() const { return points; }
};

enum class Region { EyeLeft, EyeRight, Nose, Mouth };

struct RegionSpec {
  Region region = Region::EyeLeft;
  std::string name;
  std::vector<int> indices;
  int crop_h = 16;
  int crop_w = 16;
  /// Positions within `indices` whose connecting line sets the crop frame's
  /// horizontal axis (eye corners, nostril wings, mouth corners).
  int axis_from = 0;
  int axis_to = 0;
};

/// Spec for one region at a base image resolution; crop sizes scale
/// linearly from 16x16 (16x24 for the mouth) at 64.
RegionSpec region_spec(Region region, int resolution = 64);
/// Eyes, nose, mouth in the fixed composition order.
std::array<RegionSpec, 4> all_regions(int resolution = 64);
/// A spec covering all 68 points, for tooling and tests.
RegionSpec full_face_spec(int resolution = 64);

/// x -> scale * R(rotation) * x + translation.
struct SimilarityTransform {
  double scale = 1.0;
  double rotation = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Point apply(Point p) const;
  SimilarityTransform inverse() const;
  /// (a.then(b)).apply(p) == b.apply(a.apply(p)).
  SimilarityTransform then(const SimilarityTransform& b) const;
};

/// Gaussian heatmaps with peak 1, one channel per point: (1, |points|, h, w).
Tensor rasterize_heatmaps(std::span<const Point> points, int h, int w,
                          double variance = kHeatmapVariance);
Tensor rasterize_heatmaps(const LandmarkSet& landmarks, int h, int w,
                          double variance = kHeatmapVariance);

std::vector<Point> region_landmarks(const LandmarkSet& landmarks, const RegionSpec& region);

/// Least-squares similarity mapping src onto dst (closed-form Umeyama).
SimilarityTransform estimate_similarity(std::span<const Point> src, std::span<const Point> dst);

/// Transform taking crop pixel coordinates to image coordinates for a region:
/// centred on the landmark centroid, oriented along the region axis, sized to
/// the landmark extent plus 40% padding.
SimilarityTransform region_frame(const LandmarkSet& landmarks, const RegionSpec& region);

/// Resamples `image` (1, c, H, W) into a (1, c, crop_h, crop_w) crop whose
/// pixel (u, v) reads image location frame.apply(u, v).
Tensor resample_crop(const Tensor& image, const SimilarityTransform& frame, int crop_h, int crop_w);

struct RegionCrop {
  Tensor crop;
  SimilarityTransform placement;
};

RegionCrop crop_region(const Tensor& image, const LandmarkSet& landmarks, const RegionSpec& region);

struct PlacedRegion {
  Tensor canvas;  // (n, c, canvas_h, canvas_w), differentiable in the crop
  Tensor mask;    // (n, 1, canvas_h, canvas_w), 1 where the crop covers
};

/// Warps each crop of a (n, c, ch, cw) batch onto a zero canvas using the
/// matching placement (crop -> canvas coordinates).
PlacedRegion place_region(int canvas_h, int canvas_w, const Tensor& crop,
                          std::span<const SimilarityTransform> placements);
PlacedRegion place_region(int canvas_h, int canvas_w, const Tensor& crop,
                          const SimilarityTransform& placement);

/// Re-centres and re-scales the driving landmarks so their centroid and RMS
/// spread match the source's; relative geometry is preserved.
LandmarkSet adapt_landmark_shape(const LandmarkSet& driving, const LandmarkSet& source);

Point centroid(std::span<const Point> points);
double rms_spread(std::span<const Point> points);

/// Plain-text landmark files: exactly 68 lines of "x y".
LandmarkSet read_landmarks(const std::filesystem::path& path);
LandmarkSet parse_landmarks(const std::string& text, const std::string& origin);
void write_landmarks(const std::filesystem::path& path, const LandmarkSet& landmarks);

REENACT_NS_END
