#include "reenact/geometry.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "reenact/errors.hpp"
#include "reenact/ops.hpp"

REENACT_NS_BEGIN

namespace {

// Extent at a given resolution, kept a multiple of 8 so three stride-2
// stages divide evenly.
int scaled_extent(int base, int resolution) {
  const int raw = (base * resolution + 63) / 64;
  return std::max(8, 8 * ((raw + 7) / 8));
}

std::vector<int> index_range(int first, int last) {
  std::vector<int> out(last - first + 1);
  std::iota(out.begin(), out.end(), first);
  return out;
}

}  // namespace

RegionSpec region_spec(Region region, int resolution) {
  RegionSpec spec;
  spec.region = region;
  spec.crop_h = scaled_extent(16, resolution);
  spec.crop_w = scaled_extent(16, resolution);
  switch (region) {
    case Region::EyeLeft:
      spec.name = "eye_left";
      spec.indices = index_range(36, 41);
      spec.axis_from = 0;  // 36, outer corner
      spec.axis_to = 3;    // 39, inner corner
      break;
    case Region::EyeRight:
      spec.name = "eye_right";
      spec.indices = index_range(42, 47);
      spec.axis_from = 0;  // 42
      spec.axis_to = 3;    // 45
      break;
    case Region::Nose:
      spec.name = "nose";
      spec.indices = index_range(27, 35);
      spec.axis_from = 4;  // 31, left nostril wing
      spec.axis_to = 8;    // 35
      break;
    case Region::Mouth:
      spec.name = "mouth";
      spec.indices = index_range(48, 67);
      spec.crop_w = scaled_extent(24, resolution);
      spec.axis_from = 0;  // 48, left corner
      spec.axis_to = 6;    // 54
      break;
  }
  return spec;
}

std::array<RegionSpec, 4> all_regions(int resolution) {
  return {region_spec(Region::EyeLeft, resolution), region_spec(Region::EyeRight, resolution),
          region_spec(Region::Nose, resolution), region_spec(Region::Mouth, resolution)};
}

RegionSpec full_face_spec(int resolution) {
  RegionSpec spec;
  spec.name = "face";
  spec.indices = index_range(0, kNumLandmarks - 1);
  spec.crop_h = spec.crop_w = resolution;
  spec.axis_from = 0;
  spec.axis_to = 16;
  return spec;
}

// ---------------------------------------------------------------------------

Point SimilarityTransform::apply(Point p) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  return {scale * (c * p.x - s * p.y) + tx, scale * (s * p.x + c * p.y) + ty};
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = -rotation;
  const Point t = inv.apply(Point{-tx, -ty});
  inv.tx = t.x;
  inv.ty = t.y;
  return inv;
}

SimilarityTransform SimilarityTransform::then(const SimilarityTransform& b) const {
  SimilarityTransform out;
  out.scale = scale * b.scale;
  out.rotation = rotation + b.rotation;
  const Point t = b.apply(Point{tx, ty});
  out.tx = t.x;
  out.ty = t.y;
  return out;
}

// ---------------------------------------------------------------------------

namespace {
constexpr double kSmallestNormal = std::numeric_limits<Real>::min();
}

Tensor rasterize_heatmaps(std::span<const Point> points, int h, int w, double variance) {
  if (h <= 0 || w <= 0) throw ShapeError("rasterize_heatmaps: non-positive extent");
  const int k = static_cast<int>(points.size());
  std::vector<Real> data(static_cast<std::size_t>(k) * h * w);
  const double denom = 2.0 * variance;
  std::vector<double> gx(w), gy(h);
  for (int c = 0; c < k; ++c) {
    // Separable: exp(-(dx^2 + dy^2)/2s^2) = exp(-dx^2/2s^2) * exp(-dy^2/2s^2).
    for (int x = 0; x < w; ++x) gx[x] = std::exp(-(x - points[c].x) * (x - points[c].x) / denom);
    for (int y = 0; y < h; ++y) gy[y] = std::exp(-(y - points[c].y) * (y - points[c].y) / denom);
    Real* plane = data.data() + static_cast<std::size_t>(c) * h * w;
    // Tails below the smallest normal value are stored as exact zeros.
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double v = gy[y] * gx[x];
        plane[y * w + x] = v < kSmallestNormal ? Real(0) : static_cast<Real>(v);
      }
  }
  return Tensor::from(Shape{1, k, h, w}, std::move(data));
}

Tensor rasterize_heatmaps(const LandmarkSet& landmarks, int h, int w, double variance) {
  return rasterize_heatmaps(landmarks.view(), h, w, variance);
}

std::vector<Point> region_landmarks(const LandmarkSet& landmarks, const RegionSpec& region) {
  std::vector<Point> out;
  out.reserve(region.indices.size());
  for (int i : region.indices) out.push_back(landmarks.points.at(i));
  return out;
}

Point centroid(std::span<const Point> points) {
  Point c;
  for (const Point& p : points) {
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= static_cast<double>(points.size());
  c.y /= static_cast<double>(points.size());
  return c;
}

double rms_spread(std::span<const Point> points) {
  const Point c = centroid(points);
  double acc = 0.0;
  for (const Point& p : points) acc += (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
  return std::sqrt(acc / static_cast<double>(points.size()));
}

SimilarityTransform estimate_similarity(std::span<const Point> src, std::span<const Point> dst) {
  if (src.size() != dst.size() || src.size() < 2) {
    throw std::invalid_argument("estimate_similarity: need at least 2 point pairs of equal count");
  }
  const Point ms = centroid(src);
  const Point md = centroid(dst);
  double a = 0.0, b = 0.0, var = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double sx = src[i].x - ms.x, sy = src[i].y - ms.y;
    const double dx = dst[i].x - md.x, dy = dst[i].y - md.y;
    a += sx * dx + sy * dy;
    b += sx * dy - sy * dx;
    var += sx * sx + sy * sy;
  }
  if (var <= 1e-18) {
    throw std::invalid_argument("estimate_similarity: source points are coincident");
  }
  SimilarityTransform t;
  t.rotation = std::atan2(b, a);
  t.scale = std::hypot(a, b) / var;
  const Point rotated = SimilarityTransform{t.scale, t.rotation, 0.0, 0.0}.apply(ms);
  t.tx = md.x - rotated.x;
  t.ty = md.y - rotated.y;
  return t;
}

SimilarityTransform region_frame(const LandmarkSet& landmarks, const RegionSpec& region) {
  const std::vector<Point> pts = region_landmarks(landmarks, region);
  const Point a = pts.at(region.axis_from);
  const Point b = pts.at(region.axis_to);
  const double angle = (a.x == b.x && a.y == b.y) ? 0.0 : std::atan2(b.y - a.y, b.x - a.x);
  const Point c = centroid(pts);
  const double ca = std::cos(angle), sa = std::sin(angle);
  double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
  for (const Point& p : pts) {
    const double u = ca * (p.x - c.x) + sa * (p.y - c.y);
    const double v = -sa * (p.x - c.x) + ca * (p.y - c.y);
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double extent =
      std::max((umax - umin) / (region.crop_w - 1), (vmax - vmin) / (region.crop_h - 1));
  if (!(extent > 1e-9)) {
    throw std::invalid_argument("region_frame: degenerate landmark extent for " + region.name);
  }
  SimilarityTransform frame;
  frame.scale = 1.4 * extent;
  frame.rotation = angle;
  const Point centre_crop{0.5 * (region.crop_w - 1), 0.5 * (region.crop_h - 1)};
  const Point mapped = SimilarityTransform{frame.scale, angle, 0.0, 0.0}.apply(centre_crop);
  frame.tx = c.x - mapped.x;
  frame.ty = c.y - mapped.y;
  return frame;
}

Tensor resample_crop(const Tensor& image, const SimilarityTransform& frame, int crop_h,
                     int crop_w) {
  if (image.shape().n != 1) throw ShapeError("resample_crop: expects a single image");
  std::vector<Real> coords(static_cast<std::size_t>(crop_h) * crop_w * 2);
  for (int v = 0; v < crop_h; ++v)
    for (int u = 0; u < crop_w; ++u) {
      const Point p = frame.apply(Point{static_cast<double>(u), static_cast<double>(v)});
      coords[2 * (v * crop_w + u)] = static_cast<Real>(p.x);
      coords[2 * (v * crop_w + u) + 1] = static_cast<Real>(p.y);
    }
  return remap_bilinear(image, coords, crop_h, crop_w);
}

RegionCrop crop_region(const Tensor& image, const LandmarkSet& landmarks,
                       const RegionSpec& region) {
  const SimilarityTransform frame = region_frame(landmarks, region);
  return {resample_crop(image, frame, region.crop_h, region.crop_w), frame};
}

PlacedRegion place_region(int canvas_h, int canvas_w, const Tensor& crop,
                          std::span<const SimilarityTransform> placements) {
  const Shape cs = crop.shape();
  if (placements.size() != static_cast<std::size_t>(cs.n)) {
    throw ShapeError("place_region: " + std::to_string(placements.size()) +
                     " placements for crop batch " + cs.str());
  }
  const std::size_t plane = static_cast<std::size_t>(canvas_h) * canvas_w;
  std::vector<Real> coords(cs.n * plane * 2);
  std::vector<Real> mask(cs.n * plane, Real(0));
  // Pixels outside the crop read from a location whose whole footprint is
  // out of range, so remap returns exact zeros there.
  const Real outside = Real(-4);
  for (int n = 0; n < cs.n; ++n) {
    const SimilarityTransform inv = placements[n].inverse();
    for (int y = 0; y < canvas_h; ++y)
      for (int x = 0; x < canvas_w; ++x) {
        const Point q = inv.apply(Point{static_cast<double>(x), static_cast<double>(y)});
        const std::size_t i = n * plane + static_cast<std::size_t>(y) * canvas_w + x;
        constexpr double tol = 1e-6;
        const bool inside =
            q.x >= -tol && q.x <= cs.w - 1 + tol && q.y >= -tol && q.y <= cs.h - 1 + tol;
        if (inside) {
          coords[2 * i] = static_cast<Real>(std::clamp(q.x, 0.0, cs.w - 1.0));
          coords[2 * i + 1] = static_cast<Real>(std::clamp(q.y, 0.0, cs.h - 1.0));
          mask[i] = Real(1);
        } else {
          coords[2 * i] = coords[2 * i + 1] = outside;
        }
      }
  }
  return {remap_bilinear(crop, coords, canvas_h, canvas_w),
          Tensor::from(Shape{cs.n, 1, canvas_h, canvas_w}, std::move(mask))};
}

PlacedRegion place_region(int canvas_h, int canvas_w, const Tensor& crop,
                          const SimilarityTransform& placement) {
  return place_region(canvas_h, canvas_w, crop, std::span(&placement, 1));
}

LandmarkSet adapt_landmark_shape(const LandmarkSet& driving, const LandmarkSet& source) {
  const Point cd = centroid(driving.view());
  const Point cs = centroid(source.view());
  const double rd = rms_spread(driving.view());
  const double rs = rms_spread(source.view());
  const double k = rd > 0.0 ? rs / rd : 0.0;
  LandmarkSet out;
  for (int i = 0; i < kNumLandmarks; ++i) {
    out.points[i] = {cs.x + k * (driving.points[i].x - cd.x),
                     cs.y + k * (driving.points[i].y - cd.y)};
  }
  return out;
}

// ---------------------------------------------------------------------------

LandmarkSet parse_landmarks(const std::string& text, const std::string& origin) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) {
    lines.pop_back();
  }
  if (lines.size() != kNumLandmarks) {
    throw DataError(origin + ": expected " + std::to_string(kNumLandmarks) +
                    " landmark lines, found " + std::to_string(lines.size()));
  }
  LandmarkSet lm;
  for (int i = 0; i < kNumLandmarks; ++i) {
    std::istringstream ls(lines[i]);
    double x = 0.0, y = 0.0;
    std::string rest;
    if (!(ls >> x >> y) || (ls >> rest) || !std::isfinite(x) || !std::isfinite(y)) {
      throw DataError(origin + ":" + std::to_string(i + 1) + ": expected \"x y\", got \"" +
                      lines[i] + "\"");
    }
    lm.points[i] = {x, y};
  }
  return lm;
}

LandmarkSet read_landmarks(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError(path.string() + ": cannot open landmark file");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_landmarks(ss.str(), path.string());
}

void write_landmarks(const std::filesystem::path& path, const LandmarkSet& landmarks) {
  std::ofstream f(path);
  if (!f) throw DataError(path.string() + ": cannot write landmark file");
  f << std::setprecision(9);
  for (const Point& p : landmarks.points) f << p.x << ' ' << p.y << '\n';
}

REENACT_NS_END
