#include "reenact/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

REENACT_NS_BEGIN

namespace {

using Rgb = std::array<double, 3>;

constexpr Rgb kBackground{0.15, 0.20, 0.28};
constexpr Rgb kEyeWhite{0.95, 0.95, 0.93};
constexpr Rgb kPupil{0.05, 0.05, 0.06};
constexpr Rgb kMouthInterior{0.25, 0.05, 0.08};
constexpr int kSuper = 3;  // supersamples per pixel axis

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Platform-independent uniform draw on [lo, hi].
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

void check_range(const char* field, double v, double lo, double hi) {
  constexpr double slack = 1e-9;
  if (!(v >= lo - slack && v <= hi + slack)) {
    throw std::invalid_argument(std::string("FaceParams: ") + field + " = " + std::to_string(v) +
                                " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                "]");
  }
}

// Face-frame layout shared by the renderer and the landmark emitter.
struct FaceLayout {
  double aspect;
  struct Eye {
    double cx, cy, half_w, half_h;
  } eyes[2];  // image-left, image-right
  Point brows[2][5];
  Point nose[9];
  double mouth_cx, mouth_cy, mouth_half_w, corner_dy, gap;

  double mouth_base(double t) const { return mouth_cy + corner_dy * t * t; }
};

constexpr double kEyeY = -0.12;
constexpr double kEyeX = 0.33;
constexpr double kMouthY = 0.52;
constexpr double kUpperLip = 0.06;
constexpr double kLowerLip = 0.07;
constexpr double kInnerCorner = 0.9;

FaceLayout layout(const Appearance& a, const Expression& e) {
  FaceLayout f{};
  f.aspect = a.face_aspect;
  const double opens[2] = {e.eye_open_left, e.eye_open_right};
  for (int s = 0; s < 2; ++s) {
    const double cx = (s == 0 ? -kEyeX : kEyeX);
    f.eyes[s] = {cx, kEyeY, a.eye_size, 0.55 * a.eye_size * opens[s]};
    for (int k = 0; k < 5; ++k) {
      const double t = -1.0 + 0.5 * k;
      f.brows[s][k] = {cx + 1.2 * a.eye_size * t,
                       kEyeY - 0.2 - 0.06 * e.brow_raise - 0.04 * (1.0 - t * t)};
    }
  }
  const double nw = a.nose_width;
  for (int k = 0; k < 4; ++k) f.nose[k] = {0.0, -0.12 + 0.09 * k};
  f.nose[4] = {-nw, 0.22};
  f.nose[5] = {-0.5 * nw, 0.24};
  f.nose[6] = {0.0, 0.26};
  f.nose[7] = {0.5 * nw, 0.24};
  f.nose[8] = {nw, 0.22};
  f.mouth_cx = 0.0;
  f.mouth_cy = kMouthY;
  f.mouth_half_w = a.mouth_width;
  f.corner_dy = -0.06 * e.mouth_curve;
  f.gap = 0.16 * e.mouth_open;
  return f;
}

// Landmarks in face coordinates (unit = head half-height, y down).
std::array<Point, kNumLandmarks> canonical_landmarks(const FaceLayout& f) {
  std::array<Point, kNumLandmarks> p{};
  const double pi = std::acos(-1.0);
  for (int k = 0; k <= 16; ++k) {
    const double phi = pi - k * pi / 16.0;
    p[k] = {f.aspect * std::cos(phi), std::sin(phi)};
  }
  for (int k = 0; k < 5; ++k) {
    p[17 + k] = f.brows[0][k];
    p[22 + k] = f.brows[1][k];
  }
  for (int k = 0; k < 9; ++k) p[27 + k] = f.nose[k];
  const double lid = std::sqrt(1.0 - 1.0 / 9.0);
  for (int s = 0; s < 2; ++s) {
    const auto& e = f.eyes[s];
    const int b = 36 + 6 * s;
    p[b + 0] = {e.cx - e.half_w, e.cy};
    p[b + 1] = {e.cx - e.half_w / 3, e.cy - e.half_h * lid};
    p[b + 2] = {e.cx + e.half_w / 3, e.cy - e.half_h * lid};
    p[b + 3] = {e.cx + e.half_w, e.cy};
    p[b + 4] = {e.cx + e.half_w / 3, e.cy + e.half_h * lid};
    p[b + 5] = {e.cx - e.half_w / 3, e.cy + e.half_h * lid};
  }
  const double mw = f.mouth_half_w;
  auto outer_upper = [&](double t) {
    return Point{mw * t, f.mouth_base(t) - (0.5 * f.gap + kUpperLip) * (1 - t * t)};
  };
  auto outer_lower = [&](double t) {
    return Point{mw * t, f.mouth_base(t) + (0.5 * f.gap + kLowerLip) * (1 - t * t)};
  };
  auto inner_upper = [&](double t) {
    return Point{mw * t, f.mouth_base(t) - 0.5 * f.gap * (1 - t * t)};
  };
  auto inner_lower = [&](double t) {
    return Point{mw * t, f.mouth_base(t) + 0.5 * f.gap * (1 - t * t)};
  };
  for (int k = 0; k < 7; ++k) p[48 + k] = outer_upper(-1.0 + k / 3.0);
  for (int k = 0; k < 5; ++k) p[55 + k] = outer_lower(2.0 / 3.0 - k / 3.0);
  p[60] = {-kInnerCorner * mw, f.mouth_base(-kInnerCorner)};
  for (int k = 0; k < 3; ++k) p[61 + k] = inner_upper(-1.0 / 3.0 + k / 3.0);
  p[64] = {kInnerCorner * mw, f.mouth_base(kInnerCorner)};
  for (int k = 0; k < 3; ++k) p[65 + k] = inner_lower(1.0 / 3.0 - k / 3.0);
  return p;
}

// Face frame <-> pixel frame.
struct PoseMap {
  double m[2][2];
  double inv[2][2];
  double ox, oy;

  PoseMap(const Pose& pose, int h, int w) {
    const double r = 0.34 * std::min(h, w) * pose.scale;
    const double c = std::cos(pose.rotation), s = std::sin(pose.rotation);
    // r * R(rotation) * [[1, shear], [0, 1]]
    m[0][0] = r * c;
    m[0][1] = r * (c * pose.shear - s);
    m[1][0] = r * s;
    m[1][1] = r * (s * pose.shear + c);
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    inv[0][0] = m[1][1] / det;
    inv[0][1] = -m[0][1] / det;
    inv[1][0] = -m[1][0] / det;
    inv[1][1] = m[0][0] / det;
    ox = 0.5 * (w - 1) + pose.tx;
    oy = 0.5 * (h - 1) + pose.ty;
  }
  Point to_pixel(Point q) const {
    return {ox + m[0][0] * q.x + m[0][1] * q.y, oy + m[1][0] * q.x + m[1][1] * q.y};
  }
  Point to_face(double px, double py) const {
    const double dx = px - ox, dy = py - oy;
    return {inv[0][0] * dx + inv[0][1] * dy, inv[1][0] * dx + inv[1][1] * dy};
  }
};

double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * vx, p.y - a.y - t * vy);
}

double polyline_distance(Point p, const Point* pts, int count) {
  double d = 1e300;
  for (int i = 0; i + 1 < count; ++i) d = std::min(d, segment_distance(p, pts[i], pts[i + 1]));
  return d;
}

bool inside_polygon(Point p, const Point* pts, int count) {
  bool inside = false;
  for (int i = 0, j = count - 1; i < count; j = i++) {
    if ((pts[i].y > p.y) != (pts[j].y > p.y) &&
        p.x < (pts[j].x - pts[i].x) * (p.y - pts[i].y) / (pts[j].y - pts[i].y) + pts[i].x) {
      inside = !inside;
    }
  }
  return inside;
}

Rgb shade(const Rgb& c, double k) {
  return {std::clamp(c[0] * k, 0.0, 1.0), std::clamp(c[1] * k, 0.0, 1.0),
          std::clamp(c[2] * k, 0.0, 1.0)};
}

Rgb face_colour(Point q, const FaceLayout& f, const Appearance& a,
                const std::array<Point, kNumLandmarks>& lm) {
  const double hx = q.x / (1.12 * f.aspect), hy = (q.y + 0.18) / 0.98;
  const bool hair = hx * hx + hy * hy <= 1.0;
  const double fx = q.x / f.aspect;
  const bool head = fx * fx + q.y * q.y <= 1.0;
  if (!head) return hair ? a.hair : kBackground;

  Rgb colour = shade(a.skin, 1.0 - 0.12 * q.y);
  for (int s = 0; s < 2; ++s) {
    if (polyline_distance(q, f.brows[s], 5) < 0.035) colour = a.hair;
  }
  if (inside_polygon(q, f.nose + 3, 6) || polyline_distance(q, f.nose, 4) < 0.02) {
    colour = shade(a.skin, 0.82);
  }
  for (int s = 0; s < 2; ++s) {
    const auto& e = f.eyes[s];
    const double ex = (q.x - e.cx) / e.half_w;
    if (e.half_h > 1e-9) {
      const double ey = (q.y - e.cy) / e.half_h;
      if (ex * ex + ey * ey <= 1.0) {
        const double r2 = (q.x - e.cx) * (q.x - e.cx) + (q.y - e.cy) * (q.y - e.cy);
        if (r2 <= std::pow(0.22 * e.half_w, 2)) {
          colour = kPupil;
        } else if (r2 <= std::pow(0.5 * e.half_w, 2)) {
          colour = a.eye;
        } else {
          colour = kEyeWhite;
        }
      }
    }
    const int b = 36 + 6 * s;
    const Point lid[4] = {lm[b], lm[b + 1], lm[b + 2], lm[b + 3]};
    if (polyline_distance(q, lid, 4) < 0.022) colour = shade(a.hair, 0.6);
  }
  const double t = (q.x - f.mouth_cx) / f.mouth_half_w;
  if (std::abs(t) <= 1.0) {
    const double base = f.mouth_base(t);
    const double bulge = 1.0 - t * t;
    const double upper_outer = base - (0.5 * f.gap + kUpperLip) * bulge;
    const double lower_outer = base + (0.5 * f.gap + kLowerLip) * bulge;
    if (q.y >= upper_outer && q.y <= lower_outer) {
      const double upper_inner = base - 0.5 * f.gap * bulge;
      const double lower_inner = base + 0.5 * f.gap * bulge;
      if (q.y > upper_inner && q.y < lower_inner) {
        colour = kMouthInterior;
      } else {
        colour = {std::min(1.0, a.skin[0] * 0.85 + 0.15), a.skin[1] * 0.55, a.skin[2] * 0.6};
      }
    }
  }
  return colour;
}

}  // namespace

void FaceParams::validate(int h, int w) const {
  const auto& a = appearance;
  static constexpr double skin_lo[3] = {0.55, 0.35, 0.25};
  for (int c = 0; c < 3; ++c) {
    check_range("appearance.skin", a.skin[c], skin_lo[c], skin_lo[c] + 0.4);
    check_range("appearance.hair", a.hair[c], 0.05, 0.55);
    check_range("appearance.eye", a.eye[c], 0.1, 0.7);
  }
  check_range("appearance.face_aspect", a.face_aspect, 0.72, 0.90);
  check_range("appearance.eye_size", a.eye_size, 0.11, 0.17);
  check_range("appearance.nose_width", a.nose_width, 0.08, 0.14);
  check_range("appearance.mouth_width", a.mouth_width, 0.22, 0.32);
  check_range("pose.shear", pose.shear, -0.2, 0.2);
  check_range("pose.rotation", pose.rotation, -0.35, 0.35);
  check_range("pose.tx", pose.tx, -0.1 * w, 0.1 * w);
  check_range("pose.ty", pose.ty, -0.1 * h, 0.1 * h);
  check_range("pose.scale", pose.scale, 0.85, 1.15);
  check_range("expression.eye_open_left", expression.eye_open_left, 0.0, 1.0);
  check_range("expression.eye_open_right", expression.eye_open_right, 0.0, 1.0);
  check_range("expression.mouth_open", expression.mouth_open, 0.0, 1.0);
  check_range("expression.mouth_curve", expression.mouth_curve, -1.0, 1.0);
  check_range("expression.brow_raise", expression.brow_raise, -1.0, 1.0);
}

LandmarkSet face_landmarks(const FaceParams& params, int h, int w) {
  params.validate(h, w);
  const FaceLayout f = layout(params.appearance, params.expression);
  const PoseMap map(params.pose, h, w);
  LandmarkSet lm;
  const auto canonical = canonical_landmarks(f);
  for (int i = 0; i < kNumLandmarks; ++i) lm.points[i] = map.to_pixel(canonical[i]);
  return lm;
}

SyntheticSample render(const FaceParams& params, int h, int w) {
  if (h <= 0 || w <= 0) throw std::invalid_argument("render: non-positive extent");
  params.validate(h, w);
  const FaceLayout f = layout(params.appearance, params.expression);
  const PoseMap map(params.pose, h, w);
  const auto canonical = canonical_landmarks(f);

  std::vector<Real> data(static_cast<std::size_t>(3) * h * w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Rgb acc{0, 0, 0};
      for (int sy = 0; sy < kSuper; ++sy)
        for (int sx = 0; sx < kSuper; ++sx) {
          const double px = x + (sx + 0.5) / kSuper - 0.5;
          const double py = y + (sy + 0.5) / kSuper - 0.5;
          const Rgb c = face_colour(map.to_face(px, py), f, params.appearance, canonical);
          for (int k = 0; k < 3; ++k) acc[k] += c[k];
        }
      for (int k = 0; k < 3; ++k) {
        data[k * plane + static_cast<std::size_t>(y) * w + x] =
            static_cast<Real>(2.0 * acc[k] / (kSuper * kSuper) - 1.0);
      }
    }

  SyntheticSample sample;
  sample.image = Tensor::from(Shape{1, 3, h, w}, std::move(data));
  for (int i = 0; i < kNumLandmarks; ++i) sample.landmarks.points[i] = map.to_pixel(canonical[i]);
  sample.params = params;
  return sample;
}

std::uint64_t identity_seed(std::uint64_t dataset_seed, std::uint64_t index) {
  return splitmix64(splitmix64(dataset_seed) ^ (index * 0xD1B54A32D192ED03ull));
}

std::uint64_t frame_seed(std::uint64_t identity, std::uint64_t index) {
  return splitmix64(identity ^ splitmix64(index + 0x5851F42D4C957F2Dull));
}

Appearance sample_appearance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Appearance a;
  static constexpr double skin_lo[3] = {0.55, 0.35, 0.25};
  for (int c = 0; c < 3; ++c) a.skin[c] = uniform(rng, skin_lo[c], skin_lo[c] + 0.4);
  for (int c = 0; c < 3; ++c) a.hair[c] = uniform(rng, 0.05, 0.55);
  for (int c = 0; c < 3; ++c) a.eye[c] = uniform(rng, 0.1, 0.7);
  a.face_aspect = uniform(rng, 0.72, 0.90);
  a.eye_size = uniform(rng, 0.11, 0.17);
  a.nose_width = uniform(rng, 0.08, 0.14);
  a.mouth_width = uniform(rng, 0.22, 0.32);
  return a;
}

std::pair<Pose, Expression> sample_frame(std::uint64_t seed, int h, int w) {
  std::mt19937_64 rng(seed);
  Pose p;
  p.shear = uniform(rng, -0.2, 0.2);
  p.rotation = uniform(rng, -0.35, 0.35);
  p.tx = uniform(rng, -0.1 * w, 0.1 * w);
  p.ty = uniform(rng, -0.1 * h, 0.1 * h);
  p.scale = uniform(rng, 0.85, 1.15);
  Expression e;
  e.eye_open_left = uniform(rng, 0.0, 1.0);
  e.eye_open_right = uniform(rng, 0.0, 1.0);
  e.mouth_open = uniform(rng, 0.0, 1.0);
  e.mouth_curve = uniform(rng, -1.0, 1.0);
  e.brow_raise = uniform(rng, -1.0, 1.0);
  return {p, e};
}

SyntheticSample render_frame(std::uint64_t identity, std::uint64_t frame, int resolution) {
  FaceParams params;
  params.appearance = sample_appearance(identity);
  std::tie(params.pose, params.expression) = sample_frame(frame, resolution, resolution);
  return render(params, resolution, resolution);
}

std::pair<SyntheticSample, SyntheticSample> sample_pair(std::uint64_t identity,
                                                        std::uint64_t frame_rng_seed,
                                                        int resolution) {
  std::mt19937_64 rng(frame_rng_seed);
  const std::uint64_t first = rng();
  const std::uint64_t second = rng();
  return {render_frame(identity, first, resolution), render_frame(identity, second, resolution)};
}

std::pair<SyntheticSample, SyntheticSample> cross_pair(std::uint64_t identity_a,
                                                       std::uint64_t identity_b,
                                                       std::uint64_t frame_rng_seed,
                                                       int resolution) {
  if (identity_a == identity_b) {
    throw std::invalid_argument("cross_pair: identities must differ");
  }
  std::mt19937_64 rng(frame_rng_seed);
  const std::uint64_t first = rng();
  const std::uint64_t second = rng();
  return {render_frame(identity_a, first, resolution),
          render_frame(identity_b, second, resolution)};
}

REENACT_NS_END
