#pragma once

// Parametric coil centerlines (meander, twin meander, helical, circular) and
// their discretization into straight filaments. All quantities SI.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfcsim {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

struct Mat3 {
  // row-major
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  static Mat3 rotation_z(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return {{c, -s, 0, s, c, 0, 0, 0, 1}};
  }
  static Mat3 rotation_x(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return {{1, 0, 0, 0, c, -s, 0, s, c}};
  }
  static Mat3 rotation_y(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return {{c, 0, s, 0, 1, 0, -s, 0, c}};
  }
  bool is_orthonormal(double tol = 1e-9) const {
    // R * R^T == I
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += m[3 * i + k] * m[3 * j + k];
        if (std::abs(s - (i == j ? 1.0 : 0.0)) > tol) return false;
      }
    return true;
  }
};

namespace geometry {

constexpr double kMinPointSeparation = 1e-9;

struct CoilPath {
  std::vector<Vec3> points;
  bool closed = false;
  double wire_radius = 0.0;

  void validate() const {
    if (points.size() < 2)
      throw std::invalid_argument("CoilPath: needs at least 2 points");
    if (wire_radius <= 0.0)
      throw std::invalid_argument("CoilPath: wire_radius must be > 0");
    for (size_t i = 1; i < points.size(); ++i)
      if (norm(points[i] - points[i - 1]) <= kMinPointSeparation)
        throw std::invalid_argument("CoilPath: consecutive points coincide");
    if (closed && norm(points.front() - points.back()) <= kMinPointSeparation)
      throw std::invalid_argument(
          "CoilPath: closed path must not repeat the first point");
  }

  // Number of straight legs, including the implicit closing leg.
  size_t segment_count() const {
    return points.size() - 1 + (closed ? 1 : 0);
  }
  Vec3 segment_start(size_t i) const { return points[i]; }
  Vec3 segment_end(size_t i) const {
    return points[(i + 1) % points.size()];
  }

  double length() const {
    double s = 0;
    for (size_t i = 0; i < segment_count(); ++i)
      s += norm(segment_end(i) - segment_start(i));
    return s;
  }

  Vec3 centroid() const {
    Vec3 c;
    for (const auto& p : points) c += p;
    return c * (1.0 / static_cast<double>(points.size()));
  }
};

struct MeanderSpec {
  double panel_width = 0.0;   // span across the runs
  double panel_height = 0.0;  // length of each run
  double wire_spacing = 0.0;  // center-to-center of adjacent runs
  double wire_radius = 0.002;  // knitted conductive trace, effective radius
  int n_runs = 0;

  void validate() const {
    if (n_runs < 2) throw std::invalid_argument("MeanderSpec: n_runs >= 2");
    if (panel_width <= 0 || panel_height <= 0)
      throw std::invalid_argument("MeanderSpec: panel dimensions must be > 0");
    if (wire_radius <= 0)
      throw std::invalid_argument("MeanderSpec: wire_radius must be > 0");
    if (wire_spacing <= 2 * wire_radius)
      throw std::invalid_argument(
          "MeanderSpec: wire_spacing must exceed the wire diameter");
    if ((n_runs - 1) * wire_spacing > panel_width + 1e-12)
      throw std::invalid_argument(
          "MeanderSpec: runs do not fit the panel at the given spacing");
  }
};

struct TwinMeanderSpec {
  MeanderSpec half;
  double separation = 0.05;  // gap between the two congruent halves

  void validate() const {
    half.validate();
    if (separation < 0)
      throw std::invalid_argument("TwinMeanderSpec: separation must be >= 0");
  }
};

struct Placement {
  Vec3 translation;
  Mat3 rotation;

  void validate() const {
    if (!rotation.is_orthonormal())
      throw std::invalid_argument("Placement: rotation is not orthonormal");
  }
};

enum class MotionMode { kStretch, kBend, kRandomSmooth };

struct MotionPerturbation {
  MotionMode mode = MotionMode::kStretch;
  double amplitude = 0.0;          // strain (stretch/bend) or meters (random)
  double spatial_wavelength = 0.3;
  uint64_t seed = 0;

  void validate() const {
    if (amplitude < 0)
      throw std::invalid_argument("MotionPerturbation: amplitude >= 0");
    if (spatial_wavelength <= 0)
      throw std::invalid_argument("MotionPerturbation: wavelength > 0");
  }
};

struct FilamentSet {
  struct Segment {
    Vec3 start, end;
  };
  std::vector<Segment> segments;
  double wire_radius = 0.0;

  double length() const {
    double s = 0;
    for (const auto& seg : segments) s += norm(seg.end - seg.start);
    return s;
  }
};

// Serpentine path: n_runs parallel runs along y, alternating direction,
// connectors along x. Planar, z = 0, starting at the origin corner.
inline CoilPath make_meander(const MeanderSpec& spec) {
  spec.validate();
  CoilPath path;
  path.wire_radius = spec.wire_radius;
  path.points.reserve(2 * static_cast<size_t>(spec.n_runs));
  for (int i = 0; i < spec.n_runs; ++i) {
    double x = i * spec.wire_spacing;
    double y_lo = 0.0, y_hi = spec.panel_height;
    if (i % 2 == 0) {
      path.points.push_back({x, y_lo, 0});
      path.points.push_back({x, y_hi, 0});
    } else {
      path.points.push_back({x, y_hi, 0});
      path.points.push_back({x, y_lo, 0});
    }
  }
  path.validate();
  return path;
}

inline std::pair<CoilPath, CoilPath> make_twin_meander(
    const TwinMeanderSpec& spec) {
  spec.validate();
  CoilPath first = make_meander(spec.half);
  CoilPath second = first;
  double shift = spec.half.panel_width + spec.separation;
  for (auto& p : second.points) p.x += shift;
  return {first, second};
}

// Helical stack of circular loops, axis z, >= 64 points per turn.
inline CoilPath make_circular_coil(double diameter, int turns, double pitch,
                                   double wire_radius,
                                   int points_per_turn = 128) {
  if (wire_radius <= 0 || diameter <= 2 * wire_radius)
    throw std::invalid_argument("make_circular_coil: diameter too small");
  if (turns < 1) throw std::invalid_argument("make_circular_coil: turns >= 1");
  if (points_per_turn < 64) points_per_turn = 64;
  CoilPath path;
  path.wire_radius = wire_radius;
  double r = diameter / 2;
  int n = turns * points_per_turn;
  path.points.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    double t = static_cast<double>(i) / points_per_turn;  // turns
    double a = 2 * M_PI * t;
    path.points.push_back({r * std::cos(a), r * std::sin(a), pitch * t});
  }
  path.validate();
  return path;
}

inline CoilPath make_helical_body_coil(double circumference, int turns,
                                       double pitch, double wire_radius,
                                       int points_per_turn = 128) {
  if (circumference <= 0)
    throw std::invalid_argument("make_helical_body_coil: circumference > 0");
  double diameter = circumference / M_PI;
  return make_circular_coil(diameter, turns, pitch, wire_radius,
                            points_per_turn);
}

inline CoilPath place(const CoilPath& path, const Placement& placement) {
  placement.validate();
  CoilPath out = path;
  for (auto& p : out.points)
    p = placement.rotation.apply(p) + placement.translation;
  return out;
}

// Wraps a planar (z = 0) path onto a cylinder of the given radius, axis y.
// The x coordinate becomes arc length along the circumference.
inline CoilPath wrap_on_cylinder(const CoilPath& path, double radius) {
  if (radius <= 0) throw std::invalid_argument("wrap_on_cylinder: radius > 0");
  CoilPath out = path;
  for (auto& p : out.points) {
    double a = p.x / radius;
    double r = radius + p.z;
    p = {r * std::sin(a), p.y, radius - r * std::cos(a)};
  }
  return out;
}

inline CoilPath deform(const CoilPath& path, const MotionPerturbation& p) {
  p.validate();
  if (p.amplitude == 0.0) return path;
  CoilPath out = path;
  switch (p.mode) {
    case MotionMode::kStretch: {
      // Uniform scale about the centroid: length grows by exactly amplitude.
      Vec3 c = path.centroid();
      for (auto& q : out.points) q = c + (q - c) * (1.0 + p.amplitude);
      break;
    }
    case MotionMode::kBend: {
      // Cylindrical bend about the y axis. Bend radius shrinks as amplitude
      // grows; the map is isometric along x.
      double bend_radius = p.spatial_wavelength / (2 * M_PI * p.amplitude);
      out = wrap_on_cylinder(out, bend_radius);
      break;
    }
    case MotionMode::kRandomSmooth: {
      // Seeded sum of sinusoidal displacement fields, amplitude in meters.
      std::mt19937_64 rng(p.seed);
      std::uniform_real_distribution<double> phase(0, 2 * M_PI);
      std::normal_distribution<double> dir(0.0, 1.0);
      constexpr int kModes = 4;
      struct Mode {
        Vec3 k, d;
        double phi;
      };
      std::array<Mode, kModes> modes;
      for (auto& m : modes) {
        Vec3 kv{dir(rng), dir(rng), dir(rng)};
        Vec3 dv{dir(rng), dir(rng), dir(rng)};
        double kn = norm(kv), dn = norm(dv);
        m.k = kv * (2 * M_PI / (p.spatial_wavelength * (kn > 0 ? kn : 1)));
        m.d = dv * (1.0 / (dn > 0 ? dn : 1));
        m.phi = phase(rng);
      }
      double scale = p.amplitude / kModes;
      for (auto& q : out.points) {
        Vec3 disp;
        for (const auto& m : modes)
          disp += m.d * (scale * std::sin(dot(m.k, q) + m.phi));
        q += disp;
      }
      break;
    }
  }
  return out;
}

inline FilamentSet discretize(const CoilPath& path, double max_seg_len) {
  if (max_seg_len <= 0)
    throw std::invalid_argument("discretize: max_seg_len must be > 0");
  path.validate();
  FilamentSet fs;
  fs.wire_radius = path.wire_radius;
  for (size_t i = 0; i < path.segment_count(); ++i) {
    Vec3 a = path.segment_start(i), b = path.segment_end(i);
    double len = norm(b - a);
    int n = static_cast<int>(std::ceil(len / max_seg_len));
    for (int j = 0; j < n; ++j) {
      double t0 = static_cast<double>(j) / n;
      double t1 = static_cast<double>(j + 1) / n;
      fs.segments.push_back({a + (b - a) * t0, a + (b - a) * t1});
    }
  }
  return fs;
}

// Default filament length for a meander geometry; resolves the inter-run
// field structure.
inline double default_max_seg_len(double wire_spacing) {
  return std::min(wire_spacing / 4.0, 0.005);
}

}  // namespace geometry
}  // namespace nfcsim
