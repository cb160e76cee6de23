#pragma once

// Quasistatic magnetics over straight filaments: Neumann mutual inductance,
// self inductance with finite-wire-radius regularization, and Biot-Savart
// field maps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nfcsim/geometry.hpp"

namespace nfcsim {
namespace magnetics {

constexpr double kMu0 = 4e-7 * M_PI;

using geometry::FilamentSet;

namespace detail {

// 4-point Gauss-Legendre nodes/weights on [0, 1].
constexpr double kGaussNode[4] = {0.06943184420297371, 0.33000947820757187,
                                  0.66999052179242813, 0.93056815579702629};
constexpr double kGaussWeight[4] = {0.17392742256872693, 0.32607257743127307,
                                    0.32607257743127307, 0.17392742256872693};

// Compensated (Kahan) accumulator: keeps the pair double-sum stable to
// reduction order at the 1e-12 level the symmetry contract requires.
struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

inline double segment_pair_neumann(const Vec3& a0, const Vec3& a1,
                                   const Vec3& b0, const Vec3& b1,
                                   double close_dist) {
  Vec3 va = a1 - a0, vb = b1 - b0;
  double dots = dot(va, vb);
  if (dots == 0.0) return 0.0;
  Vec3 ca = (a0 + a1) * 0.5, cb = (b0 + b1) * 0.5;
  double d = norm(ca - cb);
  double la = norm(va), lb = norm(vb);
  if (d > std::max(close_dist, 2.0 * (la + lb))) {
    // midpoint quadrature
    return dots / d;
  }
  // Gauss-Legendre refinement for close pairs; the 1/r kernel varies too
  // fast for a midpoint rule here.
  double acc = 0.0;
  for (int p = 0; p < 4; ++p) {
    Vec3 xa = a0 + va * kGaussNode[p];
    for (int q = 0; q < 4; ++q) {
      Vec3 xb = b0 + vb * kGaussNode[q];
      double r = norm(xa - xb);
      if (r < 1e-15) continue;
      acc += kGaussWeight[p] * kGaussWeight[q] / r;
    }
  }
  return dots * acc;
}

// Exact minimum distance between two straight segments.
inline double segment_segment_distance(const Vec3& p1, const Vec3& q1,
                                       const Vec3& p2, const Vec3& q2) {
  Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double c = dot(d1, r), b = dot(d1, d2);
  double denom = a * e - b * b;
  double s = denom > 1e-30 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0)
                           : 0.0;
  double t = e > 1e-30 ? (b * s + f) / e : 0.0;
  if (t < 0.0) {
    t = 0.0;
    s = a > 1e-30 ? std::clamp(-c / a, 0.0, 1.0) : 0.0;
  } else if (t > 1.0) {
    t = 1.0;
    s = a > 1e-30 ? std::clamp((b - c) / a, 0.0, 1.0) : 0.0;
  }
  return norm((p1 + d1 * s) - (p2 + d2 * t));
}

inline double min_pair_distance(const FilamentSet& a, const FilamentSet& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sa : a.segments)
    for (const auto& sb : b.segments)
      best = std::min(best, segment_segment_distance(sa.start, sa.end,
                                                     sb.start, sb.end));
  return best;
}

}  // namespace detail

struct OverlapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neumann double line integral, midpoint rule with Gauss-Legendre
// refinement for segment pairs closer than 5 wire radii.
inline double mutual_inductance(const FilamentSet& a, const FilamentSet& b) {
  if (detail::min_pair_distance(a, b) <= a.wire_radius + b.wire_radius)
    throw OverlapError("mutual_inductance: filament sets overlap");
  double close = 5.0 * (a.wire_radius + b.wire_radius);
  detail::KahanSum acc;
  for (const auto& sa : a.segments)
    for (const auto& sb : b.segments)
      acc.add(detail::segment_pair_neumann(sa.start, sa.end, sb.start, sb.end,
                                           close));
  return kMu0 / (4 * M_PI) * acc.sum;
}

// Neumann cross terms plus the standard external partial self-inductance of
// a straight round wire, mu0*l/(2pi) * (ln(2l/a) - 1), per segment.
inline double self_inductance(const FilamentSet& a) {
  if (a.wire_radius <= 0)
    throw std::invalid_argument("self_inductance: wire_radius must be > 0");
  double close = 5.0 * (2 * a.wire_radius);
  detail::KahanSum acc;
  size_t n = a.segments.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& si = a.segments[i];
    double li = norm(si.end - si.start);
    acc.add(2.0 * li * (std::log(2.0 * li / a.wire_radius) - 1.0));
    for (size_t j = i + 1; j < n; ++j) {
      const auto& sj = a.segments[j];
      acc.add(2.0 * detail::segment_pair_neumann(si.start, si.end, sj.start,
                                                 sj.end, close));
    }
  }
  return kMu0 / (4 * M_PI) * acc.sum;
}

inline double coupling_coefficient(const FilamentSet& a,
                                   const FilamentSet& b) {
  double la = self_inductance(a);
  double lb = self_inductance(b);
  double m = mutual_inductance(a, b);
  return m / std::sqrt(la * lb);
}

// Convenience: k from a precomputed pair of self inductances.
inline double coupling_coefficient(double m, double l_a, double l_b) {
  return m / std::sqrt(l_a * l_b);
}

struct LinkMatrix {
  std::vector<double> self_L;            // henries per coil
  std::vector<std::vector<double>> mutual_M;  // symmetric, henries
  std::vector<std::vector<double>> k;         // derived, dimensionless
};

inline LinkMatrix link_matrix(const std::vector<FilamentSet>& coils) {
  size_t n = coils.size();
  LinkMatrix lm;
  lm.self_L.resize(n);
  lm.mutual_M.assign(n, std::vector<double>(n, 0.0));
  lm.k.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) lm.self_L[i] = self_inductance(coils[i]);
  for (size_t i = 0; i < n; ++i) {
    lm.mutual_M[i][i] = lm.self_L[i];
    lm.k[i][i] = 1.0;
    for (size_t j = i + 1; j < n; ++j) {
      double m = mutual_inductance(coils[i], coils[j]);
      lm.mutual_M[i][j] = lm.mutual_M[j][i] = m;
      double kk = m / std::sqrt(lm.self_L[i] * lm.self_L[j]);
      lm.k[i][j] = lm.k[j][i] = kk;
    }
  }
  return lm;
}

// Exact field of a finite straight filament carrying current I:
// B = mu0*I/(4*pi*d) * (cos(theta1) - cos(theta2)), direction by right hand.
inline Vec3 segment_field(const Vec3& start, const Vec3& end, const Vec3& at,
                          double current) {
  Vec3 u = end - start;
  double len = norm(u);
  if (len < 1e-15) return {};
  Vec3 r0 = at - start, r1 = at - end;
  double n0 = norm(r0), n1 = norm(r1);
  if (n0 < 1e-15 || n1 < 1e-15) return {};
  Vec3 c = cross(u, r0);
  double c2 = dot(c, c);
  if (c2 < 1e-30) return {};  // on the wire axis
  double ct1 = dot(u, r0) / (len * n0);
  double ct2 = dot(u, r1) / (len * n1);
  double scale = kMu0 * current / (4 * M_PI) * (ct1 - ct2) * len / c2;
  return c * scale;
}

inline Vec3 field_at(const FilamentSet& coil, double current, const Vec3& at) {
  Vec3 b;
  for (const auto& s : coil.segments)
    b += segment_field(s.start, s.end, at, current);
  return b;
}

struct BFieldGrid {
  Vec3 origin;
  Vec3 axis_u, axis_v;  // orthonormal in-plane directions
  int nx = 0, ny = 0;
  double spacing = 0.0;
  struct Sample {
    Vec3 position;
    Vec3 b;        // tesla at the given drive current
    double mag = 0.0;
    bool masked = false;  // inside the wire radius of some filament
  };
  std::vector<Sample> samples;  // row-major, ny rows of nx

  const Sample& at(int ix, int iy) const { return samples[iy * nx + ix]; }
};

struct GridSpec {
  Vec3 origin;
  Vec3 axis_u{1, 0, 0}, axis_v{0, 1, 0};
  int nx = 0, ny = 0;
  double spacing = 0.0;

  void validate() const {
    if (nx <= 0 || ny <= 0 || spacing <= 0)
      throw std::invalid_argument("GridSpec: nx, ny, spacing must be > 0");
  }
};

inline double point_segment_distance(const Vec3& p, const Vec3& a,
                                     const Vec3& b) {
  Vec3 ab = b - a;
  double t = dot(p - a, ab) / dot(ab, ab);
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + ab * t));
}

inline BFieldGrid field_map(const FilamentSet& coil, double current,
                            const GridSpec& spec) {
  spec.validate();
  BFieldGrid grid;
  grid.origin = spec.origin;
  grid.axis_u = spec.axis_u;
  grid.axis_v = spec.axis_v;
  grid.nx = spec.nx;
  grid.ny = spec.ny;
  grid.spacing = spec.spacing;
  grid.samples.resize(static_cast<size_t>(spec.nx) * spec.ny);
  for (int iy = 0; iy < spec.ny; ++iy) {
    for (int ix = 0; ix < spec.nx; ++ix) {
      auto& s = grid.samples[static_cast<size_t>(iy) * spec.nx + ix];
      s.position = spec.origin + spec.axis_u * (ix * spec.spacing) +
                   spec.axis_v * (iy * spec.spacing);
      for (const auto& seg : coil.segments) {
        if (point_segment_distance(s.position, seg.start, seg.end) <=
            coil.wire_radius) {
          s.masked = true;
          break;
        }
      }
      if (!s.masked) {
        s.b = field_at(coil, current, s.position);
        s.mag = norm(s.b);
      }
    }
  }
  return grid;
}

// Maxwell's elliptic-integral formula for two coaxial circular loops,
// used as the independent oracle for the Neumann sum.
inline double coaxial_loops_mutual(double r1, double r2, double separation) {
  double k2 = 4 * r1 * r2 /
              ((r1 + r2) * (r1 + r2) + separation * separation);
  double k = std::sqrt(k2);
  double K = std::comp_ellint_1(k);
  double E = std::comp_ellint_2(k);
  return kMu0 * std::sqrt(r1 * r2) * ((2 / k - k) * K - (2 / k) * E);
}

// Textbook self-inductance of a circular loop of radius R, wire radius a
// (external flux only): mu0 * R * (ln(8R/a) - 2).
inline double circular_loop_self_inductance(double loop_radius,
                                            double wire_radius) {
  return kMu0 * loop_radius * (std::log(8 * loop_radius / wire_radius) - 2.0);
}

}  // namespace magnetics
}  // namespace nfcsim
