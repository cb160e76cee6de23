#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nfcsim/geometry.hpp"

using namespace nfcsim;
using namespace nfcsim::geometry;

TEST_CASE("vec3 and mat3 basics") {
  Vec3 a{1, 2, 3}, b{4, 5, 6};
  CHECK(dot(a, b) == doctest::Approx(32.0));
  Vec3 c = cross(a, b);
  CHECK(c.x == doctest::Approx(-3));
  CHECK(c.y == doctest::Approx(6));
  CHECK(c.z == doctest::Approx(-3));
  CHECK(norm(Vec3{3, 4, 0}) == doctest::Approx(5.0));

  CHECK(Mat3::rotation_x(0.7).is_orthonormal());
  CHECK(Mat3::rotation_y(-1.2).is_orthonormal());
  CHECK(Mat3::rotation_z(2.9).is_orthonormal());
  Mat3 skew;
  skew.m[1] = 0.5;
  CHECK_FALSE(skew.is_orthonormal());

  Vec3 ez = Mat3::rotation_z(M_PI / 2).apply({1, 0, 0});
  CHECK(ez.y == doctest::Approx(1.0));
  CHECK(std::abs(ez.x) < 1e-12);
}

TEST_CASE("coil path validation") {
  CoilPath p;
  p.wire_radius = 0.001;
  p.points = {{0, 0, 0}};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.points.push_back({1, 0, 0});
  CHECK_NOTHROW(p.validate());
  p.wire_radius = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.wire_radius = 0.001;
  p.points.push_back({1, 0, 0});  // coincident
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.points.pop_back();
  p.points.push_back({0, 0, 0});  // repeats first
  p.closed = true;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("coil path segments, length, centroid") {
  CoilPath p;
  p.wire_radius = 0.001;
  p.points = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}};
  CHECK(p.segment_count() == 2);
  CHECK(p.length() == doctest::Approx(2.0));
  p.closed = true;
  CHECK(p.segment_count() == 3);
  CHECK(p.length() == doctest::Approx(2.0 + std::sqrt(2.0)));
  Vec3 c = p.centroid();
  CHECK(c.x == doctest::Approx(2.0 / 3));
  CHECK(c.y == doctest::Approx(1.0 / 3));
}

TEST_CASE("meander construction") {
  MeanderSpec spec;
  spec.n_runs = 6;
  spec.panel_height = 0.65;
  spec.wire_spacing = 0.04;
  spec.wire_radius = 0.002;
  spec.panel_width = 0.2;
  CoilPath p = make_meander(spec);
  CHECK(p.points.size() == 12);
  CHECK_FALSE(p.closed);
  // serpentine: runs along y, connectors along x, planar
  for (const auto& q : p.points) CHECK(q.z == 0.0);
  double expected_len = 6 * 0.65 + 5 * 0.04;
  CHECK(p.length() == doctest::Approx(expected_len));
  // adjacent runs carry anti-parallel current: run directions alternate
  Vec3 run0 = p.points[1] - p.points[0];
  Vec3 run1 = p.points[3] - p.points[2];
  CHECK(dot(run0, run1) < 0);

  SUBCASE("invalid specs") {
    MeanderSpec bad = spec;
    bad.n_runs = 1;
    CHECK_THROWS_AS(make_meander(bad), std::invalid_argument);
    bad = spec;
    bad.wire_spacing = 0.003;  // below wire diameter
    CHECK_THROWS_AS(make_meander(bad), std::invalid_argument);
    bad = spec;
    bad.panel_width = 0.1;  // runs do not fit
    CHECK_THROWS_AS(make_meander(bad), std::invalid_argument);
    bad = spec;
    bad.panel_height = 0;
    CHECK_THROWS_AS(make_meander(bad), std::invalid_argument);
  }
}

TEST_CASE("twin meander congruence") {
  TwinMeanderSpec spec;
  spec.half.n_runs = 6;
  spec.half.panel_height = 0.65;
  spec.half.wire_spacing = 0.04;
  spec.half.wire_radius = 0.002;
  spec.half.panel_width = 0.2;
  spec.separation = 0.05;
  auto [a, b] = make_twin_meander(spec);
  REQUIRE(a.points.size() == b.points.size());
  // identical segment-length multisets
  std::vector<double> la, lb;
  for (size_t i = 0; i < a.segment_count(); ++i) {
    la.push_back(norm(a.segment_end(i) - a.segment_start(i)));
    lb.push_back(norm(b.segment_end(i) - b.segment_start(i)));
  }
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  for (size_t i = 0; i < la.size(); ++i)
    CHECK(la[i] == doctest::Approx(lb[i]).epsilon(1e-12));
  // shifted by panel_width + separation along x
  CHECK(b.points[0].x - a.points[0].x == doctest::Approx(0.25));
  CHECK(b.points[0].y == a.points[0].y);
}

TEST_CASE("circular and helical coils") {
  CoilPath c = make_circular_coil(0.03, 6, 0.0003, 0.0001);
  CHECK(c.points.size() >= 6u * 64 + 1);
  // arc length close to 6 circumferences (pitch is small)
  CHECK(c.length() == doctest::Approx(6 * M_PI * 0.03).epsilon(0.01));
  CHECK(c.points.back().z == doctest::Approx(6 * 0.0003));

  CoilPath h = make_helical_body_coil(0.9, 4, 0.05, 0.002);
  // circumference sets the diameter
  double r_expect = 0.9 / (2 * M_PI);
  CHECK(norm(Vec3{h.points[0].x, h.points[0].y, 0}) ==
        doctest::Approx(r_expect));

  CHECK_THROWS_AS(make_circular_coil(0.0001, 1, 0, 0.0001),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_circular_coil(0.03, 0, 0, 0.0001),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_helical_body_coil(-1, 4, 0.05, 0.002),
                  std::invalid_argument);
}

TEST_CASE("placement is rigid") {
  CoilPath c = make_circular_coil(0.03, 2, 0.001, 0.0001);
  Placement pl;
  pl.rotation = Mat3::rotation_y(0.8);
  pl.translation = {0.1, -0.2, 0.3};
  CoilPath moved = place(c, pl);
  for (size_t i = 1; i < c.points.size(); i += 17) {
    double before = norm(c.points[i] - c.points[0]);
    double after = norm(moved.points[i] - moved.points[0]);
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
  }
  Placement bad;
  bad.rotation.m[0] = 2.0;
  CHECK_THROWS_AS(place(c, bad), std::invalid_argument);
}

TEST_CASE("cylinder wrap preserves x-arc length and y") {
  CoilPath p;
  p.wire_radius = 0.001;
  p.points = {{0, 0, 0}, {0.1, 0, 0}, {0.1, 0.2, 0}};
  CoilPath w = wrap_on_cylinder(p, 0.15);
  CHECK(w.points[0].y == 0.0);
  CHECK(w.points[2].y == doctest::Approx(0.2));
  // x became arc length: chord of the wrapped x-leg < 0.1, same endpoints angle
  double chord = norm(w.points[1] - w.points[0]);
  double expected_chord = 2 * 0.15 * std::sin(0.1 / 0.15 / 2);
  CHECK(chord == doctest::Approx(expected_chord).epsilon(1e-9));
  CHECK_THROWS_AS(wrap_on_cylinder(p, 0.0), std::invalid_argument);
}

TEST_CASE("deformations") {
  MeanderSpec spec;
  spec.n_runs = 4;
  spec.panel_height = 0.3;
  spec.wire_spacing = 0.04;
  spec.wire_radius = 0.002;
  spec.panel_width = 0.12;
  CoilPath p = make_meander(spec);

  SUBCASE("amplitude zero is the identity") {
    for (auto mode : {MotionMode::kStretch, MotionMode::kBend,
                      MotionMode::kRandomSmooth}) {
      MotionPerturbation m;
      m.mode = mode;
      m.amplitude = 0.0;
      CoilPath d = deform(p, m);
      for (size_t i = 0; i < p.points.size(); ++i)
        CHECK(norm(d.points[i] - p.points[i]) == 0.0);
    }
  }

  SUBCASE("stretch grows length by the strain") {
    MotionPerturbation m;
    m.mode = MotionMode::kStretch;
    m.amplitude = 0.05;
    CoilPath d = deform(p, m);
    CHECK(d.length() == doctest::Approx(p.length() * 1.05).epsilon(0.005));
  }

  SUBCASE("random smooth is seed-deterministic") {
    MotionPerturbation m;
    m.mode = MotionMode::kRandomSmooth;
    m.amplitude = 0.01;
    m.seed = 99;
    CoilPath d1 = deform(p, m);
    CoilPath d2 = deform(p, m);
    for (size_t i = 0; i < d1.points.size(); ++i)
      CHECK(norm(d1.points[i] - d2.points[i]) == 0.0);
    m.seed = 100;
    CoilPath d3 = deform(p, m);
    double total = 0;
    for (size_t i = 0; i < d1.points.size(); ++i)
      total += norm(d1.points[i] - d3.points[i]);
    CHECK(total > 0.0);
  }

  SUBCASE("invalid perturbations") {
    MotionPerturbation m;
    m.amplitude = -1;
    CHECK_THROWS_AS(deform(p, m), std::invalid_argument);
    m.amplitude = 0.1;
    m.spatial_wavelength = 0;
    CHECK_THROWS_AS(deform(p, m), std::invalid_argument);
  }
}

TEST_CASE("discretize") {
  CoilPath p;
  p.wire_radius = 0.001;
  p.points = {{0, 0, 0}, {1, 0, 0}};

  SUBCASE("straight 1 m path at 0.1 gives 10 equal segments") {
    FilamentSet fs = discretize(p, 0.1);
    CHECK(fs.segments.size() == 10);
    for (const auto& s : fs.segments)
      CHECK(norm(s.end - s.start) == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("arc length preserved within 1e-9 relative") {
    CoilPath c = make_circular_coil(0.04, 3, 0.001, 0.0005);
    FilamentSet fs = discretize(c, 0.002);
    CHECK(fs.length() == doctest::Approx(c.length()).epsilon(1e-9));
    for (const auto& s : fs.segments)
      CHECK(norm(s.end - s.start) <= 0.002 + 1e-12);
  }

  SUBCASE("halving max_seg_len at least doubles counts on curves") {
    CoilPath c = make_circular_coil(0.04, 1, 0, 0.0005);
    size_t n1 = discretize(c, 0.001).segments.size();
    size_t n2 = discretize(c, 0.0005).segments.size();
    CHECK(n2 >= 2 * n1);
  }

  CHECK_THROWS_AS(discretize(p, 0.0), std::invalid_argument);
  CHECK(default_max_seg_len(0.04) == doctest::Approx(0.005));
  CHECK(default_max_seg_len(0.012) == doctest::Approx(0.003));
}
