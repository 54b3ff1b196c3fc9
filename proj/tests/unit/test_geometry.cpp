#include <random>

#include "doctest.h"
#include "sglab/geometry.hpp"

using namespace sglab;

TEST_CASE("wrap maps to the half-open unit cell") {
  Point a = wrap(Point(1.25, -0.5));
  CHECK(a[0] == doctest::Approx(0.25));
  CHECK(a[1] == doctest::Approx(0.5));
  CHECK(wrap(Point(0.0, 0.0)) == Point(0.0, 0.0));
  Point b = wrap(Point(0.999999999, 1.0));
  CHECK(b[0] == 0.999999999);
  CHECK(b[1] == 0.0);
  // Just below an integer, x - floor(x) rounds to 1.0.
  Point c = wrap(Point(-1e-18, 0.3));
  CHECK(c[0] >= 0.0);
  CHECK(c[0] < 1.0);
  CHECK(wrap(wrap(Point(7.3, -2.9))) == wrap(Point(7.3, -2.9)));
}

TEST_CASE("wrap rejects non-finite input") {
  try {
    wrap(Point(std::nan(""), 0.0));
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidPoint);
  }
}

TEST_CASE("torus distance examples") {
  CHECK(torus_distance(Point(0.1, 0.1), Point(0.9, 0.1)) == doctest::Approx(0.2));
  CHECK(torus_distance(Point(0.3, 0.7), Point(0.3, 0.7)) == 0.0);
  CHECK(torus_distance(Point(0.0, 0.0), Point(0.5, 0.5)) == doctest::Approx(std::sqrt(2.0) / 2));
  try {
    torus_distance(Point(0.0, 0.0), Point(0.0, 0.0, 0.0));
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionError);
  }
}

TEST_CASE("torus distance is a metric bounded by sqrt(d)/2") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int d = 2; d <= 3; ++d) {
    for (int k = 0; k < 2000; ++k) {
      auto rp = [&] { return d == 2 ? Point(u(rng), u(rng)) : Point(u(rng), u(rng), u(rng)); };
      Point x = rp(), y = rp(), z = rp();
      const double dxy = torus_distance(x, y), dyx = torus_distance(y, x);
      CHECK(dxy == dyx);
      CHECK(dxy <= std::sqrt(double(d)) / 2 + 1e-15);
      CHECK(torus_distance(x, z) <= dxy + torus_distance(y, z) + 1e-12);
    }
  }
}

TEST_CASE("perp") {
  CHECK(perp(Point(1.0, 0.0)) == Point(0.0, 1.0));
  CHECK(perp(Point(0.0, 0.0, 0.0)) == Point(0.0, 0.0, 0.0));
  CHECK(perp(Point(2.0, 3.0, 5.0)) == Point(-3.0, 2.0, 0.0));
  Point v(0.3, -1.7);
  CHECK(perp(perp(v)) == -v);
  CHECK(dot(perp(v), v) == 0.0);
}

TEST_CASE("domains") {
  Domain box = Domain::centered_box(2);
  CHECK(box.sup_norm() == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(box.measure() == doctest::Approx(1.0));
  CHECK(Domain::torus(3).periodic());
  try {
    Domain::box(Point(0.0, 0.0), Point(1.0, 2.0));
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  Domain ok = Domain::box(Point(0.0, 0.0), Point(2.0, 0.5));
  CHECK(ok.contains(Point(1.5, 0.25)));
  CHECK_FALSE(ok.contains(Point(1.5, 0.75)));
}
