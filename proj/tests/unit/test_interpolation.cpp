#include <cmath>
#include <random>

#include "doctest.h"
#include "sglab/advection.hpp"
#include "sglab/interpolation.hpp"

using namespace sglab;

namespace {
const double kPi = 3.14159265358979323846;
double smooth(const Point& x) { return std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]) + 0.5 * std::cos(2 * kPi * (x[0] + x[1])); }
}

TEST_CASE("interpolation reproduces nodes and converges at its order") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int order : {1, 3, 5}) {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      GridField f = GridField::sample(2, n, smooth);
      CHECK(interpolate(f, f.node(5), order) == doctest::Approx(f[5]).epsilon(1e-14));
      double err = 0.0;
      for (int k = 0; k < 500; ++k) {
        Point x(u(rng), u(rng));
        err = std::max(err, std::abs(interpolate(f, x, order) - smooth(x)));
      }
      if (n > 16) CHECK(std::log2(prev / err) > order + 1 - 0.4);
      prev = err;
    }
  }
}

TEST_CASE("interpolated gradient") {
  GridField f = GridField::sample(2, 64, smooth);
  Point g;
  Point x(0.31, 0.77);
  interpolate_with_gradient(f, x, 5, g);
  const double eps = 1e-6;
  const double gx = (smooth(Point(x[0] + eps, x[1])) - smooth(Point(x[0] - eps, x[1]))) / (2 * eps);
  const double gy = (smooth(Point(x[0], x[1] + eps)) - smooth(Point(x[0], x[1] - eps))) / (2 * eps);
  CHECK(g[0] == doctest::Approx(gx).epsilon(1e-5));
  CHECK(g[1] == doctest::Approx(gy).epsilon(1e-5));
}

TEST_CASE("clipped interpolation stays within the local range") {
  GridField f(2, 16);
  f[f.flat(4, 4)] = 1.0;
  for (double t = 0.0; t < 1.0; t += 0.013) {
    const double v = interpolate_clipped(f, Point(t, 4.0 / 16 + 0.01), 5);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("3-D interpolation of a trilinear function is exact") {
  GridField f = GridField::sample(3, 8, [](const Point& x) { return 1.0 + x[0] * 0.0 + 2.0; });
  CHECK(interpolate(f, Point(0.3, 0.4, 0.9), 5) == doctest::Approx(3.0));
}

TEST_CASE("semi-Lagrangian translation by a constant velocity") {
  const int n = 64;
  GridField f = GridField::sample(2, n, smooth);
  VectorField v(2, n, 2);
  for (std::size_t q = 0; q < f.size(); ++q) {
    v.comp[0][q] = 0.3;
    v.comp[1][q] = -0.2;
  }
  const double dt = 0.1;
  auto dep = departure_points(v, &v, dt);
  GridField g = advect(f, dep);
  double err = 0.0;
  for (std::size_t q = 0; q < f.size(); ++q) {
    Point x = f.node(q);
    err = std::max(err, std::abs(g[q] - smooth(Point(x[0] - 0.03, x[1] + 0.02))));
  }
  CHECK(err < 1e-7);
  std::vector<Point> pts = {Point(0.1, 0.1)};
  advance_points(pts, v, v, dt);
  CHECK(pts[0][0] == doctest::Approx(0.13));
  CHECK(pts[0][1] == doctest::Approx(0.08));
}
