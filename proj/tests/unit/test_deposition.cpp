#include <cmath>

#include "doctest.h"
#include "sglab/deposition.hpp"

using namespace sglab;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("polygon helpers") {
  std::vector<Point> sq = {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
  CHECK(polygon_area(sq) == doctest::Approx(1.0));
  auto c = clip_to_rectangle(sq, Point(0.5, -1), Point(2, 0.25));
  CHECK(polygon_area(c) == doctest::Approx(0.125));
  CHECK(clip_to_rectangle(sq, Point(2, 2), Point(3, 3)).empty());
}

TEST_CASE("identity push-forward reproduces the density") {
  GridField rho = GridField::sample(2, 32, [](const Point& x) { return 1 + 0.4 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); });
  GridField out = push_forward(rho, [](const Point&) { return Point(0.0, 0.0); });
  for (std::size_t q = 0; q < rho.size(); ++q) CHECK(out[q] == doctest::Approx(rho[q]).epsilon(1e-13));
}

TEST_CASE("push-forward by a whole-cell shift is a permutation") {
  const int n = 16;
  GridField rho = GridField::sample(2, n, [](const Point& x) { return 1 + 0.4 * std::sin(2 * kPi * x[0]); });
  GridField out = push_forward(rho, [n](const Point&) { return Point(3.0 / n, -2.0 / n); });
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(out[out.flat(i + 3, j - 2)] == doctest::Approx(rho[rho.flat(i, j)]).epsilon(1e-12));
}

TEST_CASE("push-forward conserves mass and matches the change of variables") {
  const int n = 64;
  GridField rho(2, n, 1.0);
  // T(x) = x + a sin(2 pi x1) e1 pushes dx to 1 / (1 + 2 pi a cos(2 pi x1)) at T(x).
  const double a = 0.02;
  auto disp = [a](const Point& x) { return Point(a * std::sin(2 * kPi * x[0]), 0.0); };
  GridField out = push_forward(rho, disp);
  CHECK(out.mean() == doctest::Approx(1.0).epsilon(1e-14));
  double err = 0.0;
  for (std::size_t q = 0; q < out.size(); ++q) {
    const double y = out.node(q)[0];
    double x = y;
    for (int it = 0; it < 50; ++it) x = y - a * std::sin(2 * kPi * x);
    const double exact = 1.0 / (1.0 + 2 * kPi * a * std::cos(2 * kPi * x));
    err = std::max(err, std::abs(out[q] - exact));
  }
  CHECK(err < 5e-3);
}

TEST_CASE("momentum deposition carries a constant velocity") {
  const int n = 32;
  GridField rho = GridField::sample(2, n, [](const Point& x) { return 1 + 0.2 * std::cos(2 * kPi * x[1]); });
  auto dep = push_forward_momentum(rho, [](const Point&) { return Point(0.013, 0.021); },
                                   [](const Point&) { return Point(0.5, -0.25); });
  for (std::size_t q = 0; q < rho.size(); ++q) {
    CHECK(dep.momentum.comp[0][q] == doctest::Approx(0.5 * dep.mass[q]).epsilon(1e-12));
    CHECK(dep.momentum.comp[1][q] == doctest::Approx(-0.25 * dep.mass[q]).epsilon(1e-12));
  }
}
