#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "sglab/fields.hpp"

using namespace sglab;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("grid layout is row-major with the last axis fastest") {
  GridField f(2, 8);
  CHECK(f.flat(1, 2) == 10u);
  CHECK(f.node(10)[0] == doctest::Approx(1.0 / 8));
  CHECK(f.node(10)[1] == doctest::Approx(2.0 / 8));
  CHECK(f.shift(f.flat(7, 0), 0, 1) == f.flat(0, 0));
  CHECK(f.shift(f.flat(0, 0), 1, -1) == f.flat(0, 7));
  GridField g(3, 4);
  CHECK(g.flat(1, 2, 3) == 16u + 8u + 3u);
}

TEST_CASE("modulus of continuity") {
  GridField c(2, 16, 3.0);
  auto w0 = modulus_of_continuity(c, {0.1, 0.3, 0.5});
  for (double w : w0) CHECK(w == 0.0);

  GridField s = GridField::sample(2, 32, [](const Point& x) { return std::sin(2 * kPi * x[0]); });
  auto w = modulus_of_continuity(s, {0.5});
  CHECK(w[0] == doctest::Approx(2.0).epsilon(1e-12));

  // |x1 - 1/2|^{1/2}: the worst pair straddles the kink, w(r) ~ r^{1/2}.
  const int n = 64;
  GridField k = GridField::sample(2, n, [](const Point& x) { return std::sqrt(std::abs(x[0] - 0.5)); });
  std::vector<double> radii = {2.0 / n, 4.0 / n, 8.0 / n, 16.0 / n};
  auto wk = modulus_of_continuity(k, radii);
  // Least-squares slope in log-log coordinates.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double lx = std::log(radii[i]), ly = std::log(wk[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  const double m = radii.size();
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope == doctest::Approx(0.5).epsilon(0.05));
  for (std::size_t i = 1; i < wk.size(); ++i) CHECK(wk[i] >= wk[i - 1]);
  CHECK(wk.back() <= k.max() - k.min());
}

TEST_CASE("modulus input validation") {
  GridField c(2, 16);
  CHECK_THROWS_AS(modulus_of_continuity(c, {}), Error);
  CHECK_THROWS_AS(modulus_of_continuity(c, {0.3, 0.1}), Error);
  CHECK_THROWS_AS(modulus_of_continuity(c, {0.6}), Error);
}

TEST_CASE("Dini seminorm") {
  GridField c(2, 16, 1.0);
  CHECK(dini_seminorm(c).value == 0.0);
  const double I = dini_integral([](double r) { return std::sqrt(r); }, 1e-6);
  CHECK(I == doctest::Approx(2.0).epsilon(0.05));
  GridField s = GridField::sample(2, 32, [](const Point& x) { return std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); });
  auto d = dini_seminorm(s);
  CHECK(d.value > 0.0);
  CHECK(std::isfinite(d.value));
  CHECK(d.r_min == doctest::Approx(1.0 / 32));
}

TEST_CASE("envelope and signed split") {
  GridField one(2, 16, 1.0);
  auto e1 = linf_envelope(one);
  CHECK(e1.first == 1.0);
  CHECK(e1.second == 1.0);
  GridField r = GridField::sample(2, 16, [](const Point& x) { return 1 + 0.3 * std::sin(2 * kPi * x[0]); });
  auto e = linf_envelope(r);
  CHECK(e.first == doctest::Approx(0.7));
  CHECK(e.second == doctest::Approx(1.3));

  const int n = 64;
  GridField f = GridField::sample(2, n, [](const Point& x) { return std::sin(2 * kPi * x[0]); });
  auto [fp, fm] = signed_split(f);
  // Positive part integral of sin over a period is 1/pi; the trapezoid rule on
  // the node grid is exact up to the kink correction, well inside 1e-3.
  CHECK(fp.mean() == doctest::Approx(1.0 / kPi).epsilon(1e-3));
  CHECK(std::abs(fp.mean() - fm.mean()) <= 1e-12);
  double l1 = 0.0;
  for (double v : f.values()) l1 += std::abs(v);
  l1 /= f.size();
  CHECK(fp.mean() == doctest::Approx(0.5 * l1).epsilon(1e-10));
  for (std::size_t q = 0; q < f.size(); ++q) CHECK(fp[q] - fm[q] == doctest::Approx(f[q]));

  GridField z(2, 16);
  auto [zp, zm] = signed_split(z);
  CHECK(zp.max_abs() == 0.0);
  CHECK(zm.max_abs() == 0.0);

  GridField biased(2, 16, 0.1);
  try {
    signed_split(biased);
    FAIL("expected MeanNotZero");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::MeanNotZero);
  }
}

TEST_CASE("field CSV round trip is exact") {
  GridField f = GridField::sample(2, 8, [](const Point& x) { return std::exp(x[0]) / 3.0 + x[1] * 1e-17; });
  std::string kind;
  GridField g = field_from_csv(field_to_csv(f, "potential-dual"), &kind);
  CHECK(kind == "potential-dual");
  for (std::size_t q = 0; q < f.size(); ++q) CHECK(f[q] == g[q]);
  CHECK(field_to_csv(f).rfind("# gridfield d=2 n=8\n", 0) == 0);
  CHECK_THROWS_AS(field_from_csv("# gridfield d=2 n=2\n1\n2\n"), Error);
}

TEST_CASE("cloud CSV round trip") {
  ParticleCloud c = ParticleCloud::uniform({Point(0.1, 0.2), Point(0.3, 0.4)}, true);
  auto path = (std::filesystem::temp_directory_path() / "sglab_cloud_test.csv").string();
  write_cloud_csv(path, c);
  ParticleCloud d = read_cloud_csv(path, true);
  REQUIRE(d.size() == 2);
  CHECK(d.positions[1] == c.positions[1]);
  CHECK(d.masses[0] == 0.5);
  std::remove(path.c_str());
}

TEST_CASE("density bounds tag") {
  GridField r(2, 8, 1.0);
  r.set_bounds(0.5, 1.5);
  CHECK_NOTHROW(r.check_bounds());
  r[3] = 2.0;
  CHECK_THROWS_AS(r.check_bounds(), Error);
}
