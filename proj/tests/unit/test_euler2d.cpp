#include <cmath>

#include "doctest.h"
#include "sglab/euler2d.hpp"
#include "sglab/spectral.hpp"

using namespace sglab;

namespace {
const double kPi = 3.14159265358979323846;

double max_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) m = std::max(m, std::abs(a[q] - b[q]));
  return m;
}
}  // namespace

TEST_CASE("periodic Poisson solve") {
  GridField f = GridField::sample(2, 32, [](const Point& x) { return std::sin(2 * kPi * x[0]); });
  GridField psi = poisson_solve_periodic(f);
  for (std::size_t q = 0; q < f.size(); ++q) CHECK(psi[q] == doctest::Approx(-f[q] / (4 * kPi * kPi)).epsilon(1e-12));
  CHECK(max_diff(spectral::laplacian(psi), f) <= 1e-10);
  CHECK(poisson_solve_periodic(GridField(2, 16)).max_abs() == 0.0);
  CHECK_THROWS_AS(poisson_solve_periodic(GridField(2, 16, 0.1)), Error);
}

TEST_CASE("steady Euler states") {
  const int n = 128;
  const double dt = 0.01;
  GridField shear = GridField::sample(2, n, [](const Point& x) { return std::sin(2 * kPi * x[1]); });
  GridField mode = GridField::sample(2, n, [](const Point& x) { return std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]); });
  for (const GridField* w : {&shear, &mode}) {
    EulerState s = init_euler(*w);
    for (int k = 0; k < 100; ++k) s = euler_step(s, dt);
    CHECK(s.t == doctest::Approx(1.0));
    CHECK(max_diff(s.omega, *w) <= 1e-6);
  }
  EulerState rest = euler_step(init_euler(GridField(2, 32)), 0.1);
  CHECK(rest.omega.max_abs() == 0.0);
}

TEST_CASE("Euler energy and extrema for a generic smooth state") {
  const int n = 128;
  GridField w = GridField::sample(2, n, [](const Point& x) {
    return std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]) + 0.5 * std::cos(2 * kPi * (x[0] + 2 * x[1]));
  });
  w += -w.mean();
  EulerState s = init_euler(w);
  const double e0 = kinetic_energy(s), w0 = s.omega.max_abs();
  for (int k = 0; k < 100; ++k) s = euler_step(s, 0.01);
  CHECK(std::abs(kinetic_energy(s) - e0) <= 1e-3 * e0);
  CHECK(s.omega.max_abs() <= w0 + 10.0 / n);
  CHECK(std::abs(s.omega.mean()) <= 1e-12);
}

TEST_CASE("log-Lipschitz modulus") {
  GridField zero(2, 32);
  CHECK(log_lipschitz_modulus(stream_velocity(zero)).C == 0.0);
  auto velocity = [](int n, double lambda) {
    GridField w = GridField::sample(2, n, [&](const Point& x) { return lambda * std::sin(2 * kPi * x[0]); });
    return stream_velocity(poisson_solve_periodic(w));
  };
  const double c32 = log_lipschitz_modulus(velocity(32, 1.0)).C, c64 = log_lipschitz_modulus(velocity(64, 1.0)).C;
  CHECK(c32 > 0.0);
  CHECK(c64 == doctest::Approx(c32).epsilon(0.05));
  CHECK(log_lipschitz_modulus(velocity(32, 3.0)).C == doctest::Approx(3.0 * c32).epsilon(1e-12));
}

TEST_CASE("Yudovich twin run") {
  const int n = 64;
  GridField w = GridField::sample(2, n, [](const Point& x) {
    return std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]) + 0.5 * std::cos(2 * kPi * (x[0] + 2 * x[1]));
  });
  w += -w.mean();
  YudovichOptions opt;
  opt.T = 1.0;
  opt.dt = 0.01;
  YudovichReport same = yudovich_twin_run(w, 0.0, opt);
  for (double e : same.eta) CHECK(e == 0.0);
  YudovichReport r = yudovich_twin_run(w, std::sqrt(2.0) * 1e-6, opt);
  CHECK(r.eta.front() == doctest::Approx(1e-6).epsilon(1e-3));
  CHECK(r.envelope_held);
  CHECK(r.poisson_held);
  CHECK(!std::isfinite(r.exit_time));
}
