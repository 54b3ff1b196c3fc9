#include <cmath>

#include "doctest.h"
#include "sglab/spectral.hpp"

using namespace sglab;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("Poisson eigenfunction") {
  GridField rho = GridField::sample(2, 32, [](const Point& x) { return std::sin(2 * kPi * x[0]); });
  GridField psi = spectral::poisson_solve(rho);
  for (std::size_t q = 0; q < psi.size(); ++q) {
    const double exact = -std::sin(2 * kPi * psi.node(q)[0]) / (4 * kPi * kPi);
    CHECK(psi[q] == doctest::Approx(exact).epsilon(1e-12).scale(1e-3));
  }
  GridField z(2, 16);
  CHECK(spectral::poisson_solve(z).max_abs() == 0.0);
  GridField biased(2, 16, 0.1);
  try {
    spectral::poisson_solve(biased);
    FAIL("expected MeanNotZero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MeanNotZero);
  }
}

TEST_CASE("Poisson round trip in 2-D and 3-D") {
  for (int d = 2; d <= 3; ++d) {
    GridField f = GridField::sample(d, 16, [d](const Point& x) {
      double v = std::sin(2 * kPi * (x[0] + 2 * x[1])) + 0.3 * std::cos(2 * kPi * 3 * x[1]);
      if (d == 3) v += std::cos(2 * kPi * (x[2] - x[0]));
      return v;
    });
    f += -f.mean();
    GridField back = spectral::laplacian(spectral::poisson_solve(f));
    double err = 0.0;
    for (std::size_t q = 0; q < f.size(); ++q) err = std::max(err, std::abs(back[q] - f[q]));
    CHECK(err <= 1e-10 * f.max_abs());
  }
}

TEST_CASE("derivatives of trigonometric fields") {
  GridField u = GridField::sample(2, 32, [](const Point& x) { return std::sin(2 * kPi * x[0]) * std::cos(4 * kPi * x[1]); });
  GridField ux = spectral::derivative(u, 0);
  GridField uxy = spectral::second_derivative(u, 0, 1);
  GridField uxyy = spectral::third_derivative(u, 0, 1, 1);
  for (std::size_t q = 0; q < u.size(); ++q) {
    Point x = u.node(q);
    const double s0 = std::sin(2 * kPi * x[0]), c0 = std::cos(2 * kPi * x[0]);
    const double s1 = std::sin(4 * kPi * x[1]), c1 = std::cos(4 * kPi * x[1]);
    CHECK(ux[q] == doctest::Approx(2 * kPi * c0 * c1).scale(1.0));
    CHECK(uxy[q] == doctest::Approx(-8 * kPi * kPi * c0 * s1).scale(1.0));
    CHECK(uxyy[q] == doctest::Approx(-2 * kPi * 16 * kPi * kPi * c0 * c1).scale(1.0));
  }
}

TEST_CASE("finite-difference Laplacian inverse") {
  const int n = 16;
  GridField f = GridField::sample(2, n, [](const Point& x) { return std::cos(2 * kPi * (x[0] - 3 * x[1])); });
  GridField u = spectral::fd_laplacian_inverse(f);
  const double h = 1.0 / n;
  for (std::size_t q = 0; q < u.size(); ++q) {
    double lap = 0.0;
    for (int a = 0; a < 2; ++a) lap += (u[u.shift(q, a, 1)] - 2 * u[q] + u[u.shift(q, a, -1)]) / (h * h);
    CHECK(lap == doctest::Approx(f[q]).scale(1.0));
  }
}
