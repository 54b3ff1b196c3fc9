#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "sglab/transport.hpp"

using namespace sglab;

namespace {
const double kPi = 3.14159265358979323846;

ParticleCloud torus_cloud(std::vector<Point> pts) { return ParticleCloud::uniform(std::move(pts), true); }

std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> p;
  for (std::size_t i = 0; i < n; ++i) p.emplace_back(u(rng), u(rng));
  return p;
}
}  // namespace

TEST_CASE("assignment examples") {
  ParticleCloud a = torus_cloud({Point(0, 0), Point(0.4, 0)});
  ParticleCloud b = torus_cloud({Point(0.1, 0), Point(0.5, 0)});
  TransportPlan p = exact_assignment(a, b);
  CHECK(p.assignment == std::vector<std::size_t>{0, 1});
  // Unit masses of 1/2 each: cost 0.5 (0.01 + 0.01).
  CHECK(p.cost == doctest::Approx(0.01));

  TransportPlan self = exact_assignment(a, a);
  CHECK(self.assignment == std::vector<std::size_t>{0, 1});
  CHECK(self.cost == 0.0);

  ParticleCloud c = torus_cloud({Point(0.25, 0), Point(0.75, 0)});
  ParticleCloud d = torus_cloud({Point(0.0, 0), Point(0.5, 0)});
  CHECK(exact_assignment(c, d).assignment == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(exact_assignment(a, torus_cloud({Point(0, 0)})), Error);
}

TEST_CASE("assignment picks the lexicographically smallest optimum") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    // Repeated targets create many optimal permutations.
    auto base = random_points(rng, 3);
    std::vector<Point> tb = {base[0], base[1], base[0], base[2], base[1], base[0]};
    ParticleCloud a = torus_cloud(random_points(rng, 6)), b = torus_cloud(tb);
    TransportPlan p = exact_assignment(a, b);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    std::vector<std::size_t> best_perm;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < 6; ++i) s += transport_cost(a.positions[i], b.positions[perm[i]], true) / 6.0;
      if (s < best - 1e-14) {
        best = s;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(p.cost == doctest::Approx(best).epsilon(1e-12));
    CHECK(p.assignment == best_perm);
  }
}

TEST_CASE("assignment beats random permutations") {
  std::mt19937_64 rng(5);
  ParticleCloud a = torus_cloud(random_points(rng, 64)), b = torus_cloud(random_points(rng, 64));
  TransportPlan p = exact_assignment(a, b);
  std::vector<std::size_t> perm(64);
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < 100; ++k) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double s = 0.0;
    for (std::size_t i = 0; i < 64; ++i) s += transport_cost(a.positions[i], b.positions[perm[i]], true) / 64.0;
    CHECK(p.cost <= s + 1e-14);
  }
}

TEST_CASE("W2 examples and symmetry") {
  ParticleCloud x = torus_cloud({Point(0.1, 0.1)}), y = torus_cloud({Point(0.9, 0.1)});
  CHECK(w2_torus(x, y) == doctest::Approx(0.2));
  GridField u(2, 8, 1.0);
  CHECK(w2_torus(u, u) == 0.0);

  std::mt19937_64 rng(2);
  auto pts = random_points(rng, 64, 0.0, 0.2);
  std::vector<Point> shifted;
  for (const auto& p : pts) shifted.push_back(p + Point(0.1, 0.0));
  CHECK(w2_torus(torus_cloud(pts), torus_cloud(shifted)) == doctest::Approx(0.1).epsilon(1e-12));

  for (int k = 0; k < 20; ++k) {
    ParticleCloud a = torus_cloud(random_points(rng, 8)), b = torus_cloud(random_points(rng, 8)),
                  c = torus_cloud(random_points(rng, 8));
    const double ab = w2_torus(a, b), ba = w2_torus(b, a), bc = w2_torus(b, c), ac = w2_torus(a, c);
    CHECK(ab == ba);
    CHECK(ac <= ab + bc + 1e-9);
  }

  ParticleCloud heavy = x;
  heavy.masses[0] = 2.0;
  CHECK_THROWS_AS(w2_torus(heavy, y), Error);
}

TEST_CASE("debiased Sinkhorn agrees with the assignment") {
  std::mt19937_64 rng(9);
  ParticleCloud a = torus_cloud(random_points(rng, 30)), b = torus_cloud(random_points(rng, 30));
  const double exact = w2_torus(a, b);
  W2Options opt;
  opt.exact_limit = 0;
  const double soft = w2_torus(a, b, opt);
  CHECK(soft == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("Laguerre examples in the unit box") {
  Domain box = Domain::box(Point(0, 0), Point(1, 1));
  ParticleCloud one = ParticleCloud::uniform({Point(0.3, 0.8)}, false);
  LaguerreDiagram d1 = solve_laguerre(one, box);
  CHECK(d1.cell_mass[0] == doctest::Approx(1.0));
  CHECK(d1.barycenters[0][0] == doctest::Approx(0.5));
  CHECK(d1.barycenters[0][1] == doctest::Approx(0.5));

  ParticleCloud two = ParticleCloud::uniform({Point(0.25, 0.5), Point(0.75, 0.5)}, false);
  LaguerreDiagram d2 = solve_laguerre(two, box);
  CHECK(d2.barycenters[0][0] == doctest::Approx(0.25));
  CHECK(d2.barycenters[1][0] == doctest::Approx(0.75));
  CHECK(d2.barycenters[1][1] == doctest::Approx(0.5));

  ParticleCloud dup = ParticleCloud::uniform({Point(0.25, 0.5), Point(0.25, 0.5)}, false);
  try {
    solve_laguerre(dup, box);
    FAIL("expected DegenerateCloud");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCloud);
  }
}

TEST_CASE("Laguerre masses, barycentres and the lattice oracle") {
  std::mt19937_64 rng(4);
  Domain box = Domain::box(Point(0, 0), Point(1, 1));
  const int n = 32;
  const int N = n * n;
  // Particles far outside the box exercise the shrink start.
  ParticleCloud c;
  c.dim = 2;
  c.positions = {Point(0.2, 0.3), Point(0.9, 0.1), Point(1.4, 0.7), Point(0.5, -0.3)};
  std::vector<int> cap = {N / 10, 2 * N / 10, 3 * N / 10};
  cap.push_back(N - cap[0] - cap[1] - cap[2]);
  for (int k : cap) c.masses.push_back(static_cast<double>(k) / N);
  LaguerreDiagram d = solve_laguerre(c, box);
  CHECK(d.mass_defect <= 1e-10);
  Point m = Point::zero(2);
  for (std::size_t i = 0; i < c.size(); ++i) m += d.barycenters[i] * d.cell_mass[i];
  CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m[1] == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<Point> lattice;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lattice.emplace_back((i + 0.5) / n, (j + 0.5) / n);
  const double discrete = capacitated_transport_cost(lattice, c.positions, cap);
  const double h = 1.0 / n;
  CHECK(d.cost == doctest::Approx(discrete + h * h / 6).epsilon(0.01));
}

TEST_CASE("Laguerre on the torus") {
  std::mt19937_64 rng(8);
  ParticleCloud c = ParticleCloud::uniform(random_points(rng, 24), true);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  double s = 0.0;
  for (auto& m : c.masses) s += (m = u(rng));
  for (auto& m : c.masses) m /= s;
  LaguerreDiagram d = solve_laguerre(c, Domain::torus(2));
  CHECK(d.mass_defect <= 1e-10);
  double total = 0.0;
  for (double m : d.cell_mass) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  double wm = 0.0;
  for (double w : d.weights) wm += w;
  CHECK(std::abs(wm) < 1e-12);
}

TEST_CASE("3-D Laguerre by quadrature") {
  ParticleCloud c = ParticleCloud::uniform({Point(-0.2, 0.1, 0.0), Point(0.25, -0.1, 0.1), Point(0.0, 0.3, -0.2)}, false);
  LaguerreOptions opt;
  opt.quadrature = 16;
  opt.tol = 1e-9;
  LaguerreDiagram d = solve_laguerre(c, Domain::centered_box(3), opt);
  CHECK(d.mass_defect <= 1e-9);
  Point m = Point::zero(3);
  for (std::size_t i = 0; i < c.size(); ++i) m += d.barycenters[i] * d.cell_mass[i];
  CHECK(norm(m) < 1e-9);
}

namespace {
GridField smooth_density(int n, double a, double phase) {
  GridField r = GridField::sample(2, n, [&](const Point& x) {
    return 1.0 + a * std::sin(2 * kPi * x[0] + phase) * std::cos(2 * kPi * x[1]) + 0.5 * a * std::cos(2 * kPi * (x[0] + x[1]));
  });
  r *= 1.0 / r.mean();
  return r;
}
}  // namespace

TEST_CASE("optimal map and displacement interpolation") {
  const int n = 32;
  GridField r1 = smooth_density(n, 0.3, 0.0), r2 = smooth_density(n, 0.25, 1.3);
  OptimalMap same = optimal_map(r1, r1);
  CHECK(same.u.max_abs() == 0.0);
  CHECK(interpolating_velocity(r1, same, 1.5).v.max_norm() == 0.0);

  OptimalMap m = optimal_map(r1, r2);
  CHECK(m.residual <= 1e-10);
  GridField at1 = interpolant_density(r1, m, 1.0);
  for (std::size_t q = 0; q < r1.size(); ++q) CHECK(at1[q] == r1[q]);
  GridField at2 = interpolant_density(r1, m, 2.0);
  double err = 0.0;
  for (std::size_t q = 0; q < r1.size(); ++q) err = std::max(err, std::abs(at2[q] - r2[q]));
  CHECK(err < 0.02);
  for (double th : {1.25, 1.5, 1.75}) CHECK(interpolant_density(r1, m, th).mean() == doctest::Approx(1.0).epsilon(1e-12));

  InterpolatingVelocity iv = interpolating_velocity(r1, m, 1.5);
  CHECK(iv.kinetic_energy == doctest::Approx(m.w2_squared).epsilon(0.02));

  const double lo = std::min(r1.min(), r2.min()), hi = std::max(r1.max(), r2.max());
  for (double th : {1.0, 1.5, 2.0}) CHECK(interpolant_determinant(m, th).min() >= lo / hi - 10.0 / n);
}

TEST_CASE("translated density: W2 is at most the shift") {
  const int n = 32;
  const Point c(0.05, 0.02);
  GridField r1 = smooth_density(n, 0.3, 0.0);
  GridField r2 = GridField::sample(2, n, [&](const Point& x) {
    const Point y = x - c;
    return 1.0 + 0.3 * std::sin(2 * kPi * y[0]) * std::cos(2 * kPi * y[1]) + 0.15 * std::cos(2 * kPi * (y[0] + y[1]));
  });
  r2 *= 1.0 / r2.mean();
  OptimalMap m = optimal_map(r1, r2);
  CHECK(m.w2_squared <= norm2(c));
  CHECK(m.w2_squared > 0.0);
}

TEST_CASE("continuity equation along the geodesic") {
  const int n = 32;
  GridField r1 = smooth_density(n, 0.3, 0.0), r2 = smooth_density(n, 0.25, 1.3);
  OptimalMap m = optimal_map(r1, r2);
  const double th = 1.5, dth = 0.02;
  GridField rp = interpolant_density(r1, m, th + dth), rm = interpolant_density(r1, m, th - dth);
  InterpolatingVelocity iv = interpolating_velocity(r1, m, th);
  for (int k = 1; k <= 3; ++k) {
    auto f = [k](const Point& x) { return std::sin(2 * kPi * k * x[0] + 0.3) * std::cos(2 * kPi * x[1]); };
    auto fx = [k](const Point& x) { return 2 * kPi * k * std::cos(2 * kPi * k * x[0] + 0.3) * std::cos(2 * kPi * x[1]); };
    auto fy = [k](const Point& x) { return -2 * kPi * std::sin(2 * kPi * k * x[0] + 0.3) * std::sin(2 * kPi * x[1]); };
    GridField F = GridField::sample(2, n, f);
    // Scale: size of the flux integrand, since the integral itself can cancel.
    double dt_int = 0.0, flux = 0.0, scale = 0.0;
    for (std::size_t q = 0; q < F.size(); ++q) {
      const Point x = F.node(q);
      dt_int += F[q] * (rp[q] - rm[q]) / (2 * dth);
      const double g = fx(x) * iv.momentum.comp[0][q] + fy(x) * iv.momentum.comp[1][q];
      flux += g;
      scale += std::abs(g);
    }
    dt_int /= static_cast<double>(F.size());
    flux /= static_cast<double>(F.size());
    scale /= static_cast<double>(F.size());
    CHECK(std::abs(dt_int - flux) <= 0.05 * scale);
  }
}

TEST_CASE("Poisson energy estimate for shear maps") {
  const int n = 64;
  GridField rho0 = GridField::sample(2, n, [](const Point& x) { return std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); });
  GridField ref(2, n);
  std::vector<Point> X1, X2;
  for (std::size_t q = 0; q < ref.size(); ++q) {
    const Point x = ref.node(q);
    X1.push_back(x + Point(0.05 * std::sin(2 * kPi * x[1]), 0.0));
    X2.push_back(x + Point(0.05 * std::sin(2 * kPi * x[1]) + 0.01 * std::cos(2 * kPi * x[1]), 0.0));
  }
  PoissonEstimate same = poisson_energy_estimate(X1, X1, rho0);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
  PoissonEstimate e = poisson_energy_estimate(X1, X2, rho0);
  CHECK(e.holds);
  CHECK(e.lhs < 2.0 * rho0.max_abs() * e.rhs);
}
