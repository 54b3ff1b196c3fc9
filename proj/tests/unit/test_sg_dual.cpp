#include <cmath>
#include <random>

#include "doctest.h"
#include "sglab/fields.hpp"
#include "sglab/sg_dual.hpp"

using namespace sglab;

namespace {
const double kPi = 3.14159265358979323846;

GridField normalized(GridField f) {
  f *= 1.0 / f.mean();
  return f;
}
}  // namespace

TEST_CASE("grid mode rest state") {
  GridField one(2, 32, 1.0);
  SGStateGrid s = init_grid_state(one);
  CHECK(s.v.max_norm() == 0.0);
  SGStateGrid s1 = step_grid(s, 0.01);
  CHECK(s1.v.max_norm() == 0.0);
  for (std::size_t q = 0; q < one.size(); ++q) CHECK(s1.rho[q] == 1.0);
  GridRun run = run_grid(one, 0.1, 0.02);
  CHECK(run.record.ok());
  for (const auto& r : run.record.rows) {
    CHECK(r[run.record.index("dini")] == 0.0);
    CHECK(r[run.record.index("C_t")] == 1.0);
    CHECK(r[run.record.index("dini_bound")] == 0.0);
  }
  CHECK(run.bound_held);
}

TEST_CASE("grid mode radial density is nearly steady") {
  const int n = 32;
  GridField rho = normalized(GridField::sample(2, n, [](const Point& x) {
    const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
    return 1.0 + 0.3 * std::exp(-r2 / 0.02);
  }));
  const double m = rho.min(), M = rho.max(), h = rho.h();
  SGStateGrid s = init_grid_state(rho);
  CHECK(s.v.max_norm() <= std::sqrt(2.0) / 2);
  for (int k = 0; k < 50; ++k) {
    s = step_grid(s, 0.05);
    CHECK(std::abs(s.renorm - 1.0) <= 1e-6);
    CHECK(s.rho.min() >= m - 10 * h);
    CHECK(s.rho.max() <= M + 10 * h);
  }
  CHECK(s.rho.mean() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(s.rho.max() - M) <= 0.01 * M);
}

TEST_CASE("grid mode CFL") {
  GridField rho = normalized(GridField::sample(2, 32, [](const Point& x) { return 1.0 + 0.3 * std::sin(2 * kPi * x[0]); }));
  SGStateGrid s = init_grid_state(rho);
  const double dt = 2.0 * rho.h() / s.v.max_norm();
  CHECK_THROWS_AS(step_grid(s, dt), Error);
  try {
    step_grid(s, dt);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TimestepTooLarge);
  }
}

TEST_CASE("Dini growth bound on a Hoelder density") {
  const int n = 32;
  auto sq = [](double s) { return std::copysign(std::sqrt(std::abs(s)), s); };
  GridField rho = normalized(GridField::sample(2, n, [&](const Point& x) {
    return 1.0 + 0.3 * sq(std::sin(2 * kPi * x[0])) * sq(std::sin(2 * kPi * x[1]));
  }));
  GridRunOptions opt;
  opt.monitor_every = 5;
  GridRun run = run_grid(rho, 1.0, 0.05, opt);
  CHECK(run.record.ok());
  CHECK(run.bound_held);
}

TEST_CASE("single particle orbit in the centred box") {
  const double dt = 0.01;
  ParticleCloud c = ParticleCloud::uniform({Point(0.3, 0.0)}, false);
  const int steps = static_cast<int>(std::llround(2 * kPi / dt));
  SGStateParticles s = init_particle_state(c, Domain::centered_box(2));
  for (int k = 0; k < steps; ++k) s = step_particles(s, dt);
  const double drift = std::abs(norm(s.cloud.positions[0]) - 0.3);
  CHECK(drift <= 1e-6);
  // Closed form: x(t) = 0.3 (cos t, -sin t).
  CHECK(std::abs(s.cloud.positions[0][0] - 0.3 * std::cos(s.t)) < 1e-3);

  ParticleCloud still = ParticleCloud::uniform({Point(0.0, 0.0)}, false);
  SGStateParticles z = init_particle_state(still, Domain::centered_box(2));
  z = step_particles(z, 0.1);
  CHECK(norm(z.cloud.positions[0]) < 1e-15);
}

TEST_CASE("3-D particles keep their vertical coordinate") {
  ParticleCloud c = ParticleCloud::uniform({Point(0.1, 0.2, 0.3), Point(-0.2, 0.05, -0.1), Point(0.15, -0.25, 0.0)}, false);
  LaguerreOptions lag;
  lag.quadrature = 12;
  lag.tol = 1e-9;
  ParticleTrajectory tr = run_particles(c, Domain::centered_box(3), 0.2, 0.05, lag);
  for (const auto& s : tr.states)
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(s.cloud.positions[i][2] == c.positions[i][2]);
  CHECK(tr.states.back().cloud.positions[0][0] != c.positions[0][0]);
}

TEST_CASE("support radius and weak residual") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Point> pts;
  for (int i = 0; i < 32; ++i) pts.emplace_back(u(rng), u(rng));
  const double dt = 0.02;
  ParticleTrajectory tr = run_particles(ParticleCloud::uniform(pts, false), Domain::centered_box(2), 2.0, dt);
  SupportReport sup = support_radius_check(tr, 5 * dt);
  CHECK(sup.C == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(sup.holds);
  for (const auto& s : tr.states) CHECK(s.diagram.mass_defect <= 1e-10);

  TestFunction one{[](double, const Point&) { return 1.0; }, [](double, const Point&) { return 0.0; },
                   [](double, const Point&) { return Point(0.0, 0.0); }};
  CHECK(weak_residual(tr, one) == 0.0);
  TestFunction x1{[](double, const Point& x) { return x[0]; }, [](double, const Point&) { return 0.0; },
                  [](double, const Point&) { return Point(1.0, 0.0); }};
  const double r = weak_residual(tr, x1);
  CHECK(std::abs(r) <= 1e-3);

  ParticleTrajectory bad = tr;
  bad.states[3].diagram.barycenters.clear();
  CHECK_THROWS_AS(weak_residual(bad, x1), Error);
}

TEST_CASE("weak residual converges at second order") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(u(rng), u(rng));
  ParticleCloud c = ParticleCloud::uniform(pts, false);
  TestFunction phi{[](double t, const Point& x) { return std::sin(3 * x[0] + t) * std::cos(2 * x[1]); },
                   [](double t, const Point& x) { return std::cos(3 * x[0] + t) * std::cos(2 * x[1]); },
                   [](double t, const Point& x) {
                     return Point(3 * std::cos(3 * x[0] + t) * std::cos(2 * x[1]), -2 * std::sin(3 * x[0] + t) * std::sin(2 * x[1]));
                   }};
  double prev = 0.0;
  for (double dt : {0.2, 0.1, 0.05}) {
    const double r = std::abs(weak_residual(run_particles(c, Domain::centered_box(2), 1.0, dt), phi));
    if (prev > 0.0) CHECK(prev / r >= 3.5);
    prev = r;
  }
}

TEST_CASE("colliding particles abort") {
  ParticleCloud c = ParticleCloud::uniform({Point(0.1, 0.1), Point(0.1, 0.1 + 1e-10)}, false);
  CHECK_THROWS_AS(init_particle_state(c, Domain::centered_box(2)), Error);
}

TEST_CASE("twin runs") {
  const int n = 32;
  VectorField D0(2, n, 2), bump(2, n, 2), zero(2, n, 2);
  for (std::size_t q = 0; q < D0.comp[0].size(); ++q) {
    const Point x = D0.comp[0].node(q);
    // Gradient of 0.004 sin(2 pi x) sin(2 pi y) / (2 pi).
    D0.set(q, Point(0.004 * std::cos(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]),
                    0.004 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1])));
    const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
    bump.set(q, Point(1.0, 0.5) * std::exp(-r2 / 0.02));
  }
  UniquenessOptions opt;
  opt.T = 0.5;
  opt.dt = 0.05;
  UniquenessReport same = twin_run_uniqueness(D0, zero, opt);
  for (double d : same.distance) CHECK(d == 0.0);

  VectorField b1 = bump, b2 = bump;
  for (auto& c : b1.comp) c *= 1e-3;
  for (auto& c : b2.comp) c *= 5e-4;
  UniquenessReport r1 = twin_run_uniqueness(D0, b1, opt), r2 = twin_run_uniqueness(D0, b2, opt);
  CHECK(r1.envelope_held);
  CHECK(r2.envelope_held);
  for (std::size_t k = 0; k < r1.distance.size(); ++k) CHECK(r2.distance[k] / r1.distance[k] == doctest::Approx(0.5).epsilon(0.1));
}
