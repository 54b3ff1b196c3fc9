#include <cmath>

#include "doctest.h"
#include "sglab/convergence.hpp"
#include "sglab/spectral.hpp"

using namespace sglab;

namespace {
const double kTwoPi = 6.283185307179586;

GridField vorticity(int n) {
  return GridField::sample(2, n, [](const Point& x) {
    return std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]) + 0.5 * std::cos(kTwoPi * (x[0] + 2 * x[1]));
  });
}

double taylor_gap(const SGEpsState& s) {
  double worst = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const int a = k % 3, b = (k * 7) % 4 - 1 == 0 && a == 0 ? 2 : (k * 7) % 4 - 1;
    auto th = [&](const Point& x) { return std::cos(kTwoPi * (a * x[0] + b * x[1]) + 0.3 * k); };
    double l = 0.0, r = 0.0;
    for (std::size_t q = 0; q < s.rho.size(); ++q) {
      const Point x = s.rho.node(q);
      l += (1.0 + s.eps * s.rho[q]) * th(x);
      r += th(x - s.eps * s.grad_phi.at(q));
    }
    worst = std::max(worst, std::abs(l - r) / static_cast<double>(s.rho.size()));
  }
  return worst;
}
}  // namespace

TEST_CASE("rest state") {
  SGEpsState s = init_sg_eps(GridField(2, 32), 0.1);
  CHECK(s.psi.max_abs() == 0.0);
  CHECK(s.phi.max_abs() == 0.0);
  CHECK(s.grad_phi.max_norm() == 0.0);
  SGEpsState s1 = sg_eps_step(s, 0.01);
  CHECK(s1.rho.max_abs() == 0.0);
  EnergyReport r = modulated_energy(s1, euler_step(init_euler(GridField(2, 32)), 0.01));
  CHECK(r.H == 0.0);
  CHECK(r.G == 0.0);
  CHECK(r.E == 0.0);
  CHECK(r.Q == 0.0);
  CHECK(r.Delta == 0.0);
}

TEST_CASE("eps-MA invariants and errors") {
  GridField w = vorticity(32);
  SGEpsState s = init_sg_eps(w, 0.1);
  CHECK(s.ma_residual <= 1e-10);
  CHECK(std::abs(s.psi.mean()) <= 1e-12);
  GridField full = s.psi * 0.1;
  GridField det = ma_determinant(full);
  for (std::size_t q = 0; q < det.size(); ++q) CHECK(std::abs((det[q] - 1.0) / 0.1 - w[q]) <= 1e-10);
  CHECK_THROWS_AS(init_sg_eps(w, 1.0), Error);  // 1 + rho reaches -0.5
  try {
    init_sg_eps(w * 2.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StateInvalid);
  }
  CHECK_THROWS_AS(init_sg_eps(w + GridField(2, 32, 0.1), 0.1), Error);
  CHECK_THROWS_AS(sg_eps_step(s, 1.0), Error);
}

TEST_CASE("eps to zero recovers the Poisson potential at rate eps") {
  const int n = 128;
  GridField w = vorticity(n);
  VectorField gp = spectral::gradient(poisson_solve_periodic(w));
  std::vector<double> gap;
  for (double eps : {0.1, 0.05, 0.025}) {
    SGEpsState s = init_sg_eps(w, eps);
    double m = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q) m = std::max(m, norm(s.grad_psi.at(q) - gp.at(q)));
    gap.push_back(m);
  }
  CHECK(gap[0] / gap[1] >= 1.8);
  CHECK(gap[1] / gap[2] >= 1.8);
}

TEST_CASE("push-forward identity for trigonometric test functions") {
  // The defect comes from the O(h^2) discrete Monge-Ampere operator and
  // must vanish under refinement.
  const double eps = 0.1;
  const double g32 = taylor_gap(init_sg_eps(vorticity(32), eps));
  const double g64 = taylor_gap(init_sg_eps(vorticity(64), eps));
  CHECK(g64 <= 10.0 * eps / (64.0 * 64.0));
  CHECK(g32 / g64 >= 3.5);
}

TEST_CASE("primal potential is the Legendre transform") {
  const double eps = 0.1;
  SGEpsState s = init_sg_eps(vorticity(32), eps);
  // Phi(x) = |x|^2/2 - eps phi(x) must equal sup_y x.y - Psi(y); check the
  // Fenchel-Young inequality against all nodes y and equality at y = grad Phi(x).
  auto Psi = [&](std::size_t q, const Point& shift) {
    const Point y = s.psi.node(q) + shift;
    return 0.5 * norm2(y) + eps * s.psi[q];
  };
  double worst_gap = 0.0;
  for (std::size_t q = 0; q < s.psi.size(); q += 37) {
    const Point x = s.psi.node(q);
    const double Phi = 0.5 * norm2(x) - eps * s.phi[q];
    for (std::size_t r = 0; r < s.psi.size(); ++r) {
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          const Point sh(a, b);
          worst_gap = std::max(worst_gap, dot(x, s.psi.node(r) + sh) - Psi(r, sh) - Phi);
        }
    }
  }
  // Node sampling of the sup can only undershoot.
  CHECK(worst_gap <= 1e-12);
}

TEST_CASE("well-prepared data") {
  const int n = 64;
  GridField w = vorticity(n);
  EulerState e = init_euler(w);
  std::vector<double> h0;
  for (double eps : {0.2, 0.05}) {
    GridField rho = well_prepared_density(w, eps);
    CHECK(std::abs(rho.mean()) <= 1e-14);
    SGEpsState s = init_sg_eps(rho, eps);
    EnergyReport r = modulated_energy(s, e);
    CHECK(r.H <= eps);
    h0.push_back(r.H);
  }
  // Discretization-limited, not eps-limited.
  CHECK(h0[0] <= 1e-8);
  CHECK(h0[1] <= 1e-8);
  // rho^{eps,0} -> rhobar0 as eps -> 0
  GridField d1 = well_prepared_density(w, 0.1) - w, d2 = well_prepared_density(w, 0.05) - w;
  CHECK(d1.max_abs() / d2.max_abs() == doctest::Approx(2.0).epsilon(0.05));
  CHECK_THROWS_AS(well_prepared_density(w, 5.0), Error);
}

TEST_CASE("energy report bounds") {
  const int n = 64;
  GridField w = vorticity(n);
  EulerState e = init_euler(w);
  EulerNorms nr = euler_norms(e);
  const double d2 = nr.d2;
  // D^2 phibar of the two modes: bounded by |omega|_inf.
  CHECK(d2 <= w.max_abs() + 1e-12);
  CHECK(nr.d3 > 0.0);
  CHECK(nr.d2dt > 0.0);
  for (double eps : {0.1, 0.025}) {
    SGEpsState s = init_sg_eps(well_prepared_density(w, eps), eps);
    EnergyReport r = modulated_energy(s, e);
    CHECK(r.G <= d2 * (r.H + eps * eps));
    CHECK(std::abs(r.Q) <= d2 * r.E * eps);
    CHECK(std::abs(r.Delta) <= nr.d3 * (std::pow(eps, 2.0 / 3.0) + r.H));
    CHECK(r.Delta == doctest::Approx(r.Delta_low + r.Delta_high));
  }
  SGEpsState s = init_sg_eps(w, 0.1);
  EulerState later = euler_step(e, 0.01);
  CHECK_THROWS_AS(modulated_energy(s, later), Error);
}

TEST_CASE("steady eigenmode has zero d_t phibar") {
  GridField w = GridField::sample(2, 32, [](const Point& x) { return std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); });
  EulerNorms nr = euler_norms(init_euler(w));
  CHECK(nr.d2dt <= 1e-12);
  // phibar = -w / (8 pi^2), so |D^2 phibar| = |cos(2 pi (x -+ y))| / 2 at most.
  CHECK(nr.d2 == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("perpendicular-gradient cancellation") {
  for (int n : {32, 64}) {
    EulerState e = init_euler(vorticity(n));
    VectorField g = spectral::gradient(e.psi);
    GridField xx = spectral::second_derivative(e.psi, 0, 0), xy = spectral::second_derivative(e.psi, 0, 1),
              yy = spectral::second_derivative(e.psi, 1, 1);
    double acc = 0.0;
    for (std::size_t q = 0; q < g.comp[0].size(); ++q) {
      const Point x = g.comp[0].node(q);
      const double c = kTwoPi * std::cos(kTwoPi * (x[0] + 3 * x[1]));
      const Point pt = perp(Point(c, 3 * c));
      const Point b = g.at(q);
      acc += pt[0] * (xx[q] * b[0] + xy[q] * b[1]) + pt[1] * (xy[q] * b[0] + yy[q] * b[1]);
    }
    CHECK(std::abs(acc) / static_cast<double>(g.comp[0].size()) <= 1e-12);
  }
}

TEST_CASE("Euler scaling identity") {
  // lambda omega(lambda t) solves Euler too; with dt / lambda the
  // semi-Lagrangian feet coincide, so the two runs agree to rounding.
  const int n = 64;
  GridField w = vorticity(n);
  const double lam = 4.0, dt = 0.02;
  EulerState a = init_euler(w), b = init_euler(w * lam);
  for (int k = 0; k < 10; ++k) {
    a = euler_step(a, dt);
    b = euler_step(b, dt / lam);
  }
  CHECK(std::abs(b.t * lam - a.t) <= 1e-12);
  double m = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q) m = std::max(m, std::abs(b.omega[q] - lam * a.omega[q]));
  CHECK(m <= 1e-11);
}

TEST_CASE("expansion monitor") {
  const int n = 32;
  GridField w = vorticity(n);
  EulerState e = init_euler(w);
  SGEpsState matched = init_sg_eps(w, 0.05);
  ExpansionReport r = expansion_monitor(matched, e);
  CHECK(r.rho1_w1inf == 0.0);
  CHECK(r.residual <= 10.0 * 1e-10 / 0.05);
  SGEpsState wp = init_sg_eps(well_prepared_density(w, 0.05), 0.05);
  ExpansionReport r2 = expansion_monitor(wp, e);
  CHECK(r2.rho1_w1inf > 0.0);
  CHECK(r2.rho1_lip >= r2.rho1_w1inf * 0.5);
  CHECK(r2.residual <= 10.0 * 1e-10 / 0.05);
  CHECK(r2.psi1_c11 > 0.0);
}

TEST_CASE("log-log slope") {
  std::vector<double> x{0.2, 0.1, 0.05}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.7));
  CHECK(loglog_slope(x, y) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({0.1}, {1.0}), Error);
  CHECK_THROWS_AS(loglog_slope({0.1, 0.1}, {1.0, 2.0}), Error);
}

TEST_CASE("sweep bookkeeping") {
  const int n = 32;
  GridField w = vorticity(n);
  SweepOptions o;
  o.n = n;
  o.T = 0.1;
  o.dt = 0.02;
  SweepReport a = eps_sweep(w, {0.2, 0.1}, o);
  o.threads = 2;
  SweepReport b = eps_sweep(w, {0.2, 0.1}, o);
  REQUIRE(a.runs.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(a.runs[i].record.to_csv() == b.runs[i].record.to_csv());
  CHECK(a.table.to_csv() == b.table.to_csv());
  CHECK(a.table.rows.size() == 2);
  CHECK(a.table.rows[0][0] == 0.1);
  CHECK(std::isfinite(a.exponent));
  CHECK(a.runs[0].record.rows.size() == 6);

  // A failing run is recorded and the others continue.
  SweepReport c = eps_sweep(w, {5.0, 0.1}, o);
  CHECK_FALSE(c.runs[0].record.ok());
  CHECK(c.runs[1].record.ok());
  CHECK_FALSE(c.all_ok);
  CHECK_THROWS_AS(eps_sweep(w, {0.1, 0.2}, o), Error);

  o.well_prepared = false;
  PairedRun m = paired_run(w, 0.1, o);
  CHECK(m.record.column("rho1_w1inf")[0] == 0.0);
}
