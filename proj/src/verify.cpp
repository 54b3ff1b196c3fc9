#include "sglab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>

#include "sglab/convergence.hpp"
#include "sglab/euler2d.hpp"
#include "sglab/fields.hpp"
#include "sglab/plot.hpp"
#include "sglab/sg_dual.hpp"
#include "sglab/transport.hpp"

namespace sglab {

namespace {

const double kTwoPi = 6.283185307179586;

std::string fmt(const char* f, ...) {
  char b[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(b, sizeof b, f, ap);
  va_end(ap);
  return b;
}

using Rng = std::mt19937_64;

double uni(Rng& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
int uni_int(Rng& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

GridField normalized(GridField f) {
  f *= 1.0 / f.mean();
  return f;
}

// A few random Fourier modes, scaled so that min/max >= ratio.
GridField smooth_density(Rng& g, int n, double ratio) {
  const int K = uni_int(g, 1, 4);
  std::vector<std::array<double, 4>> modes;
  for (int k = 0; k < K; ++k)
    modes.push_back({double(uni_int(g, -2, 2)), double(uni_int(g, 1, 2)), uni(g, 0, kTwoPi), uni(g, 0.2, 1.0)});
  GridField f = GridField::sample(2, n, [&](const Point& x) {
    double s = 0.0;
    for (const auto& m : modes) s += m[3] * std::cos(kTwoPi * (m[0] * x[0] + m[1] * x[1]) + m[2]);
    return s;
  });
  const double lo = f.min(), hi = f.max();
  // 1 + a f with (1 + a lo) / (1 + a hi) = ratio
  const double a = (1.0 - ratio) / (ratio * hi - lo);
  f *= a;
  f += 1.0;
  return normalized(f);
}

// 1 + A sgn(s)|s|^alpha with s a random plane wave: Hoelder with exponent alpha.
GridField holder_density(Rng& g, int n) {
  const double alpha = uni(g, 0.3, 0.8), A = uni(g, 0.2, 0.5);
  const double k0 = uni_int(g, 1, 2), k1 = uni_int(g, 0, 2), ph = uni(g, 0, kTwoPi);
  const double ph2 = uni(g, 0, kTwoPi);
  return normalized(GridField::sample(2, n, [&](const Point& x) {
    const double s = std::sin(kTwoPi * (k0 * x[0] + k1 * x[1]) + ph);
    const double c = std::sin(kTwoPi * x[1] + ph2);
    return 1.0 + A * std::copysign(std::pow(std::abs(s), alpha), s) * (0.6 + 0.4 * c);
  }));
}

// Sum of Gaussian bumps over a small floor: strongly concentrated densities.
GridField blob_density(Rng& g, int n) {
  const int K = uni_int(g, 1, 3);
  std::vector<std::array<double, 4>> b;
  for (int k = 0; k < K; ++k) b.push_back({uni(g, 0, 1), uni(g, 0, 1), uni(g, 0.06, 0.15), uni(g, 2, 10)});
  return normalized(GridField::sample(2, n, [&](const Point& x) {
    double s = 0.2;
    for (const auto& c : b) s += c[3] * std::exp(-norm2(torus_delta(Point(c[0], c[1]), x)) / (2 * c[2] * c[2]));
    return s;
  }));
}

std::vector<Point> identity_nodes(int n) {
  GridField r(2, n);
  std::vector<Point> X(r.size());
  for (std::size_t q = 0; q < X.size(); ++q) X[q] = r.node(q);
  return X;
}

// ---------------------------------------------------------------- criteria

CriterionResult c1_ma_manufactured(const VerifyOptions& opt) {
  CriterionResult r{1, "MA manufactured solution", false, "", 0};
  const double a = 0.01 / (kTwoPi * kTwoPi);
  std::vector<int> ns = opt.full ? std::vector<int>{32, 64, 128} : std::vector<int>{16, 32, 64};
  std::vector<double> err, res;
  for (int n : ns) {
    // Exact determinant of I + D^2 psi*, psi* = a sin sin.
    GridField rho = GridField::sample(2, n, [a](const Point& x) {
      const double k2 = kTwoPi * kTwoPi;
      const double s0 = std::sin(kTwoPi * x[0]), c0 = std::cos(kTwoPi * x[0]);
      const double s1 = std::sin(kTwoPi * x[1]), c1 = std::cos(kTwoPi * x[1]);
      const double pxx = -a * k2 * s0 * s1, pxy = a * k2 * c0 * c1;
      return (1 + pxx) * (1 + pxx) - pxy * pxy;
    });
    rho = normalized(rho);
    MAOptions ma;
    ma.tol = opt.ma_tol;
    MASolution s = solve_ma_periodic(rho, ma);
    VectorField d = displacement(s.potential);
    double e = 0.0;
    for (std::size_t q = 0; q < rho.size(); ++q) {
      const Point x = rho.node(q);
      const double gx = a * kTwoPi * std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]);
      const double gy = a * kTwoPi * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
      e = std::max({e, std::abs(d.comp[0][q] - gx), std::abs(d.comp[1][q] - gy)});
    }
    err.push_back(e);
    res.push_back(s.residual);
  }
  double order = 1e300, rmax = 0.0;
  for (std::size_t i = 1; i < err.size(); ++i) order = std::min(order, std::log2(err[i - 1] / err[i]));
  for (double v : res) rmax = std::max(rmax, v);
  r.passed = order >= 1.8 && rmax <= 1e-9;
  r.detail = fmt("min order %.3f (>= 1.8), max residual %.2e (<= 1e-9), errors %.2e %.2e %.2e", order, rmax, err[0], err[1], err[2]);
  return r;
}

CriterionResult c2_velocity_bound(const VerifyOptions& opt) {
  CriterionResult r{2, "unconditional velocity bound", false, "", 0};
  Rng g(opt.seed + 2);
  const int n = 32, count = opt.full ? 50 : 12;
  const double bound = std::sqrt(2.0) / 2 + 1.0 / n;
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < count; ++k) {
    GridField rho = k % 3 == 0 ? smooth_density(g, n, uni(g, 0.05, 0.5)) : k % 3 == 1 ? holder_density(g, n) : blob_density(g, n);
    MAOptions ma;
    ma.tol = opt.ma_tol;
    try {
      MASolution s = solve_ma_periodic(rho, ma);
      worst = std::max(worst, displacement(s.potential).max_norm());
    } catch (const Error&) {
      ++failures;
    }
  }
  r.passed = failures == 0 && worst <= bound;
  r.detail = fmt("%d densities, max |grad Psi - x| %.4f (<= %.4f), solver failures %d", count, worst, bound, failures);
  return r;
}

CriterionResult c3_laguerre_vs_exact(const VerifyOptions& opt) {
  CriterionResult r{3, "semi-discrete vs exact transport", false, "", 0};
  Rng g(opt.seed + 3);
  const int n = opt.full ? 64 : 32, count = opt.full ? 20 : 6;
  const int N = n * n;
  const double h = 1.0 / n;
  Domain box = Domain::box(Point(0, 0), Point(1, 1));
  std::vector<Point> lattice;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lattice.emplace_back((i + 0.5) * h, (j + 0.5) * h);
  double worst_rel = 0.0, worst_defect = 0.0;
  for (int k = 0; k < count; ++k) {
    const int P = uni_int(g, 2, 64);
    ParticleCloud c;
    c.dim = 2;
    std::vector<double> w;
    for (int i = 0; i < P; ++i) {
      c.positions.emplace_back(uni(g, -0.2, 1.2), uni(g, -0.2, 1.2));
      w.push_back(uni(g, 0.5, 1.5));
    }
    double ws = 0.0;
    for (double v : w) ws += v;
    std::vector<int> cap(static_cast<std::size_t>(P));
    int used = 0;
    for (int i = 0; i < P; ++i) {
      cap[i] = std::max(1, static_cast<int>(std::floor(w[i] / ws * N)));
      used += cap[i];
    }
    cap[static_cast<std::size_t>(P - 1)] += N - used;
    for (int v : cap) c.masses.push_back(static_cast<double>(v) / N);
    LaguerreOptions lo;
    lo.tol = 1e-9;
    LaguerreDiagram d = solve_laguerre(c, box, lo);
    const double exact = capacitated_transport_cost(lattice, c.positions, cap) + h * h / 6;
    worst_rel = std::max(worst_rel, std::abs(d.cost - exact) / exact);
    worst_defect = std::max(worst_defect, d.mass_defect);
  }
  r.passed = worst_rel <= 0.01 && worst_defect <= 1e-6;
  r.detail = fmt("%d instances on a %dx%d lattice, max relative cost gap %.2e (<= 1e-2), max mass defect %.1e (<= 1e-6)",
                 count, n, n, worst_rel, worst_defect);
  return r;
}

CriterionResult c4_w2_axioms(const VerifyOptions& opt) {
  CriterionResult r{4, "W2 metric axioms", false, "", 0};
  Rng g(opt.seed + 4);
  const int count = opt.full ? 200 : 50;
  int asym = 0;
  double worst = -1e300;
  auto cloud = [&] {
    std::vector<Point> p;
    for (int i = 0; i < 8; ++i) p.emplace_back(uni(g, 0, 1), uni(g, 0, 1));
    return ParticleCloud::uniform(p, true);
  };
  for (int k = 0; k < count; ++k) {
    ParticleCloud a = cloud(), b = cloud(), c = cloud();
    const double ab = w2_torus(a, b), ba = w2_torus(b, a), bc = w2_torus(b, c), ac = w2_torus(a, c);
    if (ab != ba) ++asym;
    worst = std::max(worst, ac - ab - bc);
    if (w2_torus(a, a) != 0.0) ++asym;
  }
  r.passed = asym == 0 && worst <= 1e-9;
  r.detail = fmt("%d triples, asymmetric or nonzero self-distance %d, max triangle excess %.2e (<= 1e-9)", count, asym, worst);
  return r;
}

CriterionResult c5_displacement_convexity(const VerifyOptions& opt) {
  CriterionResult r{5, "displacement convexity", false, "", 0};
  Rng g(opt.seed + 5);
  const int n = 32, count = opt.full ? 100 : 20;
  const std::vector<double> th{1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9};
  int bad = 0;
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    GridField a = smooth_density(g, n, uni(g, 0.3, 0.8)), b = smooth_density(g, n, uni(g, 0.3, 0.8));
    ConvexityReport c = displacement_convexity_check(a, b, th, 0.02);
    worst = std::max(worst, c.sup / c.bound);
    if (c.violated) ++bad;
  }
  r.passed = bad == 0;
  r.detail = fmt("%d pairs, max sup_theta |rho_theta|_inf / max endpoint %.4f (<= 1.02), violations %d", count, worst, bad);
  return r;
}

CriterionResult c6_interpolant_determinant(const VerifyOptions& opt) {
  CriterionResult r{6, "interpolant determinant bound", false, "", 0};
  Rng g(opt.seed + 6);
  const int n = 32, count = opt.full ? 20 : 6;
  double worst = 1e300;
  for (int k = 0; k < count; ++k) {
    GridField a = smooth_density(g, n, uni(g, 0.2, 0.7)), b = smooth_density(g, n, uni(g, 0.2, 0.7));
    const double m = std::min(a.min(), b.min()), M = std::max(a.max(), b.max());
    OptimalMap map = optimal_map(a, b);
    for (double th = 1.0; th <= 2.0 + 1e-12; th += 0.125)
      worst = std::min(worst, interpolant_determinant(map, th).min() - (m / M - 10.0 / n));
  }
  r.passed = worst >= 0.0;
  r.detail = fmt("%d instances, min over nodes and theta of det - (m/M - 10h) = %.4f (>= 0)", count, worst);
  return r;
}

CriterionResult c7_energy_estimate(const VerifyOptions& opt) {
  CriterionResult r{7, "map-to-potential energy estimate", false, "", 0};
  Rng g(opt.seed + 7);
  const int n = 32, count = opt.full ? 10 : 3;
  double worst_spread = 0.0, worst_mismatch = 0.0;
  GridField one(2, n, 1.0);
  for (int k = 0; k < count; ++k) {
    OptimalMap base = optimal_map(one, holder_density(g, n));
    std::vector<Point> X1 = identity_nodes(n);
    for (std::size_t q = 0; q < X1.size(); ++q) X1[q] += base.grad_u.at(q);
    const Point c(uni(g, 0, 1), uni(g, 0, 1));
    const Point dir(uni(g, -1, 1), uni(g, -1, 1));
    std::vector<double> ratios;
    for (double delta : {1e-2, 1e-3, 1e-4}) {
      std::vector<Point> X2 = X1;
      for (std::size_t q = 0; q < X2.size(); ++q)
        X2[q] += dir * (delta * std::exp(-norm2(torus_delta(c, one.node(q))) / 0.02));
      GeodesicEstimate e = geodesic_energy_estimate(X1, X2, n, delta == 1e-2);
      ratios.push_back(e.ratio);
      if (delta == 1e-2) worst_mismatch = std::max(worst_mismatch, e.elliptic_mismatch);
    }
    const double lo = *std::min_element(ratios.begin(), ratios.end()), hi = *std::max_element(ratios.begin(), ratios.end());
    worst_spread = std::max(worst_spread, lo > 0 ? hi / lo : 1e300);
  }
  r.passed = worst_spread <= 2.0 && worst_mismatch <= 0.05;
  r.detail = fmt("%d twin maps, max ratio spread over delta in {1e-2,1e-3,1e-4} %.3f (<= 2), max elliptic mismatch %.3f (<= 0.05)",
                 count, worst_spread, worst_mismatch);
  return r;
}

CriterionResult c8_poisson_estimate(const VerifyOptions& opt) {
  CriterionResult r{8, "Poisson energy estimate", false, "", 0};
  Rng g(opt.seed + 8);
  const int n = 64, count = opt.full ? 20 : 5;
  int bad = 0;
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const double k0 = uni_int(g, 1, 2), k1 = uni_int(g, 0, 2), ph = uni(g, 0, kTwoPi);
    GridField rho0 = GridField::sample(2, n, [&](const Point& x) { return std::sin(kTwoPi * (k0 * x[0] + k1 * x[1]) + ph); });
    rho0 += -rho0.mean();
    const double a1 = uni(g, 0.01, 0.08), a2 = uni(g, 0.001, 0.02), p1 = uni(g, 0, kTwoPi), p2 = uni(g, 0, kTwoPi);
    const bool vertical = k % 2 == 1;
    std::vector<Point> X1, X2;
    for (const Point& x : identity_nodes(n)) {
      const double s = vertical ? x[0] : x[1];
      const double d1 = a1 * std::sin(kTwoPi * s + p1), d2 = d1 + a2 * std::cos(kTwoPi * s + p2);
      // Shears are exactly measure preserving.
      X1.push_back(vertical ? x + Point(0, d1) : x + Point(d1, 0));
      X2.push_back(vertical ? x + Point(0, d2) : x + Point(d2, 0));
    }
    PoissonEstimate e = poisson_energy_estimate(X1, X2, rho0);
    worst = std::max(worst, e.lhs / e.bound);
    if (!e.holds) ++bad;
  }
  r.passed = bad == 0;
  r.detail = fmt("%d instances, max lhs / bound %.3f (<= 1), violations %d", count, worst, bad);
  return r;
}

CriterionResult c9_support(const VerifyOptions& opt) {
  CriterionResult r{9, "support growth and orbit", false, "", 0};
  Rng g(opt.seed + 9);
  const double dt = 0.02, T = opt.full ? 2.0 : 0.5;
  std::vector<Point> pts;
  for (int i = 0; i < 32; ++i) pts.emplace_back(uni(g, -0.5, 0.5), uni(g, -0.5, 0.5));
  ParticleTrajectory tr = run_particles(ParticleCloud::uniform(pts, false), Domain::centered_box(2), T, dt);
  SupportReport sup = support_radius_check(tr, 5 * dt);
  const double odt = 0.01;
  const int steps = static_cast<int>(std::llround(kTwoPi / odt));
  SGStateParticles s = init_particle_state(ParticleCloud::uniform({Point(0.3, 0.0)}, false), Domain::centered_box(2));
  for (int k = 0; k < steps; ++k) s = step_particles(s, odt);
  const double drift = std::abs(norm(s.cloud.positions[0]) - 0.3);
  r.passed = sup.holds && drift <= 1e-6;
  r.detail = fmt("32 particles to T = %.1f: max excess over R0 + C t %.2e (<= 5 dt = %.2e); orbit radius drift %.2e (<= 1e-6)",
                 T, sup.worst_excess, 5 * dt, drift);
  return r;
}

CriterionResult c10_weak_residual(const VerifyOptions& opt) {
  CriterionResult r{10, "weak residual", false, "", 0};
  Rng g(opt.seed + 10);
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(uni(g, -0.4, 0.4), uni(g, -0.4, 0.4));
  ParticleCloud c = ParticleCloud::uniform(pts, false);
  std::vector<double> dts = opt.full ? std::vector<double>{0.2, 0.1, 0.05} : std::vector<double>{0.2, 0.1};
  std::vector<ParticleTrajectory> trs;
  for (double dt : dts) trs.push_back(run_particles(c, Domain::centered_box(2), 1.0, dt));
  TestFunction one{[](double, const Point&) { return 1.0; }, [](double, const Point&) { return 0.0; },
                   [](double, const Point&) { return Point(0.0, 0.0); }};
  double r1 = 0.0;
  for (const auto& t : trs) r1 = std::max(r1, std::abs(weak_residual(t, one)));
  double worst_ratio = 1e300;
  for (int f = 0; f < 5; ++f) {
    const double a = 1.0 + f, b = 2.0 - 0.3 * f, w = 0.5 + 0.25 * f;
    TestFunction phi{[=](double t, const Point& x) { return std::sin(a * x[0] + w * t) * std::cos(b * x[1]); },
                     [=](double t, const Point& x) { return w * std::cos(a * x[0] + w * t) * std::cos(b * x[1]); },
                     [=](double t, const Point& x) {
                       return Point(a * std::cos(a * x[0] + w * t) * std::cos(b * x[1]),
                                    -b * std::sin(a * x[0] + w * t) * std::sin(b * x[1]));
                     }};
    for (std::size_t i = 1; i < trs.size(); ++i)
      worst_ratio = std::min(worst_ratio, std::abs(weak_residual(trs[i - 1], phi)) / std::abs(weak_residual(trs[i], phi)));
  }
  r.passed = r1 == 0.0 && worst_ratio >= 3.5;
  r.detail = fmt("residual for phi = 1: %.1e (== 0); min ratio per dt halving over 5 test functions %.3f (>= 3.5)", r1, worst_ratio);
  return r;
}

CriterionResult c11_dini(const VerifyOptions& opt) {
  CriterionResult r{11, "Dini growth", false, "", 0};
  const int n = opt.full ? 64 : 32;
  GridField rho = normalized(GridField::sample(2, n, [](const Point& x) {
    auto sq = [](double s) { return std::copysign(std::sqrt(std::abs(s)), s); };
    return 1.0 + 0.3 * sq(std::sin(kTwoPi * x[0])) * sq(std::sin(kTwoPi * x[1]));
  }));
  GridRunOptions o;
  o.monitor_every = opt.full ? 2 : 5;
  o.ct_limit = 2.0;
  o.bound_slack = 0.10;
  o.seed = opt.seed;
  GridRun run = run_grid(rho, 2.0, 0.05, o);
  const auto ct = run.record.column("C_t");
  r.passed = run.record.ok() && run.bound_held;
  r.detail = fmt("n = %d, %zu steps, final C_t %.3f (<= 2), worst dini / bound %.3f (<= 1.10), status %s", n, run.record.rows.size(),
                 ct.empty() ? 0.0 : ct.back(), run.worst_ratio, run.record.status.c_str());
  return r;
}

CriterionResult c12_euler(const VerifyOptions& opt) {
  CriterionResult r{12, "Euler steady states and Yudovich envelope", false, "", 0};
  const int n = opt.full ? 128 : 64;
  double drift = 0.0;
  GridField shear = GridField::sample(2, n, [](const Point& x) { return std::sin(kTwoPi * x[1]); });
  GridField mode = GridField::sample(2, n, [](const Point& x) { return std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); });
  for (const GridField* w : {&shear, &mode}) {
    EulerState s = init_euler(*w);
    for (int k = 0; k < 100; ++k) s = euler_step(s, 0.01);
    for (std::size_t q = 0; q < w->size(); ++q) drift = std::max(drift, std::abs(s.omega[q] - (*w)[q]));
  }
  GridField w = GridField::sample(2, 64, [](const Point& x) {
    return std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]) + 0.5 * std::cos(kTwoPi * (x[0] + 2 * x[1]));
  });
  YudovichOptions yo;
  yo.T = opt.full ? 1.0 : 0.5;
  YudovichReport y = yudovich_twin_run(w, std::sqrt(2.0) * 1e-6, yo);
  r.passed = drift <= 1e-6 && y.envelope_held;
  r.detail = fmt("steady drift at n = %d over T = 1: %.2e (<= 1e-6); twin run c_hat %.3f, eta(T) %.3e, envelope %s, exit time %g", n,
                 drift, y.c_hat, y.eta.back(), y.envelope_held ? "held" : "violated", y.exit_time);
  return r;
}

// ------------------------------------------------------------ eps sweep

struct SweepBundle {
  SweepReport sweep;
  SweepOptions so;
  std::vector<double> eps;
  std::string artifact_error;  // plots and tables are optional outputs
};

GridField sweep_vorticity(int n) {
  return GridField::sample(2, n, [](const Point& x) {
    return std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]) + 0.5 * std::cos(kTwoPi * (x[0] + 2 * x[1]));
  });
}

SweepOptions sweep_options(const VerifyOptions& opt) {
  SweepOptions so;
  so.n = opt.full ? 128 : 64;
  so.T = opt.full ? 1.0 : 0.5;
  so.dt = 0.02;
  so.threads = opt.threads;
  return so;
}

SweepBundle run_sweep(const VerifyOptions& opt) {
  SweepBundle b;
  b.so = sweep_options(opt);
  b.eps = {0.2, 0.1, 0.05, 0.025};
  b.sweep = eps_sweep(sweep_vorticity(b.so.n), b.eps, b.so);
  if (!opt.out_dir.empty()) try {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    b.sweep.table.write_csv(opt.out_dir + "/sweep.csv");
    std::vector<PlotSeries> curves;
    for (const auto& run : b.sweep.runs)
      if (run.record.ok()) curves.push_back({fmt("eps = %g", run.eps), run.record.column("t"), run.record.column("H"), false});
    write_svg_plot(opt.out_dir + "/modulated_energy.svg", curves,
                   {"Modulated energy H(t)", "t", "H", false, true, 640, 420});
    PlotSeries pts{"H(T)", {}, {}, true}, fit{fmt("slope %.2f", b.sweep.exponent), {}, {}, false},
        ref{"slope 2/3", {}, {}, false};
    for (const auto& run : b.sweep.runs)
      if (run.record.ok() && run.HT > 0) {
        pts.x.push_back(run.eps);
        pts.y.push_back(run.HT);
      }
    if (pts.x.size() >= 2) {
      double lx = 0, ly = 0;
      for (std::size_t i = 0; i < pts.x.size(); ++i) {
        lx += std::log(pts.x[i]) / pts.x.size();
        ly += std::log(pts.y[i]) / pts.y.size();
      }
      for (double e : {pts.x.front(), pts.x.back()}) {
        fit.x.push_back(e);
        fit.y.push_back(std::exp(ly + b.sweep.exponent * (std::log(e) - lx)));
        ref.x.push_back(e);
        ref.y.push_back(std::exp(ly + (2.0 / 3.0) * (std::log(e) - lx)));
      }
    }
    write_svg_plot(opt.out_dir + "/rate.svg", {pts, fit, ref}, {"H(T) against eps", "eps", "H(T)", true, true, 640, 420});
  } catch (const Error& e) {
    b.artifact_error = e.what();
  }
  return b;
}

CriterionResult c13_rate(const SweepBundle& b) {
  CriterionResult r{13, "convergence rate to Euler", false, "", 0};
  const SweepReport& s = b.sweep;
  int env = 0, q = 0, d = 0, e = 0, failed = 0;
  double drift = 0.0;
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    env += !s.envelope_ok[i];
    q += !s.q_ok[i];
    d += !s.delta_ok[i];
    e += !s.energy_ok[i];
    failed += !s.runs[i].record.ok();
    drift = std::max(drift, s.runs[i].E_drift);
  }
  r.passed = s.all_ok;
  r.detail = fmt("n = %d, T = %g, c_hat %.3f; exponent %.3f (>= 0.6); runs failed %d, envelope misses %d, |Q| misses %d, "
                 "|Delta| misses %d; max energy drift %.2e (<= 1e-3, misses %d)",
                 b.so.n, b.so.T, s.c_hat, s.exponent, failed, env, q, d, drift, e);
  if (!b.artifact_error.empty()) r.detail += "; artifacts not written: " + b.artifact_error;
  return r;
}

CriterionResult c14_expansion(const SweepBundle& b, double tol) {
  CriterionResult r{14, "strong expansion monitor", false, "", 0};
  StrongReport s = strong_expansion_monitor(b.sweep, tol);
  double worst = 0.0;
  for (double v : s.residual_scaled) worst = std::max(worst, v);
  r.passed = s.ok;
  r.detail = fmt("sup_t |rho1|_W1inf variation %.3f (<= 2), max psi1 residual * eps / tol %.3f (<= 10), fitted elliptic C %.3f",
                 s.variation, worst, s.elliptic_c);
  return r;
}

CriterionResult c15_determinism(const VerifyOptions& opt) {
  CriterionResult r{15, "determinism", false, "", 0};
  SweepOptions so = sweep_options(opt);
  so.threads = 1;
  GridField w = sweep_vorticity(so.n);
  PairedRun a = paired_run(w, 0.025, so), b = paired_run(w, 0.025, so);
  const std::string ca = a.record.to_csv(), cb = b.record.to_csv();
  r.passed = a.record.ok() && ca == cb;
  r.detail = fmt("eps = 0.025, n = %d: %zu rows, %zu bytes, records %s", so.n, a.record.rows.size(), ca.size(),
                 ca == cb ? "identical" : "differ");
  return r;
}

template <class F>
CriterionResult timed(int id, const char* name, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = f();
  } catch (const Error& e) {
    r = CriterionResult{id, name, false, std::string("error ") + std::string(to_string(e.code())) + ": " + e.what(), 0};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

const char* kNames[] = {"",
                        "MA manufactured solution",
                        "unconditional velocity bound",
                        "semi-discrete vs exact transport",
                        "W2 metric axioms",
                        "displacement convexity",
                        "interpolant determinant bound",
                        "map-to-potential energy estimate",
                        "Poisson energy estimate",
                        "support growth and orbit",
                        "weak residual",
                        "Dini growth",
                        "Euler steady states and Yudovich envelope",
                        "convergence rate to Euler",
                        "strong expansion monitor",
                        "determinism"};

CriterionResult run_one(int id, const VerifyOptions& opt, std::optional<SweepBundle>& sweep) {
  if (id < 1 || id > 15) throw Error(ErrorCode::InvalidArgument, "criteria are numbered 1 to 15");
  return timed(id, kNames[id], [&]() -> CriterionResult {
    switch (id) {
      case 1: return c1_ma_manufactured(opt);
      case 2: return c2_velocity_bound(opt);
      case 3: return c3_laguerre_vs_exact(opt);
      case 4: return c4_w2_axioms(opt);
      case 5: return c5_displacement_convexity(opt);
      case 6: return c6_interpolant_determinant(opt);
      case 7: return c7_energy_estimate(opt);
      case 8: return c8_poisson_estimate(opt);
      case 9: return c9_support(opt);
      case 10: return c10_weak_residual(opt);
      case 11: return c11_dini(opt);
      case 12: return c12_euler(opt);
      case 13:
        if (!sweep) sweep = run_sweep(opt);
        return c13_rate(*sweep);
      case 14:
        if (!sweep) sweep = run_sweep(opt);
        return c14_expansion(*sweep, sweep->so.eps_opt.tol);
      default: return c15_determinism(opt);
    }
  });
}

}  // namespace

bool VerifyReport::all_passed() const {
  for (const auto& r : results)
    if (!r.passed) return false;
  return !results.empty();
}

std::string VerifyReport::summary() const {
  std::string s;
  for (const auto& r : results)
    s += fmt("[%s] %2d %s: ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str()) + r.detail + fmt(" (%.1f s)\n", r.seconds);
  return s;
}

int criterion_count() { return 15; }

CriterionResult verify_criterion(int id, const VerifyOptions& opt) {
  std::optional<SweepBundle> sweep;
  return run_one(id, opt, sweep);
}

VerifyReport verify_suite(const VerifyOptions& opt) {
  VerifyReport rep;
  std::optional<SweepBundle> sweep;
  for (int id = 1; id <= criterion_count(); ++id) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    rep.results.push_back(run_one(id, opt, sweep));
  }
  return rep;
}

}  // namespace sglab
