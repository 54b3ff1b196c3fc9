#include "sglab/euler2d.hpp"

#include <algorithm>
#include <cmath>

#include "sglab/interpolation.hpp"
#include "sglab/spectral.hpp"
#include "sglab/transport.hpp"

namespace sglab {

namespace {
const double kTwoPi = 6.283185307179586;

void require_2d(const GridField& f, const char* what) {
  if (f.dim() != 2) throw Error(ErrorCode::DimensionError, std::string(what) + " is 2-D");
}
}  // namespace

GridField poisson_solve_periodic(const GridField& rho) { return spectral::poisson_solve(rho, 1e-10); }

VectorField stream_velocity(const GridField& psi) {
  VectorField g = spectral::gradient(psi);
  VectorField u(psi.dim(), psi.n(), 2);
  for (std::size_t q = 0; q < psi.size(); ++q) u.set(q, perp(g.at(q)));
  return u;
}

EulerState init_euler(const GridField& omega0) {
  require_2d(omega0, "init_euler");
  EulerState s;
  s.omega = omega0;
  s.psi = poisson_solve_periodic(omega0);
  s.u = stream_velocity(s.psi);
  return s;
}

EulerState euler_step(const EulerState& s, double dt, const EulerOptions& opt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (dt * s.u.max_norm() > opt.cfl * s.omega.h() * (1.0 + 1e-12))
    throw Error(ErrorCode::TimestepTooLarge, "Euler step violates the CFL bound");
  const bool have_prev = !s.u_prev.comp.empty();
  auto feet = departure_points(s.u, have_prev ? &s.u_prev : nullptr, dt, opt.adv);
  EulerState out;
  out.t = s.t + dt;
  out.omega = advect(s.omega, feet, opt.adv);
  out.omega += -out.omega.mean();
  out.psi = poisson_solve_periodic(out.omega);
  out.u = stream_velocity(out.psi);
  out.u_prev = s.u;
  return out;
}

double kinetic_energy(const EulerState& s) {
  VectorField g = spectral::gradient(s.psi);
  std::vector<double> e(s.psi.size());
  for (std::size_t q = 0; q < e.size(); ++q) e[q] = norm2(g.at(q));
  return pairwise_sum(e) / static_cast<double>(e.size());
}

LogLipschitzReport log_lipschitz_modulus(const VectorField& v) {
  const GridField& ref = v.comp.at(0);
  require_2d(ref, "log_lipschitz_modulus");
  const int n = ref.n();
  const double h = ref.h();
  std::vector<std::pair<int, int>> offs;
  const int half = n / 2;
  for (int a = -half + 1; a <= half; ++a)
    for (int b = -half + 1; b <= half; ++b) {
      if (a == 0 && b == 0) continue;
      const double r = h * std::sqrt(double(a) * a + double(b) * b);
      if (r > 0.5 + 1e-15) continue;
      const int far = std::max(std::abs(a), std::abs(b));
      // Beyond 8 cells keep every offset whose coordinates are multiples of a stride.
      const int stride = std::max(1, n / 32);
      if (far > 8 && (a % stride != 0 || b % stride != 0)) continue;
      offs.emplace_back(a, b);
    }
  LogLipschitzReport rep;
  for (const auto& [a, b] : offs) {
    const double r = h * std::sqrt(double(a) * a + double(b) * b);
    const double denom = r * std::log(1.0 / r);
    double worst = 0.0;
    std::size_t wq = 0;
    std::vector<int> col(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) col[j] = ((j + b) % n + n) % n;
    for (int i = 0; i < n; ++i) {
      const std::size_t r0 = static_cast<std::size_t>(i) * n, r1 = static_cast<std::size_t>(((i + a) % n + n) % n) * n;
      for (const auto& c : v.comp) {
        const double* f = c.data();
        for (int j = 0; j < n; ++j) {
          const double d = std::abs(f[r1 + col[j]] - f[r0 + j]);
          if (d > worst) {
            worst = d;
            wq = r0 + j;
          }
        }
      }
    }
    if (worst / denom > rep.C) {
      rep.C = worst / denom;
      rep.x = ref.node(wq);
      rep.y = ref.node(ref.shift(ref.shift(wq, 0, a), 1, b));
      rep.r = r;
    }
  }
  return rep;
}

YudovichReport yudovich_twin_run(const GridField& omega0, double delta, const YudovichOptions& opt) {
  require_2d(omega0, "yudovich_twin_run");
  const int n = omega0.n();
  GridField omega2 = omega0;
  if (delta != 0.0) {
    omega2 = GridField::sample(2, n, [&](const Point& x) {
      return interpolate(omega0, Point(x[0] - delta * std::sin(kTwoPi * x[1]), x[1]), 5);
    });
    omega2 += -omega2.mean();
  }
  EulerState a = init_euler(omega0), b = init_euler(omega2);
  std::vector<Point> X1(omega0.size()), X2(omega0.size());
  for (std::size_t q = 0; q < X1.size(); ++q) {
    const Point x = omega0.node(q);
    X1[q] = x;
    X2[q] = Point(x[0] + delta * std::sin(kTwoPi * x[1]), x[1]);
  }
  const double wmax = omega0.max_abs();
  YudovichReport rep;
  rep.record = RunRecord({"t", "eta", "envelope", "grad_psi_gap", "poisson_bound"});
  rep.record.config = {{"kind", "euler-twin"}, {"n", std::to_string(n)}, {"dt", format_double(opt.dt)},
                       {"T", format_double(opt.T)}, {"delta", format_double(delta)}};
  const int steps = static_cast<int>(std::llround(opt.T / opt.dt));
  double cll = 0.0;
  std::vector<double> gap;
  for (int k = 0;; ++k) {
    if (k % std::max(1, opt.modulus_every) == 0 || k == steps)
      cll = std::max({cll, log_lipschitz_modulus(a.u).C, log_lipschitz_modulus(b.u).C});
    rep.times.push_back(a.t);
    rep.eta.push_back(map_distance(X1, X2));
    VectorField ga = spectral::gradient(a.psi), gb = spectral::gradient(b.psi);
    double s = 0.0;
    for (std::size_t q = 0; q < X1.size(); ++q) s += norm2(ga.at(q) - gb.at(q));
    gap.push_back(std::sqrt(s / static_cast<double>(X1.size())));
    if (k == steps) break;
    EulerState a2 = euler_step(a, opt.dt, opt.euler), b2 = euler_step(b, opt.dt, opt.euler);
    advance_points(X1, a.u, a2.u, opt.dt, 5);
    advance_points(X2, b.u, b2.u, opt.dt, 5);
    a = std::move(a2);
    b = std::move(b2);
  }
  rep.c_hat = cll + 2.0 * wmax;
  const double eta0 = rep.eta.front();
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    const double t = rep.times[k];
    if (rep.eta[k] > std::exp(-1.0) && !std::isfinite(rep.exit_time)) rep.exit_time = t;
    const double env = eta0 > 0.0 ? std::pow(eta0, std::exp(-rep.c_hat * t)) : 0.0;
    const double pb = 2.0 * wmax * rep.eta[k] + 10.0 * omega0.h();
    if (t < rep.exit_time && rep.eta[k] > env * (1.0 + 1e-9)) rep.envelope_held = false;
    if (gap[k] > pb) rep.poisson_held = false;
    rep.record.add_row({t, rep.eta[k], env, gap[k], pb});
  }
  return rep;
}

}  // namespace sglab
