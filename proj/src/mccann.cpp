#include <algorithm>
#include <cmath>

#include "krylov.hpp"
#include "sglab/deposition.hpp"
#include "sglab/fields.hpp"
#include "sglab/interpolation.hpp"
#include "sglab/spectral.hpp"
#include "sglab/transport.hpp"

namespace sglab {

namespace {

void check_density(const GridField& rho, const char* what) {
  if (rho.dim() != 2) throw Error(ErrorCode::DimensionError, std::string(what) + ": displacement interpolation is 2-D");
  if (rho.n() < 16) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": n >= 16 required");
  for (std::size_t q = 0; q < rho.size(); ++q)
    if (!std::isfinite(rho[q]) || !(rho[q] > 0.0))
      throw Error(ErrorCode::InvalidDensity, std::string(what) + ": density must be strictly positive");
  if (std::abs(rho.mean() - 1.0) > 1e-10) throw Error(ErrorCode::InvalidDensity, std::string(what) + ": mean must be 1");
}

VectorField centred_gradient(const GridField& u) {
  VectorField g(u.dim(), u.n(), u.dim());
  const double s = 0.5 * u.n();
  for (std::size_t q = 0; q < u.size(); ++q)
    for (int a = 0; a < u.dim(); ++a) g.comp[static_cast<std::size_t>(a)][q] = (u[u.shift(q, a, 1)] - u[u.shift(q, a, -1)]) * s;
  return g;
}

GridField centred_divergence(const VectorField& v) {
  const GridField& ref = v.comp[0];
  GridField out(ref.dim(), ref.n());
  const double s = 0.5 * ref.n();
  for (std::size_t q = 0; q < ref.size(); ++q) {
    double d = 0.0;
    for (int a = 0; a < ref.dim(); ++a) {
      const GridField& c = v.comp[static_cast<std::size_t>(a)];
      d += (c[ref.shift(q, a, 1)] - c[ref.shift(q, a, -1)]) * s;
    }
    out[q] = d;
  }
  return out;
}

// F(u) = det_h(I + D^2 u) - g / mean(g) with g = a / b(x + grad u), where the
// target density b is (1 - t) + t rho2 along the homotopy.
struct MapResidual {
  GridField F;
  GridField g;
  VectorField coef;  // g t grad rho2(T) / b(T): the derivative of g is -coef . grad delta
  double gbar = 1.0;
};

MapResidual map_residual(const GridField& u, const GridField& a, const GridField& rho2, double t) {
  MapResidual r;
  const int n = u.n();
  r.g = GridField(2, n);
  r.coef = VectorField(2, n, 2);
  VectorField gu = centred_gradient(u);
  for (std::size_t q = 0; q < u.size(); ++q) {
    const Point y = u.node(q) + gu.at(q);
    Point grad;
    const double v = interpolate_with_gradient(rho2, y, 3, grad);
    const double b = (1.0 - t) + t * v;
    if (!(b > 0.0)) throw Error(ErrorCode::InvalidDensity, "interpolated target density is not positive");
    r.g[q] = a[q] / b;
    r.coef.comp[0][q] = r.g[q] * t * grad[0] / b;
    r.coef.comp[1][q] = r.g[q] * t * grad[1] / b;
  }
  r.gbar = r.g.mean();
  r.F = ma_determinant(u);
  for (std::size_t q = 0; q < u.size(); ++q) r.F[q] -= r.g[q] / r.gbar;
  return r;
}

struct MapNewton {
  bool ok = false;
  bool convexity_failure = false;
  int iterations = 0;
  double residual = 0.0;
  GridField u;
};

MapNewton map_newton(const GridField& u0, const GridField& a, const GridField& rho2, double t, double tol,
                     int max_it, const MAOptions& opt) {
  MapNewton out;
  out.u = u0;
  MapResidual r = map_residual(out.u, a, rho2, t);
  double rinf = r.F.max_abs(), r2 = r.F.l2_norm();
  for (int it = 0; it < max_it; ++it) {
    out.iterations = it;
    if (rinf <= tol) {
      out.ok = true;
      out.residual = rinf;
      return out;
    }
    MALinearization L(out.u);
    auto apply = [&](const GridField& d, GridField& o) {
      L.apply(d, o);
      const double s = 0.5 * d.n();
      GridField gd(2, d.n());
      for (std::size_t q = 0; q < d.size(); ++q) {
        const double dx = (d[d.shift(q, 0, 1)] - d[d.shift(q, 0, -1)]) * s;
        const double dy = (d[d.shift(q, 1, 1)] - d[d.shift(q, 1, -1)]) * s;
        gd[q] = -(r.coef.comp[0][q] * dx + r.coef.comp[1][q] * dy);
      }
      const double mg = gd.mean();
      for (std::size_t q = 0; q < d.size(); ++q) o[q] += -gd[q] / r.gbar + r.g[q] * mg / (r.gbar * r.gbar);
    };
    GridField neg = r.F * -1.0;
    bool lin_ok = true;
    GridField delta = detail::solve_zero_mean(apply, neg, std::clamp(0.5 * rinf, 1e-13, 1e-2), opt.max_linear, &lin_ok);
    double alpha = 1.0;
    bool accepted = false, convex_fail = false;
    for (int ls = 0; ls <= 20; ++ls, alpha *= 0.5) {
      GridField trial = out.u;
      for (std::size_t q = 0; q < trial.size(); ++q) trial[q] += alpha * delta[q];
      if (min_hessian_eigenvalue(trial) < opt.convexity_floor) {
        convex_fail = true;
        continue;
      }
      MapResidual rt = map_residual(trial, a, rho2, t);
      const double rt2 = rt.F.l2_norm();
      if (rt2 <= (1.0 - 1e-4 * alpha) * r2) {
        out.u = std::move(trial);
        r = std::move(rt);
        r2 = rt2;
        rinf = r.F.max_abs();
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.convexity_failure = convex_fail;
      out.residual = rinf;
      out.ok = rinf <= tol;
      return out;
    }
  }
  out.iterations = max_it;
  out.residual = rinf;
  out.ok = rinf <= tol;
  return out;
}

DisplacementFn scaled_nodal(const VectorField& f, double s) {
  return [f, s](const Point& x) { return interpolate(f, x, 3) * s; };
}

}  // namespace

OptimalMap optimal_map(const GridField& rho1, const GridField& rho2, const MAOptions& opt) {
  check_density(rho1, "optimal_map");
  check_density(rho2, "optimal_map");
  rho1.require_same_shape(rho2, "optimal_map");
  const int n = rho1.n();
  GridField u(2, n);
  if (opt.warm_start) {
    opt.warm_start->require_same_shape(rho1, "optimal_map warm start");
    u = *opt.warm_start;
    u += -u.mean();
    if (min_hessian_eigenvalue(u) < opt.convexity_floor) u = GridField(2, n);
  }
  OptimalMap out;
  double t = 0.0, step = 1.0;
  const double stage_tol = std::max(opt.tol, 1e-7);
  // The homotopy moves both densities from the uniform one; a warm start is
  // only meaningful for the full problem, so it is tried first at t = 1.
  if (opt.warm_start) {
    MapNewton r = map_newton(u, rho1, rho2, 1.0, opt.tol, opt.max_newton, opt);
    out.newton_iterations += r.iterations;
    if (r.ok) {
      u = std::move(r.u);
      t = 1.0;
    } else {
      u = GridField(2, n);
    }
  }
  double last_residual = 0.0;
  bool last_convexity = false;
  while (t < 1.0) {
    const double t_try = std::min(1.0, t + step);
    GridField a(2, n);
    for (std::size_t q = 0; q < a.size(); ++q) a[q] = (1.0 - t_try) + t_try * rho1[q];
    const bool final_stage = t_try >= 1.0;
    MapNewton r = map_newton(u, a, rho2, t_try, final_stage ? opt.tol : stage_tol, final_stage ? opt.max_newton : 25, opt);
    out.newton_iterations += r.iterations;
    last_residual = r.residual;
    if (r.ok) {
      u = std::move(r.u);
      t = t_try;
      step *= 2.0;
    } else {
      last_convexity = r.convexity_failure;
      step *= 0.5;
      if (step < 1.0 / 1024.0) {
        if (last_convexity) throw Error(ErrorCode::ConvexityLost, "optimal map lost discrete convexity");
        throw Error(ErrorCode::NoConvergence, "optimal map Newton stagnated with residual " + std::to_string(last_residual));
      }
    }
  }
  MapResidual r = map_residual(u, rho1, rho2, 1.0);
  out.residual = r.F.max_abs();
  out.grad_u = centred_gradient(u);
  GridField e(2, n);
  for (std::size_t q = 0; q < e.size(); ++q) e[q] = rho1[q] * norm2(out.grad_u.at(q));
  out.w2_squared = e.mean();
  out.u = std::move(u);
  return out;
}

GridField interpolant_density(const GridField& rho1, const OptimalMap& map, double theta) {
  if (!(theta >= 1.0 && theta <= 2.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in [1, 2]");
  if (theta == 1.0) return rho1;
  return push_forward(rho1, scaled_nodal(map.grad_u, theta - 1.0));
}

GridField interpolant_determinant(const OptimalMap& map, double theta) {
  if (!(theta >= 1.0 && theta <= 2.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in [1, 2]");
  return ma_determinant(map.u * (theta - 1.0));
}

McCannResult mccann_interpolate(const GridField& rho1, const GridField& rho2, double theta, const MAOptions& opt) {
  if (!(theta >= 1.0 && theta <= 2.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in [1, 2]");
  OptimalMap map = optimal_map(rho1, rho2, opt);
  McCannResult out;
  out.rho_theta = interpolant_density(rho1, map, theta);
  out.phi.p = map.u;
  out.phi.b = Point::zero(2);
  out.phi.kind = ConvexPotential::Kind::Primal;
  return out;
}

InterpolatingVelocity interpolating_velocity(const GridField& rho1, const OptimalMap& map, double theta) {
  if (!(theta >= 1.0 && theta <= 2.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in [1, 2]");
  const VectorField& gu = map.grad_u;
  MomentumDeposit dep = push_forward_momentum(rho1, scaled_nodal(gu, theta - 1.0),
                                              [&gu](const Point& x) { return interpolate(gu, x, 3); });
  InterpolatingVelocity out;
  out.v = VectorField(2, rho1.n(), 2);
  GridField e(2, rho1.n());
  for (std::size_t q = 0; q < rho1.size(); ++q) {
    const double m = dep.mass[q];
    if (!(m > 0.0)) throw Error(ErrorCode::ResolutionError, "interpolated density vanishes in a cell");
    const double vx = dep.momentum.comp[0][q] / m, vy = dep.momentum.comp[1][q] / m;
    out.v.comp[0][q] = vx;
    out.v.comp[1][q] = vy;
    e[q] = m * (vx * vx + vy * vy);
  }
  out.kinetic_energy = e.mean();
  out.rho_theta = std::move(dep.mass);
  out.momentum = std::move(dep.momentum);
  return out;
}

ConvexityReport displacement_convexity_check(const GridField& rho1, const GridField& rho2,
                                             const std::vector<double>& thetas, double slack, const MAOptions& opt) {
  OptimalMap map = optimal_map(rho1, rho2, opt);
  ConvexityReport rep;
  rep.bound = std::max(rho1.max(), rho2.max());
  for (double th : thetas) {
    const double m = interpolant_density(rho1, map, th).max();
    rep.per_theta.push_back(m);
    rep.sup = std::max(rep.sup, m);
  }
  rep.violated = rep.sup > rep.bound * (1.0 + slack);
  return rep;
}

double map_distance(const std::vector<Point>& X1, const std::vector<Point>& X2) {
  if (X1.size() != X2.size()) throw Error(ErrorCode::DimensionError, "maps of different size");
  if (X1.empty()) return 0.0;
  std::vector<double> t(X1.size());
  for (std::size_t q = 0; q < X1.size(); ++q) t[q] = norm2(torus_delta(X1[q], X2[q]));
  return std::sqrt(pairwise_sum(t) / static_cast<double>(t.size()));
}

namespace {

VectorField nodal_displacement(const std::vector<Point>& X, int n) {
  GridField ref(2, n);
  if (X.size() != ref.size()) throw Error(ErrorCode::DimensionError, "map needs one image per node");
  VectorField D(2, n, 2);
  for (std::size_t q = 0; q < ref.size(); ++q) D.set(q, torus_delta(ref.node(q), X[q]));
  return D;
}

}  // namespace

GridField pushforward_of_map(const std::vector<Point>& X, int n) {
  GridField one(2, n, 1.0);
  GridField rho = push_forward(one, displacement_from_nodes(nodal_displacement(X, n), 3));
  rho *= 1.0 / rho.mean();
  return rho;
}

GeodesicEstimate geodesic_energy_estimate(const std::vector<Point>& X1, const std::vector<Point>& X2, int n,
                                          bool elliptic, const MAOptions& opt) {
  GeodesicEstimate rep;
  GridField rho1 = pushforward_of_map(X1, n), rho2 = pushforward_of_map(X2, n);
  if (!(rho1.min() > 0.0) || !(rho2.min() > 0.0)) throw Error(ErrorCode::InvalidDensity, "pushed-forward density vanishes");
  MASolution s1 = solve_ma_periodic(rho1, opt);
  MAOptions warm = opt;
  warm.warm_start = &s1.potential.p;
  MASolution s2 = solve_ma_periodic(rho2, warm);
  VectorField g1 = displacement(s1.potential), g2 = displacement(s2.potential);
  VectorField diff(2, n, 2);
  for (int a = 0; a < 2; ++a) diff.comp[static_cast<std::size_t>(a)] = g1.comp[static_cast<std::size_t>(a)] - g2.comp[static_cast<std::size_t>(a)];
  rep.lhs = diff.l2_norm();
  rep.rhs = map_distance(X1, X2);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  if (rep.rhs == 0.0) return rep;

  OptimalMap map = optimal_map(rho1, rho2, opt);
  rep.w2_squared = map.w2_squared;
  rep.kinetic_energy = interpolating_velocity(rho1, map, 1.5).kinetic_energy;
  if (!elliptic) return rep;

  // d/dtheta det_h(I + D^2 p_theta) = d/dtheta rho_theta = -div(rho_theta v_theta).
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  VectorField acc(2, n, 2);
  GridField prev = s1.potential.p;
  for (int k = 0; k < 4; ++k) {
    const double theta = 1.5 + 0.5 * gx[k];
    InterpolatingVelocity iv = interpolating_velocity(rho1, map, theta);
    GridField rt = iv.rho_theta;
    rt *= 1.0 / rt.mean();
    MAOptions w = opt;
    w.warm_start = &prev;
    MASolution st = solve_ma_periodic(rt, w);
    prev = st.potential.p;
    GridField rhs = centred_divergence(iv.momentum) * -1.0;
    GridField dp = ma_linearization_solve(st.potential.p, rhs, 1e-10, 2000);
    VectorField gdp = centred_gradient(dp);
    for (int a = 0; a < 2; ++a) acc.comp[static_cast<std::size_t>(a)] += gdp.comp[static_cast<std::size_t>(a)] * (0.5 * gw[k]);
  }
  VectorField gap(2, n, 2);
  for (int a = 0; a < 2; ++a) {
    const auto ia = static_cast<std::size_t>(a);
    gap.comp[ia] = acc.comp[ia] + diff.comp[ia];  // acc should equal g2 - g1 = -diff
  }
  rep.elliptic_mismatch = rep.lhs > 0.0 ? gap.l2_norm() / rep.lhs : 0.0;
  return rep;
}

PoissonEstimate poisson_energy_estimate(const std::vector<Point>& X1, const std::vector<Point>& X2,
                                        const GridField& rho0) {
  if (rho0.dim() != 2) throw Error(ErrorCode::DimensionError, "poisson_energy_estimate is 2-D");
  auto [plus, minus] = signed_split(rho0);
  const int n = rho0.n();
  auto image = [&](const std::vector<Point>& X) {
    DisplacementFn D = displacement_from_nodes(nodal_displacement(X, n), 3);
    GridField r = push_forward(plus, D) - push_forward(minus, D);
    r += -r.mean();
    return r;
  };
  GridField psi1 = spectral::poisson_solve(image(X1)), psi2 = spectral::poisson_solve(image(X2));
  VectorField g = spectral::gradient(psi1 - psi2);
  PoissonEstimate rep;
  rep.lhs = g.l2_norm();
  rep.rhs = map_distance(X1, X2);
  rep.bound = 2.0 * rho0.max_abs() * rep.rhs + 10.0 * rho0.h();
  rep.holds = rep.lhs <= rep.bound;
  return rep;
}

}  // namespace sglab
