#include "sglab/sg_dual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sglab/fields.hpp"
#include "sglab/interpolation.hpp"

namespace sglab {

namespace {

double sym2_norm(const std::array<double, 9>& H, int d) {
  if (d == 2) {
    const double tr = 0.5 * (H[0] + H[4]);
    const double r = std::sqrt(0.25 * (H[0] - H[4]) * (H[0] - H[4]) + H[1] * H[1]);
    return std::max(std::abs(tr + r), std::abs(tr - r));
  }
  // Only the horizontal block enters perp(D^2 p) in 3-D up to the third row,
  // which perp drops; bound by the Frobenius norm of the first two rows.
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) s += H[3 * i + j] * H[3 * i + j];
  return std::sqrt(s);
}

void check_cfl(const VectorField& v, double dt, double cfl, double h) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const double vmax = v.max_norm();
  if (dt * vmax > cfl * h * (1.0 + 1e-12))
    throw Error(ErrorCode::TimestepTooLarge, "dt * |v|_inf = " + format_double(dt * vmax) + " exceeds " +
                                                 format_double(cfl) + " h");
}

}  // namespace

double velocity_gradient_sup(const ConvexPotential& psi) {
  const Stencil st(psi.dim(), psi.n());
  double m = 0.0;
  for (std::size_t q = 0; q < psi.p.size(); ++q) m = std::max(m, sym2_norm(centered_hessian(psi.p, st, q), psi.dim()));
  return m;
}

SGStateGrid init_grid_state(const GridField& rho0, const MAOptions& ma) {
  SGStateGrid s;
  s.rho = rho0;
  MASolution sol = solve_ma_periodic(rho0, ma);
  s.psi = sol.potential;
  s.ma_residual = sol.residual;
  s.newton_iterations = sol.newton_iterations;
  s.v = dual_velocity(s.psi);
  return s;
}

SGStateGrid step_grid(const SGStateGrid& s, double dt, const GridStepOptions& opt) {
  check_cfl(s.v, dt, opt.cfl, s.rho.h());
  const bool have_prev = !s.v_prev.comp.empty();
  auto feet = departure_points(s.v, have_prev ? &s.v_prev : nullptr, dt, opt.adv);
  SGStateGrid out;
  out.t = s.t + dt;
  out.rho = advect(s.rho, feet, opt.adv);
  const double mass = out.rho.mean();
  if (!(mass > 0.0)) throw Error(ErrorCode::StateInvalid, "advected density has no mass");
  out.renorm = 1.0 / mass;
  out.rho *= out.renorm;
  if (s.rho.bounds()) out.rho.set_bounds(s.rho.bounds()->first, s.rho.bounds()->second);
  MAOptions ma = opt.ma;
  ma.warm_start = &s.psi.p;
  MASolution sol = solve_ma_periodic(out.rho, ma);
  out.psi = sol.potential;
  out.ma_residual = sol.residual;
  out.newton_iterations = sol.newton_iterations;
  out.v = dual_velocity(out.psi);
  out.v_prev = s.v;
  return out;
}

GridRun run_grid(const GridField& rho0, double T, double dt, const GridRunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  GridRun run;
  run.record = RunRecord({"t", "mass", "rho_min", "rho_max", "dini", "C_t", "dini_bound", "renorm", "v_max", "dv_max",
                          "ma_residual"});
  run.record.config = {{"mode", "grid"},
                       {"n", std::to_string(rho0.n())},
                       {"dt", format_double(dt)},
                       {"T", format_double(T)}};
  const auto [m, M] = linf_envelope(rho0);
  SGStateGrid s;
  try {
    s = init_grid_state(rho0, opt.step.ma);
  } catch (const Error& e) {
    run.record.abort(std::string(to_string(e.code())));
    return run;
  }
  const double dini0 = dini_seminorm(rho0, opt.seed).value;
  double integral = 0.0;
  double dv = velocity_gradient_sup(s.psi);
  auto log_row = [&](int step, double dini) {
    const double ct = std::exp(integral);
    const double bound = dini0 + (M - m) * (ct - 1.0);
    if (!std::isnan(dini)) {
      const double ratio = bound > 0.0 ? dini / bound : (dini > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      run.worst_ratio = std::max(run.worst_ratio, ratio);
      if (dini > bound * (1.0 + opt.bound_slack) + 1e-14) run.bound_held = false;
    }
    if (opt.on_step) opt.on_step(s, step);
    run.record.add_row({s.t, s.rho.mean(), s.rho.min(), s.rho.max(), dini, ct, bound, s.renorm, s.v.max_norm(), dv,
                        s.ma_residual});
  };
  log_row(0, dini0);
  const int steps = static_cast<int>(std::llround(T / dt));
  for (int k = 1; k <= steps; ++k) {
    try {
      SGStateGrid next = step_grid(s, dt, opt.step);
      const double dv_next = velocity_gradient_sup(next.psi);
      integral += 0.5 * dt * (dv + dv_next);
      dv = dv_next;
      s = std::move(next);
    } catch (const Error& e) {
      run.record.abort(std::string(to_string(e.code())) + " at step " + std::to_string(k));
      break;
    }
    const bool monitor = (k % std::max(1, opt.monitor_every) == 0) || k == steps;
    log_row(k, monitor ? dini_seminorm(s.rho, opt.seed).value : std::nan(""));
    if (std::exp(integral) > opt.ct_limit) break;
  }
  run.final_state = std::move(s);
  run.record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

// ------------------------------------------------------------- twin runs

namespace {

struct FlowStage {
  ConvexPotential psi;
  VectorField v;
};

FlowStage flow_velocity(const std::vector<Point>& X, int n, const MAOptions& ma, const GridField* warm) {
  GridField rho = pushforward_of_map(X, n);
  MAOptions o = ma;
  o.warm_start = warm;
  FlowStage st;
  st.psi = solve_ma_periodic(rho, o).potential;
  st.v = dual_velocity(st.psi);
  return st;
}

std::vector<Point> moved(const std::vector<Point>& X, const VectorField& v, double dt) {
  std::vector<Point> out(X.size());
  for (std::size_t q = 0; q < X.size(); ++q) out[q] = X[q] + interpolate(v, X[q], 5) * dt;
  return out;
}

double potential_gradient_gap(const ConvexPotential& a, const ConvexPotential& b) {
  VectorField da = displacement(a), db = displacement(b);
  double s = 0.0;
  for (std::size_t q = 0; q < a.p.size(); ++q) s += norm2(da.at(q) - db.at(q));
  return std::sqrt(s / static_cast<double>(a.p.size()));
}

}  // namespace

UniquenessReport twin_run_uniqueness(const VectorField& D0, const VectorField& delta, const UniquenessOptions& opt) {
  const GridField& ref = D0.comp.at(0);
  if (ref.dim() != 2) throw Error(ErrorCode::DimensionError, "twin_run_uniqueness is 2-D");
  if (!(opt.dt > 0.0) || !(opt.T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "twin run needs dt > 0, T >= 0");
  const int n = ref.n();
  std::vector<Point> X1(ref.size()), X2(ref.size());
  for (std::size_t q = 0; q < ref.size(); ++q) {
    X1[q] = ref.node(q) + D0.at(q);
    X2[q] = X1[q] + delta.at(q);
  }
  UniquenessReport rep;
  rep.record = RunRecord({"t", "distance", "lipschitz", "ratio", "envelope"});
  rep.record.config = {{"kind", "uniqueness"}, {"n", std::to_string(n)}, {"dt", format_double(opt.dt)},
                       {"T", format_double(opt.T)}};
  const int steps = static_cast<int>(std::llround(opt.T / opt.dt));
  std::vector<double> lip, ratio;
  double rho2_max = 0.0;
  GridField warm1, warm2;
  for (int k = 0;; ++k) {
    FlowStage a = flow_velocity(X1, n, opt.ma, warm1.empty() ? nullptr : &warm1);
    FlowStage b = flow_velocity(X2, n, opt.ma, warm2.empty() ? nullptr : &warm2);
    warm1 = a.psi.p;
    warm2 = b.psi.p;
    rho2_max = std::max(rho2_max, pushforward_of_map(X2, n).max());
    const double dist = map_distance(X1, X2);
    rep.times.push_back(k * opt.dt);
    rep.distance.push_back(dist);
    lip.push_back(std::max(velocity_gradient_sup(a.psi), velocity_gradient_sup(b.psi)));
    ratio.push_back(dist > 0.0 ? potential_gradient_gap(a.psi, b.psi) / dist : 0.0);
    if (k == steps) break;
    // Midpoint rule for both maps.
    auto X1h = moved(X1, a.v, 0.5 * opt.dt), X2h = moved(X2, b.v, 0.5 * opt.dt);
    FlowStage ah = flow_velocity(X1h, n, opt.ma, &warm1), bh = flow_velocity(X2h, n, opt.ma, &warm2);
    for (std::size_t q = 0; q < X1.size(); ++q) X1[q] += interpolate(ah.v, X1h[q], 5) * opt.dt;
    for (std::size_t q = 0; q < X2.size(); ++q) X2[q] += interpolate(bh.v, X2h[q], 5) * opt.dt;
  }
  const double lmax = *std::max_element(lip.begin(), lip.end());
  const double rmax = *std::max_element(ratio.begin(), ratio.end());
  rep.c_hat = lmax + std::sqrt(rho2_max) * rmax;
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    const double env = rep.distance[0] * std::exp(rep.c_hat * rep.times[k]);
    if (rep.distance[k] > env * (1.0 + 1e-9)) rep.envelope_held = false;
    rep.record.add_row({rep.times[k], rep.distance[k], lip[k], ratio[k], env});
  }
  return rep;
}

// ---------------------------------------------------------- particle mode

namespace {

Point cell_offset(const LaguerreDiagram& d, std::size_t i, const Point& x) {
  return d.domain.periodic() ? torus_delta(x, d.barycenters[i]) : d.barycenters[i] - x;
}

void check_separation(const ParticleCloud& c, bool periodic) {
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double d = periodic ? torus_distance(c.positions[i], c.positions[j]) : norm(c.positions[i] - c.positions[j]);
      if (d < 1e-9) throw Error(ErrorCode::DegenerateCloud, "particles " + std::to_string(i) + " and " + std::to_string(j) + " collided");
    }
}

LaguerreDiagram diagram_at(const ParticleCloud& c, const Domain& omega, const LaguerreOptions& lag,
                           const std::vector<double>* warm) {
  LaguerreOptions o = lag;
  o.warm = warm;
  return solve_laguerre(c, omega, o);
}

}  // namespace

SGStateParticles init_particle_state(const ParticleCloud& cloud, const Domain& omega, const LaguerreOptions& lag) {
  check_separation(cloud, omega.periodic());
  SGStateParticles s;
  s.cloud = cloud;
  s.omega = omega;
  s.diagram = solve_laguerre(cloud, omega, lag);
  s.cloud.positions = s.diagram.cloud.positions;
  return s;
}

SGStateParticles step_particles(const SGStateParticles& s, double dt, const LaguerreOptions& lag) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const std::size_t N = s.cloud.size();
  ParticleCloud half = s.cloud;
  for (std::size_t i = 0; i < N; ++i)
    half.positions[i] = s.cloud.positions[i] + perp(cell_offset(s.diagram, i, s.cloud.positions[i])) * (0.5 * dt);
  check_separation(half, s.omega.periodic());
  LaguerreDiagram dh = diagram_at(half, s.omega, lag, &s.diagram.weights);
  SGStateParticles out;
  out.t = s.t + dt;
  out.omega = s.omega;
  out.cloud = s.cloud;
  for (std::size_t i = 0; i < N; ++i)
    out.cloud.positions[i] = s.cloud.positions[i] + perp(cell_offset(dh, i, dh.cloud.positions[i])) * dt;
  if (s.omega.periodic())
    for (auto& p : out.cloud.positions) p = wrap(p);
  check_separation(out.cloud, s.omega.periodic());
  out.diagram = diagram_at(out.cloud, s.omega, lag, &dh.weights);
  return out;
}

ParticleTrajectory run_particles(const ParticleCloud& cloud, const Domain& omega, double T, double dt,
                                 const LaguerreOptions& lag) {
  ParticleTrajectory tr;
  tr.states.push_back(init_particle_state(cloud, omega, lag));
  const int steps = static_cast<int>(std::llround(T / dt));
  for (int k = 0; k < steps; ++k) tr.states.push_back(step_particles(tr.states.back(), dt, lag));
  return tr;
}

namespace {

double max_radius(const ParticleCloud& c) {
  double r = 0.0;
  for (const auto& p : c.positions) r = std::max(r, norm(p));
  return r;
}

double min_pair_distance(const ParticleCloud& c, bool periodic) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      m = std::min(m, periodic ? torus_distance(c.positions[i], c.positions[j]) : norm(c.positions[i] - c.positions[j]));
  return m;
}

}  // namespace

RunRecord particle_record(const ParticleTrajectory& traj) {
  if (traj.states.empty()) throw Error(ErrorCode::InvalidTrajectory, "empty trajectory");
  RunRecord r({"t", "max_radius", "bound", "min_pair_distance", "mass_defect"});
  const auto& s0 = traj.states.front();
  const double R0 = max_radius(s0.cloud), C = s0.omega.sup_norm();
  r.config = {{"mode", "particles"}, {"particles", std::to_string(s0.cloud.size())}};
  for (const auto& s : traj.states)
    r.add_row({s.t, max_radius(s.cloud), R0 + C * s.t, min_pair_distance(s.cloud, s.omega.periodic()),
               s.diagram.mass_defect});
  return r;
}

SupportReport support_radius_check(const ParticleTrajectory& traj, double slack) {
  if (traj.states.empty()) throw Error(ErrorCode::InvalidTrajectory, "empty trajectory");
  SupportReport rep;
  rep.C = traj.states.front().omega.sup_norm();
  rep.R0 = max_radius(traj.states.front().cloud);
  for (const auto& s : traj.states) rep.worst_excess = std::max(rep.worst_excess, max_radius(s.cloud) - rep.R0 - rep.C * s.t);
  rep.holds = rep.worst_excess <= slack;
  return rep;
}

double weak_residual(const ParticleTrajectory& traj, const TestFunction& phi) {
  if (traj.states.size() < 2) throw Error(ErrorCode::InvalidTrajectory, "weak_residual needs at least two states");
  const bool periodic = traj.states.front().omega.periodic();
  std::vector<double> f(traj.states.size());
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& s = traj.states[k];
    if (s.diagram.barycenters.size() != s.cloud.size())
      throw Error(ErrorCode::InvalidTrajectory, "state " + std::to_string(k) + " has no diagram");
    std::vector<double> terms(s.cloud.size());
    for (std::size_t i = 0; i < s.cloud.size(); ++i) {
      const Point& x = s.cloud.positions[i];
      const double m = s.cloud.masses[i];
      const Point g = phi.grad(s.t, x);
      // The cell integral of y^perp equals m_i b_i^perp; on the torus b_i - x_i
      // is taken as a minimal-image difference.
      const Point y_minus_x = periodic ? torus_delta(x, s.diagram.barycenters[i]) : s.diagram.barycenters[i] - x;
      terms[i] = m * (phi.dt(s.t, x) + dot(g, perp(y_minus_x)));
    }
    f[k] = pairwise_sum(terms);
  }
  std::vector<double> quad(f.size());
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k)
    quad[k] = 0.5 * (traj.states[k + 1].t - traj.states[k].t) * (f[k] + f[k + 1]);
  quad.back() = 0.0;
  auto total = [&](const SGStateParticles& s) {
    std::vector<double> v(s.cloud.size());
    for (std::size_t i = 0; i < s.cloud.size(); ++i) v[i] = s.cloud.masses[i] * phi.value(s.t, s.cloud.positions[i]);
    return pairwise_sum(v);
  };
  return pairwise_sum(quad) - (total(traj.states.back()) - total(traj.states.front()));
}

}  // namespace sglab
