#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "sglab/advection.hpp"
#include "sglab/monge_ampere.hpp"
#include "sglab/record.hpp"
#include "sglab/transport.hpp"

namespace sglab {

// ---------------------------------------------------------------- grid mode

/// Density, dual potential and velocity v = perp(grad Psi[rho] - x) on the torus.
struct SGStateGrid {
  double t = 0.0;
  GridField rho;
  ConvexPotential psi;
  VectorField v;
  VectorField v_prev;  // velocity of the previous step, empty before the first step
  double renorm = 1.0; // factor applied to restore unit mass in the last step
  double ma_residual = 0.0;
  int newton_iterations = 0;
};

struct GridStepOptions {
  MAOptions ma;
  AdvectionOptions adv;
  double cfl = 1.0;  // dt * max|v| <= cfl * h, else TimestepTooLarge
};

SGStateGrid init_grid_state(const GridField& rho0, const MAOptions& ma = {});

/// Semi-Lagrangian step along v (second order in time through extrapolation of
/// the previous velocity), renormalization to unit mass, then a fresh
/// Monge-Ampere solve warm-started from the previous potential.
SGStateGrid step_grid(const SGStateGrid& s, double dt, const GridStepOptions& opt = {});

/// sup over nodes of the operator norm of Dv = perp(D^2 p).
double velocity_gradient_sup(const ConvexPotential& psi);

struct GridRunOptions {
  GridStepOptions step;
  int monitor_every = 1;       // Dini seminorm evaluation interval (steps)
  double ct_limit = std::numeric_limits<double>::infinity();  // stop once C_t exceeds this
  double bound_slack = 0.10;   // relative slack on the Dini growth bound
  std::uint64_t seed = 0;
  std::function<void(const SGStateGrid&, int step)> on_step;  // called for step 0 and after every step
};

struct GridRun {
  RunRecord record;  // t, mass, rho_min, rho_max, dini, C_t, dini_bound, renorm, v_max, dv_max, ma_residual
  SGStateGrid final_state;
  bool bound_held = true;   // dini <= bound (1 + slack) at every monitored step
  double worst_ratio = 0.0; // max dini / bound
};

/// Evolves rho0 to time T. Step failures abort with a partial record.
GridRun run_grid(const GridField& rho0, double T, double dt, const GridRunOptions& opt = {});

/// Flow-map twin run: densities rho_i = X_i # dx with X_1(0) = x + D0(x) and
/// X_2(0) = X_1(0) + delta(x); both maps follow their own SG velocity.
struct UniquenessOptions {
  double T = 0.5;
  double dt = 0.02;
  MAOptions ma;
};

struct UniquenessReport {
  RunRecord record;  // t, distance, lipschitz, ratio, envelope
  double c_hat = 0.0;            // sup lipschitz + sqrt(max rho_2) * sup ratio
  bool envelope_held = true;     // distance <= distance(0) exp(c_hat t) at every step
  std::vector<double> times, distance;
};

UniquenessReport twin_run_uniqueness(const VectorField& D0, const VectorField& delta, const UniquenessOptions& opt = {});

// ----------------------------------------------------------- particle mode

/// Dual-space particles; velocities perp(b_i - x_i) from Laguerre barycentres.
struct SGStateParticles {
  double t = 0.0;
  ParticleCloud cloud;
  Domain omega = Domain::centered_box(2);
  LaguerreDiagram diagram;
};

SGStateParticles init_particle_state(const ParticleCloud& cloud, const Domain& omega, const LaguerreOptions& lag = {});

/// Explicit midpoint step: the diagram is re-solved at the half step.
/// DegenerateCloud if two particles come closer than 1e-9.
SGStateParticles step_particles(const SGStateParticles& s, double dt, const LaguerreOptions& lag = {});

struct ParticleTrajectory {
  std::vector<SGStateParticles> states;  // states[0] is the initial state
};

ParticleTrajectory run_particles(const ParticleCloud& cloud, const Domain& omega, double T, double dt,
                                 const LaguerreOptions& lag = {});

/// t, max_radius, bound, min_pair_distance, mass_defect.
RunRecord particle_record(const ParticleTrajectory& traj);

struct SupportReport {
  double C = 0.0;        // sup_{y in Omega} |y|
  double R0 = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max_t (R(t) - R0 - C t)
  bool holds = true;     // worst_excess <= slack
};

SupportReport support_radius_check(const ParticleTrajectory& traj, double slack);

/// Smooth test function of (t, x) with its time derivative and gradient.
struct TestFunction {
  std::function<double(double, const Point&)> value;
  std::function<double(double, const Point&)> dt;
  std::function<Point(double, const Point&)> grad;
};

/// int sum m_i d_t phi dt + int sum_i int_{cell_i} grad phi(x_i) . y^perp dy dt
/// - int sum m_i grad phi(x_i) . x_i^perp dt - [sum m_i phi(T, x_i) - sum m_i phi(0, x_i)],
/// time integrals by the trapezoid rule over the stored states.
double weak_residual(const ParticleTrajectory& traj, const TestFunction& phi);

}  // namespace sglab
