#pragma once

#include <limits>
#include <vector>

#include "sglab/advection.hpp"
#include "sglab/record.hpp"

namespace sglab {

/// Delta psi = rho on the torus, zero-mean gauge. MeanNotZero if |mean rho| > 1e-10.
GridField poisson_solve_periodic(const GridField& rho);

/// Vorticity, streamfunction and velocity u = perp(grad psi).
struct EulerState {
  double t = 0.0;
  GridField omega;
  GridField psi;
  VectorField u;
  VectorField u_prev;  // empty before the first step
};

struct EulerOptions {
  AdvectionOptions adv;
  double cfl = 1.0;
};

/// perp of the spectral gradient.
VectorField stream_velocity(const GridField& psi);

EulerState init_euler(const GridField& omega0);
/// Semi-Lagrangian step with the SG kernel; the mean of omega is re-zeroed.
EulerState euler_step(const EulerState& s, double dt, const EulerOptions& opt = {});
/// int |grad psi|^2.
double kinetic_energy(const EulerState& s);

struct LogLipschitzReport {
  double C = 0.0;
  Point x, y;      // worst pair
  double r = 0.0;  // its distance
};

/// Smallest C with |v_i(x) - v_i(y)| <= C r log(1/r) over sampled node pairs with
/// r = |x - y| <= 1/2: all offsets up to 8 cells plus a fixed strided subset beyond.
LogLipschitzReport log_lipschitz_modulus(const VectorField& v);

struct YudovichOptions {
  double T = 1.0;
  double dt = 0.01;
  EulerOptions euler;
  int modulus_every = 10;  // steps between log-Lipschitz evaluations
};

struct YudovichReport {
  RunRecord record;  // t, eta, envelope, grad_psi_gap, poisson_bound
  double c_hat = 0.0;  // sup_t log-Lipschitz constant + 2 |omega0|_inf
  double exit_time = std::numeric_limits<double>::infinity();  // first t with eta > 1/e
  bool envelope_held = true;  // eta <= eta(0)^exp(-c_hat t) before the exit time
  bool poisson_held = true;   // |grad psi_1 - grad psi_2| <= 2 |omega0|_inf eta + 10 h
  std::vector<double> times, eta;
};

/// Run 1 starts from omega0 with the identity map; run 2 from the shear
/// X(x) = (x1 + delta sin(2 pi x2), x2), an exactly measure-preserving map,
/// so omega2(0) = omega0 o X^{-1}. eta = |X_1(t) - X_2(t)|_L2 from tracked flow maps.
YudovichReport yudovich_twin_run(const GridField& omega0, double delta, const YudovichOptions& opt = {});

}  // namespace sglab
