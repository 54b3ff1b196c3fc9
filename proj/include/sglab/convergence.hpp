#pragma once

#include <vector>

#include "sglab/advection.hpp"
#include "sglab/euler2d.hpp"
#include "sglab/monge_ampere.hpp"
#include "sglab/record.hpp"

namespace sglab {

/// Rescaled SG on the 2-D torus: det_h(I + eps D^2 psi) = 1 + eps rho, rho
/// transported by perp(grad psi). phi^eps is defined through the primal
/// potential: eps phi^eps = |x|^2/2 - Phi with Phi the Legendre transform of
/// |x|^2/2 + eps psi.
struct SGEpsState {
  double eps = 0.0;
  double t = 0.0;
  GridField rho;          // zero mean, 1 + eps rho > 0
  GridField psi;          // zero mean
  VectorField grad_psi;   // spectral
  VectorField u, u_prev;  // perp(grad psi); u_prev empty before the first step
  std::vector<Point> dual_points;  // grad Phi(x) = x - eps grad phi^eps(x), unwrapped
  VectorField grad_phi;   // grad phi^eps at the nodes
  GridField phi;          // phi^eps
  double ma_residual = 0.0;  // sup |(det_h(I + eps D^2 psi) - 1)/eps - rho|
  int newton_iterations = 0;
};

struct EpsOptions {
  double tol = 1e-10;  // residual target in the units of rho
  MAOptions ma;        // tol is overridden by eps * tol
  AdvectionOptions adv;
  double cfl = 1.0;
};

/// Solves the eps-MA problem for rho and fills psi, velocities and phi^eps.
/// Without a warm start Newton is seeded with eps times the Poisson solution.
SGEpsState init_sg_eps(const GridField& rho, double eps, const EpsOptions& opt = {}, const GridField* warm_psi = nullptr);

/// Semi-Lagrangian transport of rho, re-zeroed mean, then a warm-started eps-MA solve.
/// StateInvalid when 1 + eps rho <= 0.
SGEpsState sg_eps_step(const SGEpsState& s, double dt, const EpsOptions& opt = {});

/// rho^{eps,0} with grad phi^eps(0) = grad phibar(0) up to discretization:
/// 1 + eps rho is the push-forward of dx by x - eps grad phibar0(x).
GridField well_prepared_density(const GridField& rho_bar0, double eps);

/// Sup norms of D^2 phibar, D^3 phibar and D^2 d_t phibar (spectral) for an Euler state.
struct EulerNorms {
  double d2 = 0.0, d3 = 0.0, d2dt = 0.0;
};
EulerNorms euler_norms(const EulerState& e);

struct EnergyReport {
  double t = 0.0;
  double H = 0.0;  // 1/2 int |grad phi^eps - grad phibar|^2
  double G = 0.0;  // 1/2 int (1 + eps rho) |grad psi^eps - grad phibar|^2
  double Q = 0.0;  // int eps <D^2 phibar> grad phi^eps . grad phi^eps
  double Delta = 0.0;
  double Delta_low = 0.0;   // part of Delta from |grad phi^eps| <= eps^(-1/3)
  double Delta_high = 0.0;  // the rest
  double E = 0.0;           // int |grad phi^eps|^2
};

/// StateInvalid if the two states are at different times or on different grids.
EnergyReport modulated_energy(const SGEpsState& s, const EulerState& e);

/// Expansion rho^eps = rhobar + eps rho1, psi^eps = phibar_h + eps psi1, phibar_h the
/// Euler streamfunction for the finite-difference Laplacian.
struct ExpansionReport {
  double rho1_w1inf = 0.0;   // |rho1|_inf + |grad rho1|_inf (centred differences)
  double rho1_lip = 0.0;     // |rho1|_inf + Lipschitz constant proxy
  double psi1_c11 = 0.0;     // |psi1|_inf + |grad psi1|_inf + |D^2 psi1|_inf
  double residual = 0.0;     // sup |Lap psi1 + eps tr(cof(D^2 phibar) D^2 psi1) + eps^2 det D^2 psi1 - rho1 + det D^2 phibar|
};
ExpansionReport expansion_monitor(const SGEpsState& s, const EulerState& e);

struct SweepOptions {
  int n = 128;
  double T = 1.0;
  double dt = 0.02;
  EpsOptions eps_opt;
  bool well_prepared = true;  // otherwise rho^{eps,0} = rhobar0
  int threads = 1;
};

/// SG_eps against Euler from the same vorticity.
struct PairedRun {
  double eps = 0.0;
  RunRecord record;  // t, H, G, Q, Delta, Delta_low, Delta_high, E, d2, d3, d2dt, rho1_w1inf, psi1_c11, psi1_residual, ma_residual
  double H0 = 0.0, HT = 0.0, GT = 0.0, E_drift = 0.0;
  double sup_rho1_w1inf = 0.0;
  double max_psi1_residual = 0.0;
  double norms_sup = 0.0;  // sup_t max(d2, d3, d2dt)
};

PairedRun paired_run(const GridField& rho_bar0, double eps, const SweepOptions& opt = {});

struct SweepReport {
  std::vector<PairedRun> runs;  // in the order of the eps list
  RunRecord table;              // eps, T, H0, HT, GT, E_drift, exponent_running
  double exponent = 0.0;        // least-squares slope of log HT against log eps
  double c_hat = 0.0;           // sup over runs of norms_sup
  std::vector<bool> envelope_ok, q_ok, delta_ok, energy_ok;
  bool all_ok = true;           // every check above passed and exponent >= 0.6
};

/// Runs the pairs (concurrently with opt.threads > 1), then checks for every
/// run and time H <= (H0 + C eps^(2/3)(1 + t)) e^(C t), |Q| <= C eps,
/// |Delta| <= C (eps^(2/3) + H) and E drift <= 1e-3, with C = c_hat.
SweepReport eps_sweep(const GridField& rho_bar0, const std::vector<double>& eps, const SweepOptions& opt = {});

struct StrongReport {
  std::vector<double> eps, sup_rho1_w1inf, residual_scaled;  // residual * eps / tol
  double variation = 0.0;     // max / min of sup_rho1_w1inf
  double elliptic_c = 0.0;    // max over runs and times of psi1_c11 / (1 + rho1_w1inf)
  bool ok = true;             // variation <= 2 and residual_scaled <= 10
};

StrongReport strong_expansion_monitor(const SweepReport& sweep, double tol);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sglab
