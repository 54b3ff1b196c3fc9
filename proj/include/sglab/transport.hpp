#pragma once

#include <cstddef>
#include <vector>

#include "sglab/grid_field.hpp"
#include "sglab/monge_ampere.hpp"

namespace sglab {

struct TransportPlan {
  struct Entry {
    std::size_t i, j;
    double mass;
  };
  ParticleCloud source, target;
  std::vector<Entry> coupling;
  std::vector<std::size_t> assignment;  // target index per source (assignment case)
  double cost = 0.0;                    // sum of mass * squared distance
};

/// Squared transport distance used by the discrete solvers: torus distance when
/// both clouds are periodic, Euclidean otherwise.
double transport_cost(const Point& x, const Point& y, bool periodic);

/// Optimal assignment between equal-count clouds with equal uniform masses
/// (n <= 512). Among optimal permutations the lexicographically smallest one
/// (by target index of source 0, 1, ...) is returned.
TransportPlan exact_assignment(const ParticleCloud& a, const ParticleCloud& b);

/// Exact transport of unit masses at `sources` to sinks with integer
/// capacities summing to the source count, squared Euclidean cost, by
/// successive shortest paths on the sink graph. Returns the mean cost per unit.
double capacitated_transport_cost(const std::vector<Point>& sources, const std::vector<Point>& sinks,
                                  const std::vector<int>& capacity);

struct W2Options {
  std::size_t exact_limit = 512;  // largest uniform cloud solved by assignment
  double eps_start = 0.1;         // entropic scale, relative to the squared diameter
  double eps_end = 1e-3;
  double marginal_tol = 1e-9;
  int max_iterations = 5000;
};

/// Wasserstein-2 distance on the torus. Equal-count uniform clouds up to
/// exact_limit points use the assignment solver; anything else uses annealed
/// log-domain Sinkhorn with the debiased divergence. The result does not
/// depend on the argument order.
double w2_torus(const ParticleCloud& mu, const ParticleCloud& nu, const W2Options& opt = {});
/// Grid measures are quantized to node clouds with masses f h^d.
double w2_torus(const GridField& mu, const GridField& nu, const W2Options& opt = {});
ParticleCloud quantize(const GridField& f);

struct LaguerreDiagram {
  ParticleCloud cloud;  // positions as used (wrapped on the torus)
  Domain domain = Domain::torus(2);
  std::vector<double> weights;  // zero mean
  std::vector<double> cell_mass;
  std::vector<Point> barycenters;     // on the torus: the representative nearest to x_i
  std::vector<double> second_moment;  // int_cell |y - x_i|^2 dy
  double cost = 0.0;                  // sum of second moments
  double mass_defect = 0.0;           // max |cell_mass - mass|
  int newton_iterations = 0;
  int quadrature = 0;  // quadrature resolution per axis; 0 for exact 2-D cells
};

struct LaguerreOptions {
  double tol = 1e-10;
  int max_newton = 200;
  int quadrature = 32;                        // 3-D only
  const std::vector<double>* warm = nullptr;  // initial weights
};

/// Semi-discrete transport from the uniform measure on omega to the cloud:
/// cells argmin_i |y - x_i|^2 - w_i with masses matching the particle masses.
/// 2-D cells are exact polygons; 3-D cells use a softened quadrature.
LaguerreDiagram solve_laguerre(const ParticleCloud& cloud, const Domain& omega, const LaguerreOptions& opt = {});

/// Brenier map x -> x + grad u(x) on the 2-D torus pushing rho1 to rho2.
struct OptimalMap {
  GridField u;            // periodic, zero mean
  VectorField grad_u;     // centred differences
  double residual = 0.0;  // sup |det_h(I + D^2 u) - g / mean(g)|, g = rho1 / rho2(x + grad u)
  int newton_iterations = 0;
  double w2_squared = 0.0;  // int rho1 |grad u|^2
};

OptimalMap optimal_map(const GridField& rho1, const GridField& rho2, const MAOptions& opt = {});

struct McCannResult {
  GridField rho_theta;
  ConvexPotential phi;  // primal potential |x|^2/2 + u of the optimal map
};

/// Displacement interpolation rho_theta = ((2 - theta) id + (theta - 1) grad phi)_# rho1, theta in [1, 2].
McCannResult mccann_interpolate(const GridField& rho1, const GridField& rho2, double theta, const MAOptions& opt = {});
/// Same, reusing a computed map.
GridField interpolant_density(const GridField& rho1, const OptimalMap& map, double theta);
/// det_h of D^2 phi_theta = I + (theta - 1) D^2 u at the nodes.
GridField interpolant_determinant(const OptimalMap& map, double theta);

struct InterpolatingVelocity {
  GridField rho_theta;
  VectorField momentum;
  VectorField v;
  double kinetic_energy = 0.0;  // int rho_theta |v_theta|^2
};

/// v_theta from the momentum deposit of rho1 grad u at the interpolated
/// positions divided by the deposited mass. ResolutionError for empty cells.
InterpolatingVelocity interpolating_velocity(const GridField& rho1, const OptimalMap& map, double theta);

struct ConvexityReport {
  double sup = 0.0;    // max over theta of ||rho_theta||_inf
  double bound = 0.0;  // max(||rho1||_inf, ||rho2||_inf)
  std::vector<double> per_theta;
  bool violated = false;  // sup > bound (1 + slack)
};

ConvexityReport displacement_convexity_check(const GridField& rho1, const GridField& rho2,
                                             const std::vector<double>& thetas, double slack = 0.02,
                                             const MAOptions& opt = {});

/// Density X_# dx of a nodal map by cell splatting of the uniform density.
GridField pushforward_of_map(const std::vector<Point>& X, int n);

struct GeodesicEstimate {
  double lhs = 0.0;    // ||grad Psi1 - grad Psi2||_L2
  double rhs = 0.0;    // ||X1 - X2||_L2
  double ratio = 0.0;  // lhs / rhs, 0 when rhs = 0
  double w2_squared = 0.0;
  double kinetic_energy = 0.0;     // int rho_theta |v_theta|^2 at the midpoint
  double elliptic_mismatch = 0.0;  // relative L2 gap of the theta-integrated route
};

/// Compares the dual potential gradients of X1_# dx and X2_# dx with the map
/// distance; with `elliptic` also integrates d/dtheta grad Psi_theta along the
/// geodesic by Gauss quadrature and reports its mismatch.
GeodesicEstimate geodesic_energy_estimate(const std::vector<Point>& X1, const std::vector<Point>& X2, int n,
                                          bool elliptic = true, const MAOptions& opt = {});

struct PoissonEstimate {
  double lhs = 0.0;    // ||grad psi1 - grad psi2||_L2
  double rhs = 0.0;    // ||X1 - X2||_L2
  double bound = 0.0;  // 2 ||rho0||_inf rhs + 10 h
  bool holds = true;
};

/// Pushes the signed field rho0 forward by two maps through its positive and
/// negative parts and compares the Poisson potentials.
PoissonEstimate poisson_energy_estimate(const std::vector<Point>& X1, const std::vector<Point>& X2,
                                        const GridField& rho0);

/// L2 distance between two nodal maps on the torus (minimal-image differences).
double map_distance(const std::vector<Point>& X1, const std::vector<Point>& X2);

}  // namespace sglab
