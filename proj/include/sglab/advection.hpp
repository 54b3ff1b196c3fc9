#pragma once

#include <vector>

#include "sglab/grid_field.hpp"

namespace sglab {

/// Semi-Lagrangian transport kernel shared by the SG, Euler and SG_eps solvers.
struct AdvectionOptions {
  int order = 5;       // Lagrange interpolation order for the transported field
  bool clip = false;   // clamp to the local node range (bounded but dissipative)
  int substeps = 1;    // RK4 substeps when tracing characteristics
};

/// Feet of the characteristics ending at the grid nodes at t + dt. The velocity
/// is v_now at time t and linearly extrapolated from (v_prev, v_now) towards
/// t + dt when v_prev is given (same time step assumed).
std::vector<Point> departure_points(const VectorField& v_now, const VectorField* v_prev, double dt,
                                    const AdvectionOptions& opt = {});

/// f evaluated at the departure points.
GridField advect(const GridField& f, const std::vector<Point>& departures, const AdvectionOptions& opt = {});

/// Moves points forward from t to t + dt with RK4, velocity linear in time
/// between v_start and v_end. Positions are not wrapped.
void advance_points(std::vector<Point>& pts, const VectorField& v_start, const VectorField& v_end, double dt,
                    int order = 5, int substeps = 1);

}  // namespace sglab
