#pragma once

#include <functional>

#include "sglab/grid_field.hpp"

namespace sglab {

/// A map on the torus given as x -> x + displacement(x); the displacement is
/// periodic and the image is read modulo 1.
using DisplacementFn = std::function<Point(const Point&)>;

struct DepositOptions {
  int subdivisions = 2;  // each source cell is split into s^d subcells
};

/// Push-forward (x + D(x))_# (rho dx) on the 2-D torus by cell splatting: every
/// subcell carries a piece of a slope-limited linear reconstruction of rho, its
/// image quadrilateral is clipped against the target cells and the mass is
/// shared by area fraction. Total mass is conserved to round-off and the
/// identity map reproduces rho exactly.
GridField push_forward(const GridField& rho, const DisplacementFn& disp, const DepositOptions& opt = {});

struct MomentumDeposit {
  GridField mass;       // pushed-forward density
  VectorField momentum; // pushed-forward rho * w
};

/// Same deposition, also carrying the vector quantity rho * w(x) for a
/// per-unit-mass field w evaluated at subcell centres.
MomentumDeposit push_forward_momentum(const GridField& rho, const DisplacementFn& disp,
                                      const std::function<Point(const Point&)>& w, const DepositOptions& opt = {});

/// Displacement callable built from node values by periodic interpolation.
DisplacementFn displacement_from_nodes(const VectorField& nodal, int order = 3);

/// Signed area of a simple polygon.
double polygon_area(const std::vector<Point>& poly);

/// Clips a polygon to the axis-aligned rectangle [lo, hi] (Sutherland-Hodgman).
std::vector<Point> clip_to_rectangle(const std::vector<Point>& poly, const Point& lo, const Point& hi);

}  // namespace sglab
