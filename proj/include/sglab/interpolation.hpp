#pragma once

#include "sglab/grid_field.hpp"

namespace sglab {

/// Tensor-product periodic Lagrange interpolation of odd order 1, 3 or 5
/// (2, 4 or 6 nodes per axis). The point may lie anywhere in R^d.
double interpolate(const GridField& f, const Point& x, int order);

/// Same, also returning the gradient of the interpolant.
double interpolate_with_gradient(const GridField& f, const Point& x, int order, Point& grad);

/// Interpolated value clamped to the range of the 2^d surrounding nodes.
double interpolate_clipped(const GridField& f, const Point& x, int order);

/// Evaluates `count` fields on a common grid at x with one shared stencil.
void interpolate_many(const GridField* const* fields, int count, const Point& x, int order, double* out);

/// Vector version: interpolates each component.
Point interpolate(const VectorField& v, const Point& x, int order);

}  // namespace sglab
