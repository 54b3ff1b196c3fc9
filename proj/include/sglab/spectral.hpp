#pragma once

#include "sglab/grid_field.hpp"

namespace sglab::spectral {

/// Solves Delta u = f on the torus with the exact Fourier symbol, zero-mean
/// gauge. Throws MeanNotZero if |mean f| > tol.
GridField poisson_solve(const GridField& f, double mean_tol = 1e-10);

/// Spectral Laplacian.
GridField laplacian(const GridField& u);

/// Inverse of the standard (2d+1)-point finite-difference Laplacian on the
/// zero-mean subspace. Used as the Newton preconditioner.
GridField fd_laplacian_inverse(const GridField& f);

/// Spectral partial derivative along `axis`. Odd derivatives drop the Nyquist mode.
GridField derivative(const GridField& u, int axis);
/// Spectral second derivative d^2 u / dx_a dx_b.
GridField second_derivative(const GridField& u, int a, int b);
/// Spectral third derivative.
GridField third_derivative(const GridField& u, int a, int b, int c);

VectorField gradient(const GridField& u);

/// Resolution-n projection of an arbitrary field onto its lowest `keep` modes per
/// axis (a sharp low-pass filter).
GridField low_pass(const GridField& u, int keep);

}  // namespace sglab::spectral
