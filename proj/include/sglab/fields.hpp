#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sglab/grid_field.hpp"

namespace sglab {

/// Discrete modulus of continuity: w(r) = max |f(x) - f(y)| over grid pairs
/// with torus distance <= r. Pairs are enumerated exhaustively on coarse grids;
/// on fine grids small offsets are scanned exhaustively and larger ones are
/// drawn at random with the given seed.
std::vector<double> modulus_of_continuity(const GridField& f, const std::vector<double>& radii,
                                          std::uint64_t seed = 0);

/// Running-max table (distance, w) over sampled offsets, sorted by distance.
/// Shared by the modulus and the Dini seminorm so the pair scan runs once.
std::vector<std::pair<double, double>> modulus_table(const GridField& f, std::uint64_t seed = 0);

struct DiniResult {
  double value = 0.0;
  double r_min = 0.0;  // lower integration limit (the grid spacing)
};

/// int_{h}^{1} w(r)/r dr by trapezoid on log-spaced radii.
DiniResult dini_seminorm(const GridField& f, std::uint64_t seed = 0);

/// int_{r_min}^{1} w(r)/r dr for an explicit modulus w.
double dini_integral(const std::function<double(double)>& w, double r_min, int points = 400);

/// Exact grid (min, max).
std::pair<double, double> linf_envelope(const GridField& f);

/// f = plus - minus with both parts nonnegative; requires |mean f| <= 1e-10.
std::pair<GridField, GridField> signed_split(const GridField& f);

}  // namespace sglab
