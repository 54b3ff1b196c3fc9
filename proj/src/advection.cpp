#include "sglab/advection.hpp"

#include "sglab/interpolation.hpp"

namespace sglab {

namespace {

// Velocity at a point, blending two time levels: (1 - s) a + s b.
Point blend(const VectorField& a, const VectorField* b, double s, const Point& x, int order) {
  if (b == nullptr || s == 0.0) return interpolate(a, x, order);
  const int m = a.components();
  const GridField* fs[6] = {};
  double out[6];
  for (int k = 0; k < m; ++k) {
    fs[k] = &a.comp[k];
    fs[m + k] = &b->comp[k];
  }
  interpolate_many(fs, 2 * m, x, order, out);
  Point r = Point::zero(m);
  for (int k = 0; k < m; ++k) r[k] = (1.0 - s) * out[k] + s * out[m + k];
  return r;
}

}  // namespace

std::vector<Point> departure_points(const VectorField& v_now, const VectorField* v_prev, double dt,
                                    const AdvectionOptions& opt) {
  const GridField& ref = v_now.comp.at(0);
  std::vector<Point> out(ref.size());
  const int m = std::max(1, opt.substeps);
  const double k = dt / m;
  // Time is measured in units of dt from t; extrapolation weight on v_prev is -tau.
  auto vel = [&](double tau, const Point& x) {
    if (v_prev == nullptr) return interpolate(v_now, x, opt.order);
    return blend(v_now, v_prev, -tau, x, opt.order);
  };
  for (std::size_t q = 0; q < ref.size(); ++q) {
    Point x = ref.node(q);
    for (int s = m; s > 0; --s) {
      const double t1 = double(s) / m, th = (s - 0.5) / m, t0 = double(s - 1) / m;
      Point k1 = vel(t1, x);
      Point k2 = vel(th, x - k1 * (0.5 * k));
      Point k3 = vel(th, x - k2 * (0.5 * k));
      Point k4 = vel(t0, x - k3 * k);
      x -= (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (k / 6.0);
    }
    out[q] = x;
  }
  return out;
}

GridField advect(const GridField& f, const std::vector<Point>& departures, const AdvectionOptions& opt) {
  if (departures.size() != f.size()) throw Error(ErrorCode::DimensionError, "advect: departure count mismatch");
  GridField g(f.dim(), f.n());
  for (std::size_t q = 0; q < f.size(); ++q) {
    g[q] = opt.clip ? interpolate_clipped(f, departures[q], opt.order) : interpolate(f, departures[q], opt.order);
  }
  return g;
}

void advance_points(std::vector<Point>& pts, const VectorField& v_start, const VectorField& v_end, double dt,
                    int order, int substeps) {
  const int m = std::max(1, substeps);
  const double k = dt / m;
  auto vel = [&](double tau, const Point& x) { return blend(v_start, &v_end, tau, x, order); };
  for (auto& x : pts) {
    for (int s = 0; s < m; ++s) {
      const double t0 = double(s) / m, th = (s + 0.5) / m, t1 = double(s + 1) / m;
      Point k1 = vel(t0, x);
      Point k2 = vel(th, x + k1 * (0.5 * k));
      Point k3 = vel(th, x + k2 * (0.5 * k));
      Point k4 = vel(t1, x + k3 * k);
      x += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (k / 6.0);
    }
  }
}

}  // namespace sglab
