#include "sglab/geometry.hpp"

#include <algorithm>
#include <string>

namespace sglab {

Point Point::zero(int dim) {
  if (dim < 1 || dim > 3) {
    throw Error(ErrorCode::DimensionError, "dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  Point p;
  p.dim_ = dim;
  return p;
}

Point& Point::operator+=(const Point& o) noexcept {
  for (int i = 0; i < 3; ++i) c_[i] += o.c_[i];
  return *this;
}

Point& Point::operator-=(const Point& o) noexcept {
  for (int i = 0; i < 3; ++i) c_[i] -= o.c_[i];
  return *this;
}

Point& Point::operator*=(double s) noexcept {
  for (int i = 0; i < 3; ++i) c_[i] *= s;
  return *this;
}

double dot(const Point& a, const Point& b) noexcept {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Point& a) noexcept { return dot(a, a); }

double wrap_coordinate(double x) noexcept {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.0.
  if (r >= 1.0) r = 0.0;
  return r;
}

Point wrap(const Point& x) {
  Point r = Point::zero(x.dim());
  for (int i = 0; i < x.dim(); ++i) {
    if (!std::isfinite(x[i])) {
      throw Error(ErrorCode::InvalidPoint, "non-finite coordinate " + std::to_string(i));
    }
    r[i] = wrap_coordinate(x[i]);
  }
  return r;
}

Point torus_delta(const Point& from, const Point& to) {
  if (from.dim() != to.dim()) {
    throw Error(ErrorCode::DimensionError, "torus_delta: dimension mismatch");
  }
  Point d = Point::zero(from.dim());
  for (int i = 0; i < from.dim(); ++i) {
    double t = to[i] - from[i];
    d[i] = t - std::round(t);
  }
  return d;
}

double torus_distance(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) {
    throw Error(ErrorCode::DimensionError, "torus_distance: dimension mismatch");
  }
  return norm(torus_delta(x, y));
}

Point perp(const Point& v) {
  if (v.dim() == 2) return Point(-v[1], v[0]);
  if (v.dim() == 3) return Point(-v[1], v[0], 0.0);
  throw Error(ErrorCode::DimensionError, "perp requires d in {2,3}");
}

Domain Domain::torus(int dim) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::DimensionError, "torus dimension must be 2 or 3");
  Point lo = Point::zero(dim);
  Point hi = Point::zero(dim);
  for (int i = 0; i < dim; ++i) hi[i] = 1.0;
  return Domain(Kind::Torus, dim, lo, hi);
}

Domain Domain::box(const Point& lower, const Point& upper) {
  if (lower.dim() != upper.dim()) throw Error(ErrorCode::DimensionError, "box corners differ in dimension");
  const int dim = lower.dim();
  if (dim != 2 && dim != 3) throw Error(ErrorCode::DimensionError, "box dimension must be 2 or 3");
  double vol = 1.0;
  for (int i = 0; i < dim; ++i) {
    if (!(upper[i] > lower[i])) throw Error(ErrorCode::InvalidArgument, "box corners are not ordered");
    vol *= upper[i] - lower[i];
  }
  if (std::abs(vol - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "box must have unit volume, got " + std::to_string(vol));
  }
  return Domain(Kind::Box, dim, lower, upper);
}

Domain Domain::centered_box(int dim) {
  Point lo = Point::zero(dim);
  Point hi = Point::zero(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = -0.5;
    hi[i] = 0.5;
  }
  return box(lo, hi);
}

double Domain::measure() const noexcept {
  double v = 1.0;
  for (int i = 0; i < dim_; ++i) v *= upper_[i] - lower_[i];
  return v;
}

Point Domain::centroid() const noexcept { return (lower_ + upper_) * 0.5; }

double Domain::sup_norm() const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double m = std::max(std::abs(lower_[i]), std::abs(upper_[i]));
    s += m * m;
  }
  return std::sqrt(s);
}

bool Domain::contains(const Point& p) const noexcept {
  for (int i = 0; i < dim_; ++i) {
    if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
  }
  return true;
}

}  // namespace sglab
