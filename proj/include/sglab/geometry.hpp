#pragma once

#include <array>
#include <cmath>
#include <initializer_list>

#include "sglab/error.hpp"

namespace sglab {

/// A point or vector in R^d for d in {1,2,3}. Unused trailing coordinates are
/// kept at zero so value comparisons are exact.
class Point {
 public:
  Point() = default;
  Point(double x, double y) : c_{x, y, 0.0}, dim_(2) {}
  Point(double x, double y, double z) : c_{x, y, z}, dim_(3) {}

  static Point zero(int dim);

  int dim() const noexcept { return dim_; }
  double operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }

  Point& operator+=(const Point& o) noexcept;
  Point& operator-=(const Point& o) noexcept;
  Point& operator*=(double s) noexcept;

  friend Point operator+(Point a, const Point& b) noexcept { return a += b; }
  friend Point operator-(Point a, const Point& b) noexcept { return a -= b; }
  friend Point operator*(Point a, double s) noexcept { return a *= s; }
  friend Point operator*(double s, Point a) noexcept { return a *= s; }
  friend Point operator-(Point a) noexcept { return a *= -1.0; }
  friend bool operator==(const Point& a, const Point& b) noexcept {
    return a.dim_ == b.dim_ && a.c_ == b.c_;
  }

 private:
  std::array<double, 3> c_{};
  int dim_ = 2;
};

double dot(const Point& a, const Point& b) noexcept;
double norm2(const Point& a) noexcept;
inline double norm(const Point& a) noexcept { return std::sqrt(norm2(a)); }

/// Canonical representative of x on the unit torus, componentwise in [0,1).
Point wrap(const Point& x);
double wrap_coordinate(double x) noexcept;

/// Minimal-image displacement from `from` to `to` on the unit torus; each
/// component lies in [-1/2, 1/2].
Point torus_delta(const Point& from, const Point& to);

/// Riemannian distance on the flat unit torus.
double torus_distance(const Point& x, const Point& y);

/// Horizontal quarter rotation: (-v2, v1) in 2-D, (-v2, v1, 0) in 3-D.
Point perp(const Point& v);

/// Either the flat torus T^d or an axis-aligned box of unit volume.
class Domain {
 public:
  enum class Kind { Torus, Box };

  static Domain torus(int dim);
  /// Throws InvalidArgument unless the box has volume 1 within 1e-12.
  static Domain box(const Point& lower, const Point& upper);
  /// The unit box centred at the origin, [-1/2, 1/2]^d.
  static Domain centered_box(int dim);

  Kind kind() const noexcept { return kind_; }
  bool periodic() const noexcept { return kind_ == Kind::Torus; }
  int dim() const noexcept { return dim_; }
  const Point& lower() const noexcept { return lower_; }
  const Point& upper() const noexcept { return upper_; }

  double measure() const noexcept;
  Point centroid() const noexcept;
  /// sup_{y in Omega} |y|; for the torus the sup over the fundamental cell [0,1)^d.
  double sup_norm() const noexcept;
  bool contains(const Point& p) const noexcept;

 private:
  Domain(Kind kind, int dim, Point lower, Point upper)
      : kind_(kind), dim_(dim), lower_(lower), upper_(upper) {}

  Kind kind_;
  int dim_;
  Point lower_;
  Point upper_;
};

}  // namespace sglab
