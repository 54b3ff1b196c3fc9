#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sglab/geometry.hpp"

namespace sglab {

/// Pairwise (cascade) summation; the result does not depend on thread count.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

/// Periodic scalar field on the uniform grid {i h : 0 <= i < n}^d of the unit
/// torus, h = 1/n. Storage is row-major with the last axis fastest.
class GridField {
 public:
  GridField() = default;
  GridField(int dim, int n, double value = 0.0);

  template <class F>
  static GridField sample(int dim, int n, F&& f) {
    GridField g(dim, n);
    for (std::size_t q = 0; q < g.size(); ++q) g.v_[q] = f(g.node(q));
    return g;
  }

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }
  std::size_t size() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.empty(); }

  double& operator[](std::size_t q) noexcept { return v_[q]; }
  double operator[](std::size_t q) const noexcept { return v_[q]; }
  std::vector<double>& values() noexcept { return v_; }
  const std::vector<double>& values() const noexcept { return v_; }
  double* data() noexcept { return v_.data(); }
  const double* data() const noexcept { return v_.data(); }

  /// Stride of `axis` in the flat array.
  std::size_t stride(int axis) const noexcept { return strides_[static_cast<std::size_t>(axis)]; }
  int coord(std::size_t q, int axis) const noexcept {
    return static_cast<int>((q / stride(axis)) % static_cast<std::size_t>(n_));
  }
  /// Flat index of the node `offset` steps along `axis` from q, periodically.
  std::size_t shift(std::size_t q, int axis, int offset) const noexcept;
  std::size_t flat(int i, int j) const noexcept;
  std::size_t flat(int i, int j, int k) const noexcept;
  Point node(std::size_t q) const;

  double mean() const;
  /// Integral over the unit torus (equal to the mean).
  double integral() const { return mean(); }
  double min() const;
  double max() const;
  double max_abs() const;
  double l2_norm() const;

  /// Declared density envelope m <= f <= M; checked by check_bounds().
  void set_bounds(double m, double M);
  const std::optional<std::pair<double, double>>& bounds() const noexcept { return bounds_; }
  void check_bounds(double slack = 0.0) const;

  bool same_shape(const GridField& o) const noexcept { return dim_ == o.dim_ && n_ == o.n_; }
  void require_same_shape(const GridField& o, const char* what) const;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(double s);
  GridField& operator+=(double s);
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(GridField a, double s) { return a *= s; }
  friend GridField operator*(double s, GridField a) { return a *= s; }

 private:
  int dim_ = 0;
  int n_ = 0;
  std::vector<std::size_t> strides_;
  std::vector<double> v_;
  std::optional<std::pair<double, double>> bounds_;
};

/// d component fields on a common grid.
struct VectorField {
  std::vector<GridField> comp;

  VectorField() = default;
  VectorField(int dim, int n, int components) : comp(static_cast<std::size_t>(components), GridField(dim, n)) {}

  int components() const noexcept { return static_cast<int>(comp.size()); }
  Point at(std::size_t q) const;
  void set(std::size_t q, const Point& v);
  /// max over nodes of the Euclidean norm.
  double max_norm() const;
  /// sqrt of the mean of |v|^2.
  double l2_norm() const;
};

/// Weighted Dirac measure sum_i m_i delta_{x_i}.
struct ParticleCloud {
  int dim = 2;
  std::vector<Point> positions;
  std::vector<double> masses;
  bool periodic = false;

  std::size_t size() const noexcept { return positions.size(); }
  double total_mass() const;
  /// Throws InvalidArgument on non-positive masses or mismatched sizes.
  void validate() const;
  static ParticleCloud uniform(std::vector<Point> pts, bool periodic);
};

// CSV snapshots. Values are written with 17 significant digits.
void write_field_csv(const std::string& path, const GridField& f, const std::string& kind = "");
GridField read_field_csv(const std::string& path, std::string* kind = nullptr);
std::string field_to_csv(const GridField& f, const std::string& kind = "");
GridField field_from_csv(const std::string& text, std::string* kind = nullptr);

void write_cloud_csv(const std::string& path, const ParticleCloud& c);
ParticleCloud read_cloud_csv(const std::string& path, bool periodic);

}  // namespace sglab
