#include "sglab/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sglab {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

GridField::GridField(int dim, int n, double value) : dim_(dim), n_(n) {
  if (dim < 1 || dim > 3) throw Error(ErrorCode::DimensionError, "grid dimension must be 1, 2 or 3");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid resolution must be at least 2");
  strides_.assign(static_cast<std::size_t>(dim), 1);
  for (int a = dim - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(n);
  std::size_t total = strides_[0] * static_cast<std::size_t>(n);
  v_.assign(total, value);
}

std::size_t GridField::shift(std::size_t q, int axis, int offset) const noexcept {
  const int c = coord(q, axis);
  int m = (c + offset) % n_;
  if (m < 0) m += n_;
  return q + (static_cast<std::ptrdiff_t>(m) - c) * static_cast<std::ptrdiff_t>(stride(axis));
}

std::size_t GridField::flat(int i, int j) const noexcept {
  auto w = [this](int c) { int m = c % n_; return static_cast<std::size_t>(m < 0 ? m + n_ : m); };
  return w(i) * strides_[0] + w(j);
}

std::size_t GridField::flat(int i, int j, int k) const noexcept {
  auto w = [this](int c) { int m = c % n_; return static_cast<std::size_t>(m < 0 ? m + n_ : m); };
  return w(i) * strides_[0] + w(j) * strides_[1] + w(k);
}

Point GridField::node(std::size_t q) const {
  Point p = Point::zero(dim_);
  for (int a = 0; a < dim_; ++a) p[a] = coord(q, a) * h();
  return p;
}

double GridField::mean() const { return pairwise_sum(v_) / static_cast<double>(v_.size()); }

double GridField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double GridField::max() const { return *std::max_element(v_.begin(), v_.end()); }

double GridField::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

double GridField::l2_norm() const {
  std::vector<double> sq(v_.size());
  for (std::size_t q = 0; q < v_.size(); ++q) sq[q] = v_[q] * v_[q];
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(v_.size()));
}

void GridField::set_bounds(double m, double M) {
  if (!(m <= M)) throw Error(ErrorCode::InvalidArgument, "density bounds must satisfy m <= M");
  bounds_ = std::make_pair(m, M);
}

void GridField::check_bounds(double slack) const {
  for (double x : v_) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidValue, "grid field holds a non-finite value");
  }
  if (!bounds_) return;
  if (min() < bounds_->first - slack || max() > bounds_->second + slack) {
    throw Error(ErrorCode::InvalidDensity, "density leaves its declared envelope");
  }
}

void GridField::require_same_shape(const GridField& o, const char* what) const {
  if (!same_shape(o)) throw Error(ErrorCode::DimensionError, std::string(what) + ": grid shapes differ");
}

GridField& GridField::operator+=(const GridField& o) {
  require_same_shape(o, "operator+=");
  for (std::size_t q = 0; q < v_.size(); ++q) v_[q] += o.v_[q];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  require_same_shape(o, "operator-=");
  for (std::size_t q = 0; q < v_.size(); ++q) v_[q] -= o.v_[q];
  return *this;
}

GridField& GridField::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

GridField& GridField::operator+=(double s) {
  for (double& x : v_) x += s;
  return *this;
}

Point VectorField::at(std::size_t q) const {
  Point p = Point::zero(components());
  for (int a = 0; a < components(); ++a) p[a] = comp[a][q];
  return p;
}

void VectorField::set(std::size_t q, const Point& v) {
  for (int a = 0; a < components(); ++a) comp[a][q] = v[a];
}

double VectorField::max_norm() const {
  if (comp.empty()) return 0.0;
  double m = 0.0;
  for (std::size_t q = 0; q < comp[0].size(); ++q) m = std::max(m, norm(at(q)));
  return m;
}

double VectorField::l2_norm() const {
  if (comp.empty()) return 0.0;
  std::vector<double> sq(comp[0].size(), 0.0);
  for (const auto& c : comp) {
    for (std::size_t q = 0; q < sq.size(); ++q) sq[q] += c[q] * c[q];
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
}

double ParticleCloud::total_mass() const { return pairwise_sum(masses); }

void ParticleCloud::validate() const {
  if (positions.size() != masses.size()) {
    throw Error(ErrorCode::InvalidArgument, "cloud positions and masses differ in length");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (positions[i].dim() != dim) throw Error(ErrorCode::DimensionError, "cloud point has wrong dimension");
    if (!(masses[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "cloud masses must be positive");
    for (int a = 0; a < dim; ++a) {
      if (!std::isfinite(positions[i][a])) throw Error(ErrorCode::InvalidPoint, "non-finite particle position");
    }
  }
}

ParticleCloud ParticleCloud::uniform(std::vector<Point> pts, bool periodic) {
  ParticleCloud c;
  c.dim = pts.empty() ? 2 : pts.front().dim();
  c.masses.assign(pts.size(), pts.empty() ? 0.0 : 1.0 / static_cast<double>(pts.size()));
  c.positions = std::move(pts);
  c.periodic = periodic;
  return c;
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace

std::string field_to_csv(const GridField& f, const std::string& kind) {
  std::string s = "# gridfield d=" + std::to_string(f.dim()) + " n=" + std::to_string(f.n());
  if (!kind.empty()) s += " kind=" + kind;
  s += "\n";
  s.reserve(s.size() + f.size() * 24);
  for (double x : f.values()) {
    s += fmt17(x);
    s += '\n';
  }
  return s;
}

GridField field_from_csv(const std::string& text, std::string* kind) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header.rfind("# gridfield", 0) != 0) {
    throw Error(ErrorCode::SyntaxError, "line 1: missing '# gridfield' header");
  }
  int d = 0, n = 0;
  std::string k;
  std::istringstream hs(header.substr(11));
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::SyntaxError, "line 1: bad header token " + tok);
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "d") d = std::stoi(val);
    else if (key == "n") n = std::stoi(val);
    else if (key == "kind") k = val;
    else throw Error(ErrorCode::SyntaxError, "line 1: unknown header key " + key);
  }
  GridField f(d, n);
  std::string line;
  std::size_t q = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (q >= f.size()) throw Error(ErrorCode::SyntaxError, "line " + std::to_string(lineno) + ": too many values");
    try {
      std::size_t used = 0;
      f[q] = std::stod(line, &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::SyntaxError, "line " + std::to_string(lineno) + ": not a number");
    }
    ++q;
  }
  if (q != f.size()) throw Error(ErrorCode::SyntaxError, "field has " + std::to_string(q) + " values, expected " + std::to_string(f.size()));
  if (kind) *kind = k;
  return f;
}

void write_field_csv(const std::string& path, const GridField& f, const std::string& kind) {
  write_all(path, field_to_csv(f, kind));
}

GridField read_field_csv(const std::string& path, std::string* kind) { return field_from_csv(read_all(path), kind); }

void write_cloud_csv(const std::string& path, const ParticleCloud& c) {
  std::string s;
  for (int a = 0; a < c.dim; ++a) s += "x" + std::to_string(a + 1) + ",";
  s += "mass\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int a = 0; a < c.dim; ++a) s += fmt17(c.positions[i][a]) + ",";
    s += fmt17(c.masses[i]) + "\n";
  }
  write_all(path, s);
}

ParticleCloud read_cloud_csv(const std::string& path, bool periodic) {
  std::istringstream in(read_all(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SyntaxError, "empty cloud file");
  const int cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  ParticleCloud c;
  c.dim = cols - 1;
  c.periodic = periodic;
  if (c.dim != 2 && c.dim != 3) throw Error(ErrorCode::DimensionError, "cloud file must have 3 or 4 columns");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::SyntaxError, "line " + std::to_string(lineno) + ": not a number");
      }
    }
    if (static_cast<int>(vals.size()) != cols) throw Error(ErrorCode::SyntaxError, "line " + std::to_string(lineno) + ": wrong column count");
    Point p = Point::zero(c.dim);
    for (int a = 0; a < c.dim; ++a) p[a] = vals[a];
    c.positions.push_back(p);
    c.masses.push_back(vals.back());
  }
  c.validate();
  return c;
}

}  // namespace sglab
