#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "sglab/transport.hpp"

namespace sglab {

namespace {

struct Vertex {
  double x, y;
  long label;  // label of the edge leaving this vertex; -1 for the domain boundary
};

// Keeps the part of the polygon with a.z <= c; the new edge gets `label`.
void clip(std::vector<Vertex>& poly, std::vector<Vertex>& out, double ax, double ay, double c, long label) {
  out.clear();
  const std::size_t m = poly.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Vertex& p = poly[k];
    const Vertex& q = poly[(k + 1) % m];
    const double fp = ax * p.x + ay * p.y - c, fq = ax * q.x + ay * q.y - c;
    if (fp <= 0.0) {
      if (fq > 0.0 && fp < 0.0) {
        const double t = fp / (fp - fq);
        out.push_back(p);
        out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y), label});
      } else if (fq > 0.0) {
        out.push_back({p.x, p.y, label});
      } else {
        out.push_back(p);
      }
    } else if (fq < 0.0) {
      const double t = fp / (fp - fq);
      out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y), p.label});
    }
  }
  poly.swap(out);
}

struct CellIntegrals {
  double area = 0.0, sx = 0.0, sy = 0.0, second = 0.0;
};

// Area, first and second moments of a polygon given relative to its site.
CellIntegrals integrate(const std::vector<Vertex>& poly) {
  CellIntegrals r;
  const std::size_t m = poly.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Vertex& p = poly[k];
    const Vertex& q = poly[(k + 1) % m];
    const double cr = p.x * q.y - q.x * p.y;
    r.area += cr;
    r.sx += (p.x + q.x) * cr;
    r.sy += (p.y + q.y) * cr;
    r.second += (p.x * p.x + p.x * q.x + q.x * q.x + p.y * p.y + p.y * q.y + q.y * q.y) * cr;
  }
  r.area *= 0.5;
  r.sx /= 6.0;
  r.sy /= 6.0;
  r.second /= 12.0;
  return r;
}

struct Evaluation {
  std::vector<double> mass;
  std::vector<Point> bary;
  std::vector<double> second;
  Eigen::MatrixXd H;
};

class PlanarDiagram {
 public:
  PlanarDiagram(const ParticleCloud& c, const Domain& omega) : cloud_(c), omega_(omega) {
    const std::size_t n = c.size();
    const int images = omega.periodic() ? 9 : 1;
    offsets_.reserve(n * images);
    for (std::size_t j = 0; j < n; ++j)
      for (int k = 0; k < images; ++k) {
        const int kx = omega.periodic() ? k % 3 - 1 : 0, ky = omega.periodic() ? k / 3 - 1 : 0;
        offsets_.push_back({j, Point(c.positions[j][0] + kx, c.positions[j][1] + ky)});
      }
  }

  Evaluation evaluate(const std::vector<double>& w, bool with_hessian) const {
    const std::size_t n = cloud_.size();
    Evaluation ev;
    ev.mass.resize(n);
    ev.bary.resize(n);
    ev.second.resize(n);
    if (with_hessian) ev.H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<Vertex> poly, scratch;
    for (std::size_t i = 0; i < n; ++i) {
      const Point& xi = cloud_.positions[i];
      poly.clear();
      double lx, ly, hx, hy;
      if (omega_.periodic()) {
        lx = ly = -0.5;
        hx = hy = 0.5;
      } else {
        lx = omega_.lower()[0] - xi[0];
        ly = omega_.lower()[1] - xi[1];
        hx = omega_.upper()[0] - xi[0];
        hy = omega_.upper()[1] - xi[1];
      }
      poly = {{lx, ly, -1}, {hx, ly, -1}, {hx, hy, -1}, {lx, hy, -1}};
      for (std::size_t s = 0; s < offsets_.size() && poly.size() >= 3; ++s) {
        const std::size_t j = offsets_[s].first;
        if (j == i) continue;  // own images bound the unit square already
        const Point d = offsets_[s].second - xi;
        // |z|^2 - w_i <= |z - d|^2 - w_j  <=>  2 z.d <= |d|^2 + w_i - w_j
        clip(poly, scratch, 2.0 * d[0], 2.0 * d[1], norm2(d) + w[i] - w[j], static_cast<long>(s));
      }
      if (poly.size() < 3) {
        ev.mass[i] = 0.0;
        ev.bary[i] = xi;
        ev.second[i] = 0.0;
        continue;
      }
      const CellIntegrals ci = integrate(poly);
      ev.mass[i] = std::max(0.0, ci.area);
      ev.bary[i] = ci.area > 0.0 ? Point(xi[0] + ci.sx / ci.area, xi[1] + ci.sy / ci.area) : xi;
      ev.second[i] = ci.second;
      if (!with_hessian) continue;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const long lab = poly[k].label;
        if (lab < 0) continue;
        const Vertex& p = poly[k];
        const Vertex& q = poly[(k + 1) % poly.size()];
        const double len = std::hypot(q.x - p.x, q.y - p.y);
        if (len == 0.0) continue;
        const std::size_t j = offsets_[static_cast<std::size_t>(lab)].first;
        const double dist = norm(offsets_[static_cast<std::size_t>(lab)].second - xi);
        const double c = len / (2.0 * dist);
        const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
        ev.H(I, I) += c;
        ev.H(I, J) -= c;
      }
    }
    return ev;
  }

 private:
  const ParticleCloud& cloud_;
  const Domain& omega_;
  std::vector<std::pair<std::size_t, Point>> offsets_;
};

// Softened 3-D cells on a quadrature grid: each quadrature point is shared
// by a softmax of (w_i - |y - x_i|^2) / eta.
class QuadratureDiagram {
 public:
  QuadratureDiagram(const ParticleCloud& c, const Domain& omega, int m) : cloud_(c), omega_(omega) {
    const double h = 1.0 / m;
    eta_ = 0.25 * h * h;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int k = 0; k < m; ++k) {
          Point y((a + 0.5) * h, (b + 0.5) * h, (k + 0.5) * h);
          if (!omega.periodic()) {
            for (int t = 0; t < 3; ++t) y[t] = omega.lower()[t] + y[t] * (omega.upper()[t] - omega.lower()[t]);
          }
          points_.push_back(y);
        }
  }

  Evaluation evaluate(const std::vector<double>& w, bool with_hessian) const {
    const std::size_t n = cloud_.size();
    const double wq = 1.0 / static_cast<double>(points_.size());
    Evaluation ev;
    ev.mass.assign(n, 0.0);
    ev.bary.assign(n, Point::zero(3));
    ev.second.assign(n, 0.0);
    if (with_hessian) ev.H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> s(n), pi(n);
    std::vector<Point> rel(n);
    for (const Point& y : points_) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        rel[i] = omega_.periodic() ? torus_delta(cloud_.positions[i], y) : y - cloud_.positions[i];
        s[i] = (w[i] - norm2(rel[i])) / eta_;
        mx = std::max(mx, s[i]);
      }
      double z = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        pi[i] = std::exp(s[i] - mx);
        z += pi[i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        pi[i] /= z;
        if (pi[i] < 1e-300) continue;
        const double m = pi[i] * wq;
        ev.mass[i] += m;
        ev.bary[i] += rel[i] * m;
        ev.second[i] += m * norm2(rel[i]);
      }
      if (with_hessian) {
        for (std::size_t i = 0; i < n; ++i) {
          if (pi[i] < 1e-16) continue;
          const auto I = static_cast<Eigen::Index>(i);
          ev.H(I, I) += wq * pi[i] / eta_;
          for (std::size_t j = 0; j < n; ++j) {
            if (pi[j] < 1e-16) continue;
            ev.H(I, static_cast<Eigen::Index>(j)) -= wq * pi[i] * pi[j] / eta_;
          }
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      ev.bary[i] = ev.mass[i] > 0.0 ? cloud_.positions[i] + ev.bary[i] * (1.0 / ev.mass[i]) : cloud_.positions[i];
    }
    return ev;
  }

 private:
  const ParticleCloud& cloud_;
  const Domain& omega_;
  double eta_;
  std::vector<Point> points_;
};

double max_abs_defect(const std::vector<double>& mass, const std::vector<double>& target) {
  double e = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) e = std::max(e, std::abs(mass[i] - target[i]));
  return e;
}

double l2_defect(const std::vector<double>& mass, const std::vector<double>& target) {
  double e = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) e += (mass[i] - target[i]) * (mass[i] - target[i]);
  return std::sqrt(e);
}

template <class Diagram>
LaguerreDiagram newton_solve(const Diagram& diagram, const ParticleCloud& cloud, const Domain& omega,
                             std::vector<double> w, const LaguerreOptions& opt) {
  const std::size_t n = cloud.size();
  Evaluation ev = diagram.evaluate(w, true);
  double min_mass = std::numeric_limits<double>::infinity(), min_target = min_mass;
  for (std::size_t i = 0; i < n; ++i) {
    min_mass = std::min(min_mass, ev.mass[i]);
    min_target = std::min(min_target, cloud.masses[i]);
  }
  if (!(min_mass > 0.0)) throw Error(ErrorCode::NoConvergence, "initial Laguerre diagram has an empty cell");
  const double floor = 0.5 * std::min(min_mass, min_target);
  double err = l2_defect(ev.mass, cloud.masses);
  int it = 0;
  for (; it < opt.max_newton && max_abs_defect(ev.mass, cloud.masses) > opt.tol; ++it) {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = cloud.masses[i] - ev.mass[i];
    // The Hessian annihilates constants; the rank-one term fixes the gauge.
    Eigen::MatrixXd A = ev.H;
    const double shift = ev.H.diagonal().mean();
    A.array() += shift / static_cast<double>(n);
    Eigen::VectorXd dw = A.ldlt().solve(rhs);
    double tau = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, tau *= 0.5) {
      std::vector<double> trial(w);
      for (std::size_t i = 0; i < n; ++i) trial[i] += tau * dw(static_cast<Eigen::Index>(i));
      Evaluation et = diagram.evaluate(trial, true);
      double mm = std::numeric_limits<double>::infinity();
      for (double m : et.mass) mm = std::min(mm, m);
      const double et_err = l2_defect(et.mass, cloud.masses);
      if (mm >= floor && et_err <= (1.0 - 0.5 * tau) * err) {
        w = std::move(trial);
        ev = std::move(et);
        err = et_err;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  const double defect = max_abs_defect(ev.mass, cloud.masses);
  if (defect > opt.tol) {
    throw Error(ErrorCode::NoConvergence, "Laguerre Newton stopped with mass defect " + std::to_string(defect));
  }
  LaguerreDiagram out;
  out.cloud = cloud;
  out.domain = omega;
  double mean_w = 0.0;
  for (double x : w) mean_w += x;
  mean_w /= static_cast<double>(n);
  for (double& x : w) x -= mean_w;
  out.weights = std::move(w);
  out.cell_mass = ev.mass;
  out.barycenters = ev.bary;
  out.second_moment = ev.second;
  out.cost = pairwise_sum(ev.second);
  out.mass_defect = defect;
  out.newton_iterations = it;
  return out;
}

}  // namespace

LaguerreDiagram solve_laguerre(const ParticleCloud& cloud_in, const Domain& omega, const LaguerreOptions& opt) {
  if (cloud_in.dim != omega.dim()) throw Error(ErrorCode::DimensionError, "cloud and domain dimensions differ");
  cloud_in.validate();
  if (cloud_in.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty cloud");
  if (std::abs(cloud_in.total_mass() - 1.0) > 1e-10) {
    throw Error(ErrorCode::NotBalanced, "particle masses must sum to the domain measure");
  }
  ParticleCloud cloud = cloud_in;
  cloud.periodic = omega.periodic();
  if (omega.periodic())
    for (auto& p : cloud.positions) p = wrap(p);
  const std::size_t n = cloud.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = omega.periodic() ? torus_distance(cloud.positions[i], cloud.positions[j])
                                        : norm(cloud.positions[i] - cloud.positions[j]);
      if (!(d > 1e-12)) throw Error(ErrorCode::DegenerateCloud, "duplicate particles");
    }

  std::vector<double> w(n, 0.0);
  if (opt.warm && opt.warm->size() == n) {
    w = *opt.warm;
  } else if (!omega.periodic()) {
    // Weights (1 - t)|x_i - c|^2 give the Voronoi diagram of the points
    // c + t (x_i - c); t is chosen so those points lie inside the box.
    const Point c = omega.centroid();
    double rmax = 0.0, half = std::numeric_limits<double>::infinity();
    for (const auto& p : cloud.positions) rmax = std::max(rmax, norm(p - c));
    for (int k = 0; k < omega.dim(); ++k) half = std::min(half, 0.5 * (omega.upper()[k] - omega.lower()[k]));
    const double t = rmax > 0.0 ? std::min(1.0, 0.5 * half / rmax) : 1.0;
    for (std::size_t i = 0; i < n; ++i) w[i] = (1.0 - t) * norm2(cloud.positions[i] - c);
  }

  LaguerreDiagram out;
  if (omega.dim() == 2) {
    PlanarDiagram diagram(cloud, omega);
    if (opt.warm) {
      // Fall back to the cold start when the warm weights leave a cell empty.
      Evaluation ev = diagram.evaluate(w, false);
      if (*std::min_element(ev.mass.begin(), ev.mass.end()) <= 0.0) {
        LaguerreOptions cold = opt;
        cold.warm = nullptr;
        return solve_laguerre(cloud_in, omega, cold);
      }
    }
    out = newton_solve(diagram, cloud, omega, w, opt);
  } else if (omega.dim() == 3) {
    QuadratureDiagram diagram(cloud, omega, opt.quadrature);
    out = newton_solve(diagram, cloud, omega, w, opt);
    out.quadrature = opt.quadrature;
  } else {
    throw Error(ErrorCode::DimensionError, "Laguerre diagrams need d in {2,3}");
  }
  return out;
}

}  // namespace sglab
