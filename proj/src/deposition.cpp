#include "sglab/deposition.hpp"

#include <algorithm>
#include <cmath>

#include "sglab/interpolation.hpp"

namespace sglab {

double polygon_area(const std::vector<Point>& poly) {
  double a = 0.0;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % m];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

namespace {

// Keeps the part of poly with sign * (x[axis] - c) <= 0.
void clip_half(std::vector<Point>& poly, std::vector<Point>& scratch, int axis, double c, double sign) {
  scratch.clear();
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % m];
    const double fp = sign * (p[axis] - c), fq = sign * (q[axis] - c);
    if (fp <= 0.0) scratch.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double t = fp / (fp - fq);
      scratch.push_back(p + (q - p) * t);
    }
  }
  poly.swap(scratch);
}

double minmod3(double a, double b, double c) {
  if (a > 0 && b > 0 && c > 0) return std::min({a, b, c});
  if (a < 0 && b < 0 && c < 0) return std::max({a, b, c});
  return 0.0;
}

struct Splatter {
  const GridField& rho;
  int n, s;
  double h;
  std::vector<Point> corner_disp;  // (n s)^2 mapped-corner displacements
  std::vector<double> slope0, slope1;

  Splatter(const GridField& r, const DisplacementFn& disp, int subdiv) : rho(r), n(r.n()), s(subdiv), h(r.h()) {
    if (r.dim() != 2) throw Error(ErrorCode::DimensionError, "push_forward is implemented for d = 2");
    if (s < 1) throw Error(ErrorCode::InvalidArgument, "subdivisions must be positive");
    const int m = n * s;
    corner_disp.resize(static_cast<std::size_t>(m) * m);
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J) {
        Point c(I * h / s - 0.5 * h, J * h / s - 0.5 * h);
        Point d = disp(c);
        if (!std::isfinite(d[0]) || !std::isfinite(d[1])) throw Error(ErrorCode::InvalidPoint, "non-finite displacement");
        corner_disp[static_cast<std::size_t>(I) * m + J] = d;
      }
    slope0.resize(r.size());
    slope1.resize(r.size());
    for (std::size_t q = 0; q < r.size(); ++q) {
      for (int a = 0; a < 2; ++a) {
        const double up = r[r.shift(q, a, 1)], dn = r[r.shift(q, a, -1)], c = r[q];
        // Monotonized-central limiter keeps subcell values inside the neighbour range.
        double sl = minmod3(0.5 * (up - dn), 2.0 * (up - c), 2.0 * (c - dn)) / h;
        (a == 0 ? slope0 : slope1)[q] = sl;
      }
    }
  }

  Point corner(int I, int J) const {
    const int m = n * s;
    const int Iw = ((I % m) + m) % m, Jw = ((J % m) + m) % m;
    // Unwrapped corner position plus its displacement.
    Point c(I * h / s - 0.5 * h, J * h / s - 0.5 * h);
    return c + corner_disp[static_cast<std::size_t>(Iw) * m + Jw];
  }

  template <class Sink>
  void run(Sink&& sink) const {
    std::vector<Point> quad(4), poly, scratch;
    poly.reserve(16);
    scratch.reserve(16);
    const double sub = h / s;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t q = rho.flat(i, j);
        for (int a = 0; a < s; ++a)
          for (int b = 0; b < s; ++b) {
            const double ox = ((a + 0.5) / s - 0.5) * h, oy = ((b + 0.5) / s - 0.5) * h;
            const double dens = rho[q] + slope0[q] * ox + slope1[q] * oy;
            const double mass = dens * sub * sub;
            const int I = i * s + a, J = j * s + b;
            quad[0] = corner(I, J);
            quad[1] = corner(I + 1, J);
            quad[2] = corner(I + 1, J + 1);
            quad[3] = corner(I, J + 1);
            double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
            for (const auto& p : quad) {
              xlo = std::min(xlo, p[0]);
              xhi = std::max(xhi, p[0]);
              ylo = std::min(ylo, p[1]);
              yhi = std::max(yhi, p[1]);
            }
            const int ci0 = static_cast<int>(std::floor(xlo / h + 0.5)), ci1 = static_cast<int>(std::floor(xhi / h + 0.5));
            const int cj0 = static_cast<int>(std::floor(ylo / h + 0.5)), cj1 = static_cast<int>(std::floor(yhi / h + 0.5));
            Point centre(i * h + ox, j * h + oy);
            if (ci0 == ci1 && cj0 == cj1) {
              sink(rho.flat(ci0, cj0), mass, centre);
              continue;
            }
            // Pieces are weighted by their share of the total clipped area so the
            // subcell mass is conserved even for a folded image.
            double pieces[64];
            std::size_t targets[64];
            int count = 0;
            double total = 0.0;
            for (int ci = ci0; ci <= ci1; ++ci)
              for (int cj = cj0; cj <= cj1; ++cj) {
                poly.assign(quad.begin(), quad.end());
                clip_half(poly, scratch, 0, (ci - 0.5) * h, -1.0);
                if (poly.size() >= 3) clip_half(poly, scratch, 0, (ci + 0.5) * h, 1.0);
                if (poly.size() >= 3) clip_half(poly, scratch, 1, (cj - 0.5) * h, -1.0);
                if (poly.size() >= 3) clip_half(poly, scratch, 1, (cj + 0.5) * h, 1.0);
                if (poly.size() < 3) continue;
                const double ar = std::abs(polygon_area(poly));
                if (ar <= 0.0) continue;
                if (count == 64) throw Error(ErrorCode::ResolutionError, "image of a subcell spans too many cells");
                pieces[count] = ar;
                targets[count] = rho.flat(ci, cj);
                ++count;
                total += ar;
              }
            if (count == 0 || total <= 0.0) {
              Point c = (quad[0] + quad[1] + quad[2] + quad[3]) * 0.25;
              sink(rho.flat(static_cast<int>(std::floor(c[0] / h + 0.5)), static_cast<int>(std::floor(c[1] / h + 0.5))), mass,
                   centre);
              continue;
            }
            for (int k = 0; k < count; ++k) sink(targets[k], mass * pieces[k] / total, centre);
          }
      }
  }
};

}  // namespace

std::vector<Point> clip_to_rectangle(const std::vector<Point>& poly, const Point& lo, const Point& hi) {
  std::vector<Point> p = poly, scratch;
  for (int a = 0; a < 2 && p.size() >= 3; ++a) {
    clip_half(p, scratch, a, lo[a], -1.0);
    if (p.size() >= 3) clip_half(p, scratch, a, hi[a], 1.0);
  }
  if (p.size() < 3) p.clear();
  return p;
}

GridField push_forward(const GridField& rho, const DisplacementFn& disp, const DepositOptions& opt) {
  Splatter sp(rho, disp, opt.subdivisions);
  GridField out(rho.dim(), rho.n());
  const double inv = 1.0 / (rho.h() * rho.h());
  sp.run([&](std::size_t q, double m, const Point&) { out[q] += m * inv; });
  return out;
}

MomentumDeposit push_forward_momentum(const GridField& rho, const DisplacementFn& disp,
                                      const std::function<Point(const Point&)>& w, const DepositOptions& opt) {
  Splatter sp(rho, disp, opt.subdivisions);
  MomentumDeposit out{GridField(rho.dim(), rho.n()), VectorField(rho.dim(), rho.n(), 2)};
  const double inv = 1.0 / (rho.h() * rho.h());
  // w is evaluated once per subcell and reused for all of its pieces.
  Point last_centre(1e300, 1e300), last_w(0.0, 0.0);
  sp.run([&](std::size_t q, double m, const Point& c) {
    if (!(c == last_centre)) {
      last_centre = c;
      last_w = w(c);
    }
    out.mass[q] += m * inv;
    out.momentum.comp[0][q] += m * inv * last_w[0];
    out.momentum.comp[1][q] += m * inv * last_w[1];
  });
  return out;
}

DisplacementFn displacement_from_nodes(const VectorField& nodal, int order) {
  return [nodal, order](const Point& x) { return interpolate(nodal, x, order); };
}

}  // namespace sglab
