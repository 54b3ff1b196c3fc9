#include "sglab/monge_ampere.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "krylov.hpp"
#include "sglab/interpolation.hpp"
#include "sglab/spectral.hpp"

namespace sglab {

ConvexPotential ConvexPotential::identity(int dim, int n, Kind kind) {
  ConvexPotential P;
  P.p = GridField(dim, n);
  P.b = Point::zero(dim);
  P.kind = kind;
  return P;
}

const char* kind_name(ConvexPotential::Kind k) {
  return k == ConvexPotential::Kind::Dual ? "potential-dual" : "potential-primal";
}

Stencil::Stencil(int dim, int n) : dim_(dim), n_(n) {
  GridField ref(dim, n);
  size_ = ref.size();
  nb_.resize(size_ * 27);
  for (std::size_t q = 0; q < size_; ++q) {
    for (int o2 = -1; o2 <= 1; ++o2)
      for (int o1 = -1; o1 <= 1; ++o1)
        for (int o0 = -1; o0 <= 1; ++o0) {
          std::size_t r = ref.shift(q, 0, o0);
          r = ref.shift(r, 1, o1);
          if (dim == 3) r = ref.shift(r, 2, o2);
          else if (o2 != 0) continue;
          nb_[q * 27 + static_cast<std::size_t>((o0 + 1) + 3 * (o1 + 1) + 9 * (o2 + 1))] = r;
        }
  }
}

double Stencil::d2(const GridField& f, std::size_t q, int a) const {
  const double h = this->h();
  return (f[along(q, a, 1)] - 2.0 * f[q] + f[along(q, a, -1)]) / (h * h);
}

double Stencil::d1(const GridField& f, std::size_t q, int a) const {
  return (f[along(q, a, 1)] - f[along(q, a, -1)]) * (0.5 * n_);
}

double Stencil::mixed(const GridField& f, std::size_t q, int a, int b, int sa, int sb) const {
  int oab[3] = {0, 0, 0}, oa[3] = {0, 0, 0}, ob[3] = {0, 0, 0};
  oab[a] = sa;
  oab[b] = sb;
  oa[a] = sa;
  ob[b] = sb;
  const double h = this->h();
  const double v = f[at(q, oab[0], oab[1], oab[2])] - f[at(q, oa[0], oa[1], oa[2])] - f[at(q, ob[0], ob[1], ob[2])] + f[q];
  return sa * sb * v / (h * h);
}

double Stencil::centered_mixed(const GridField& f, std::size_t q, int a, int b) const {
  int pp[3] = {0, 0, 0}, pm[3] = {0, 0, 0}, mp[3] = {0, 0, 0}, mm[3] = {0, 0, 0};
  pp[a] = 1; pp[b] = 1;
  pm[a] = 1; pm[b] = -1;
  mp[a] = -1; mp[b] = 1;
  mm[a] = -1; mm[b] = -1;
  const double h = this->h();
  return (f[at(q, pp[0], pp[1], pp[2])] - f[at(q, pm[0], pm[1], pm[2])] - f[at(q, mp[0], mp[1], mp[2])] +
          f[at(q, mm[0], mm[1], mm[2])]) /
         (4.0 * h * h);
}

namespace {

const Stencil& stencil_for(int dim, int n) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Stencil>> cache;
  auto& slot = cache[{dim, n}];
  if (!slot) slot = std::make_unique<Stencil>(dim, n);
  return *slot;
}

constexpr int kSigns[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
}

void remove_mean(GridField& f) {
  const double m = f.mean();
  f += -m;
}

GridField residual_of(const GridField& p, const GridField& target, double* lagrange) {
  GridField r = ma_determinant(p);
  r -= target;
  const double m = r.mean();
  if (p.dim() == 3) {
    r += -m;
    if (lagrange) *lagrange = m;
  } else if (lagrange) {
    *lagrange = m;
  }
  return r;
}

struct NewtonOutcome {
  bool ok = false;
  bool convexity_failure = false;
  int iterations = 0;
  double residual = 0.0;
  GridField p;
};

GridField solve_linear(const MALinearization& op, const GridField& rhs, double rtol, int max_iter, bool* converged) {
  return detail::solve_zero_mean([&op](const GridField& in, GridField& out) { op.apply(in, out); }, rhs, rtol, max_iter,
                                 converged);
}

NewtonOutcome newton(const GridField& p0, const GridField& target, const MAOptions& opt, double tol, int max_it) {
  NewtonOutcome out;
  out.p = p0;
  GridField r = residual_of(out.p, target, nullptr);
  double rinf = r.max_abs();
  double r2 = r.l2_norm();
  for (int it = 0; it < max_it; ++it) {
    out.iterations = it;
    if (rinf <= tol) {
      out.ok = true;
      out.residual = rinf;
      return out;
    }
    MALinearization op(out.p);
    GridField neg = r * -1.0;
    const double eta = std::clamp(0.5 * rinf, 1e-13, 1e-2);
    bool lin_ok = true;
    GridField delta = solve_linear(op, neg, eta, opt.max_linear, &lin_ok);
    double alpha = 1.0;
    bool accepted = false;
    bool convex_fail = false;
    for (int ls = 0; ls <= 20; ++ls, alpha *= 0.5) {
      GridField trial = out.p;
      for (std::size_t q = 0; q < trial.size(); ++q) trial[q] += alpha * delta[q];
      if (min_hessian_eigenvalue(trial) < opt.convexity_floor) {
        convex_fail = true;
        continue;
      }
      GridField rt = residual_of(trial, target, nullptr);
      const double rt2 = rt.l2_norm();
      if (rt2 <= (1.0 - 1e-4 * alpha) * r2) {
        out.p = std::move(trial);
        r = std::move(rt);
        r2 = rt2;
        rinf = r.max_abs();
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.convexity_failure = convex_fail;
      out.residual = rinf;
      // A stagnating line search at round-off level still counts as converged.
      out.ok = rinf <= tol;
      return out;
    }
  }
  out.iterations = max_it;
  out.residual = rinf;
  out.ok = rinf <= tol;
  return out;
}

}  // namespace

MALinearization::MALinearization(const GridField& p) : st_(&stencil_for(p.dim(), p.n())), dim_(p.dim()) {
  const std::size_t N = p.size();
  if (dim_ == 2) {
    c_.resize(N * 6);
    for (std::size_t q = 0; q < N; ++q) {
      double* c = &c_[q * 6];
      c[0] = 1.0 + st_->d2(p, q, 1);
      c[1] = 1.0 + st_->d2(p, q, 0);
      for (int k = 0; k < 4; ++k) c[2 + k] = st_->mixed(p, q, 0, 1, kSigns[k][0], kSigns[k][1]);
    }
  } else {
    // A_aa (3), quadrant mixed terms (12), cofactor of centred Hessian (9).
    c_.resize(N * 24);
    for (std::size_t q = 0; q < N; ++q) {
      double* c = &c_[q * 24];
      for (int a = 0; a < 3; ++a) c[a] = st_->d2(p, q, a);
      for (int pr = 0; pr < 3; ++pr)
        for (int k = 0; k < 4; ++k) c[3 + pr * 4 + k] = st_->mixed(p, q, kPairs[pr][0], kPairs[pr][1], kSigns[k][0], kSigns[k][1]);
      auto H = centered_hessian(p, *st_, q);
      double* cof = c + 15;
      cof[0] = H[4] * H[8] - H[5] * H[7];
      cof[1] = -(H[3] * H[8] - H[5] * H[6]);
      cof[2] = H[3] * H[7] - H[4] * H[6];
      cof[3] = -(H[1] * H[8] - H[2] * H[7]);
      cof[4] = H[0] * H[8] - H[2] * H[6];
      cof[5] = -(H[0] * H[7] - H[1] * H[6]);
      cof[6] = H[1] * H[5] - H[2] * H[4];
      cof[7] = -(H[0] * H[5] - H[2] * H[3]);
      cof[8] = H[0] * H[4] - H[1] * H[3];
    }
  }
}

void MALinearization::apply(const GridField& d, GridField& out) const {
  const std::size_t N = d.size();
  if (dim_ == 2) {
    for (std::size_t q = 0; q < N; ++q) {
      const double* c = &c_[q * 6];
      double v = c[0] * st_->d2(d, q, 0) + c[1] * st_->d2(d, q, 1);
      double m = 0.0;
      for (int k = 0; k < 4; ++k) m += c[2 + k] * st_->mixed(d, q, 0, 1, kSigns[k][0], kSigns[k][1]);
      out[q] = v - 0.5 * m;
    }
  } else {
    for (std::size_t q = 0; q < N; ++q) {
      const double* c = &c_[q * 24];
      double dd[3];
      for (int a = 0; a < 3; ++a) dd[a] = st_->d2(d, q, a);
      double v = dd[0] + dd[1] + dd[2];
      for (int pr = 0; pr < 3; ++pr) {
        const int a = kPairs[pr][0], b = kPairs[pr][1];
        double m = 0.0;
        for (int k = 0; k < 4; ++k) m += c[3 + pr * 4 + k] * st_->mixed(d, q, a, b, kSigns[k][0], kSigns[k][1]);
        v += c[a] * dd[b] + c[b] * dd[a] - 0.5 * m;
      }
      auto Hd = centered_hessian(d, *st_, q);
      const double* cof = c + 15;
      for (int k = 0; k < 9; ++k) v += cof[k] * Hd[k];
      out[q] = v;
    }
    // The cubic term does not preserve the mean; the constant is a free
    // Lagrange multiplier, so only the zero-mean part is kept.
    const double m = out.mean();
    out += -m;
  }
}

std::array<double, 9> centered_hessian(const GridField& p, const Stencil& st, std::size_t q) {
  std::array<double, 9> H{};
  const int d = p.dim();
  for (int a = 0; a < d; ++a) {
    H[a * 3 + a] = st.d2(p, q, a);
    for (int b = a + 1; b < d; ++b) {
      const double m = st.centered_mixed(p, q, a, b);
      H[a * 3 + b] = m;
      H[b * 3 + a] = m;
    }
  }
  return H;
}

GridField ma_determinant(const GridField& p) {
  const Stencil& st = stencil_for(p.dim(), p.n());
  GridField out(p.dim(), p.n());
  if (p.dim() == 2) {
    for (std::size_t q = 0; q < p.size(); ++q) {
      const double a11 = st.d2(p, q, 0), a22 = st.d2(p, q, 1);
      double m = 0.0;
      for (int k = 0; k < 4; ++k) {
        const double x = st.mixed(p, q, 0, 1, kSigns[k][0], kSigns[k][1]);
        m += x * x;
      }
      out[q] = (1.0 + a11) * (1.0 + a22) - 0.25 * m;
    }
  } else if (p.dim() == 3) {
    for (std::size_t q = 0; q < p.size(); ++q) {
      double a[3];
      for (int k = 0; k < 3; ++k) a[k] = st.d2(p, q, k);
      double s2 = 0.0;
      for (int pr = 0; pr < 3; ++pr) {
        const int i = kPairs[pr][0], j = kPairs[pr][1];
        double m = 0.0;
        for (int k = 0; k < 4; ++k) {
          const double x = st.mixed(p, q, i, j, kSigns[k][0], kSigns[k][1]);
          m += x * x;
        }
        s2 += a[i] * a[j] - 0.25 * m;
      }
      out[q] = 1.0 + a[0] + a[1] + a[2] + s2 + det3(centered_hessian(p, st, q));
    }
  } else {
    throw Error(ErrorCode::DimensionError, "Monge-Ampere requires d in {2,3}");
  }
  return out;
}

double min_hessian_eigenvalue(const GridField& p) {
  const Stencil& st = stencil_for(p.dim(), p.n());
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < p.size(); ++q) {
    auto H = centered_hessian(p, st, q);
    if (p.dim() == 2) {
      const double a = 1.0 + H[0], c = 1.0 + H[4], b = H[1];
      const double lam = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      lo = std::min(lo, lam);
    } else {
      Eigen::Matrix3d M;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) = H[i * 3 + j] + (i == j ? 1.0 : 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
      es.computeDirect(M, Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues()(0));
    }
  }
  return lo;
}

GridField ma_linearization_apply(const GridField& p, const GridField& delta) {
  MALinearization op(p);
  GridField out(p.dim(), p.n());
  op.apply(delta, out);
  return out;
}

GridField ma_linearization_solve(const GridField& p, const GridField& f, double rtol, int max_iter) {
  MALinearization op(p);
  bool ok = true;
  GridField x = solve_linear(op, f, rtol, max_iter, &ok);
  if (!ok) throw Error(ErrorCode::NoConvergence, "linearised Monge-Ampere solve did not converge");
  return x;
}

MASolution solve_ma_periodic(const GridField& rho, const MAOptions& opt) {
  if (rho.dim() != 2 && rho.dim() != 3) throw Error(ErrorCode::DimensionError, "Monge-Ampere requires d in {2,3}");
  if (rho.n() < 16) throw Error(ErrorCode::InvalidArgument, "Monge-Ampere requires n >= 16");
  for (std::size_t q = 0; q < rho.size(); ++q) {
    if (!std::isfinite(rho[q]) || !(rho[q] > 0.0)) {
      throw Error(ErrorCode::InvalidDensity, "density must be strictly positive");
    }
  }
  if (std::abs(rho.mean() - 1.0) > 1e-10) throw Error(ErrorCode::InvalidDensity, "density must have mean 1");
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");

  GridField p(rho.dim(), rho.n());
  if (opt.warm_start) {
    opt.warm_start->require_same_shape(rho, "solve_ma_periodic warm start");
    p = *opt.warm_start;
    remove_mean(p);
    if (min_hessian_eigenvalue(p) < opt.convexity_floor) p = GridField(rho.dim(), rho.n());
  }
  GridField start_density = ma_determinant(p);
  if (rho.dim() == 3) {
    // Normalise the starting density so the homotopy path keeps mean 1.
    const double m = start_density.mean();
    start_density += 1.0 - m;
  }

  MASolution sol;
  double t = 0.0, step = 1.0;
  const double stage_tol = std::max(opt.tol, 1e-7);
  bool last_convexity = false;
  double last_residual = 0.0;
  while (t < 1.0) {
    const double t_try = std::min(1.0, t + step);
    GridField target(rho.dim(), rho.n());
    for (std::size_t q = 0; q < rho.size(); ++q) target[q] = (1.0 - t_try) * start_density[q] + t_try * rho[q];
    const bool final_stage = t_try >= 1.0;
    NewtonOutcome r = newton(p, target, opt, final_stage ? opt.tol : stage_tol, final_stage ? opt.max_newton : 25);
    sol.newton_iterations += r.iterations;
    if (r.ok) {
      p = std::move(r.p);
      t = t_try;
      step *= 2.0;
      ++sol.homotopy_steps;
      last_residual = r.residual;
    } else {
      last_convexity = r.convexity_failure;
      last_residual = r.residual;
      step *= 0.5;
      if (step < 1.0 / 1024.0) {
        if (last_convexity) throw Error(ErrorCode::ConvexityLost, "discrete convexity lost during continuation");
        throw Error(ErrorCode::NoConvergence, "Newton stagnated with residual " + std::to_string(last_residual));
      }
    }
  }
  double lagrange = 0.0;
  GridField r = residual_of(p, rho, &lagrange);
  sol.residual = r.max_abs();
  sol.lagrange_constant = lagrange;
  sol.potential.p = std::move(p);
  sol.potential.b = Point::zero(rho.dim());
  sol.potential.kind = ConvexPotential::Kind::Dual;
  return sol;
}

namespace {

double wrap_sym(double x) { return x - std::round(x); }

// One pass of the periodic inf-convolution with |.|^2/2 along `axis`:
// out(z_j) = min_i (x_i - z_j)^2/2 + in(x_i), z_j = j h - shift.
void infconv_pass(const GridField& in, GridField& out, int axis, double shift) {
  const int n = in.n();
  const double h = in.h();
  const std::size_t st = in.stride(axis);
  std::vector<double> line(static_cast<std::size_t>(n));
  for (std::size_t q = 0; q < in.size(); ++q) {
    if (in.coord(q, axis) != 0) continue;
    for (int i = 0; i < n; ++i) line[i] = in[q + i * st];
    for (int j = 0; j < n; ++j) {
      const double z = j * h - shift;
      int best = 0;
      double bval = std::numeric_limits<double>::infinity(), bdel = 0.0;
      for (int i = 0; i < n; ++i) {
        const double dl = wrap_sym(i * h - z);
        const double v = 0.5 * dl * dl + line[i];
        if (v < bval) {
          bval = v;
          best = i;
          bdel = dl;
        }
      }
      const double fm = 0.5 * (bdel - h) * (bdel - h) + line[(best - 1 + n) % n];
      const double fp = 0.5 * (bdel + h) * (bdel + h) + line[(best + 1) % n];
      const double c = fp - 2.0 * bval + fm;
      double val = bval;
      if (c > 0.0) {
        const double s = (fm - fp) / (2.0 * c);
        if (std::abs(s) <= 1.0) val = bval - (fp - fm) * (fp - fm) / (8.0 * c);
      }
      out[q + j * st] = val;
    }
  }
}

}  // namespace

ConvexPotential legendre_transform(const ConvexPotential& phi) {
  const int d = phi.dim();
  GridField cur = phi.p;
  for (int a = 0; a < d; ++a) {
    GridField next(d, phi.n());
    infconv_pass(cur, next, a, phi.b[a]);
    cur = std::move(next);
  }
  ConvexPotential out;
  out.p = cur * -1.0;
  remove_mean(out.p);
  out.b = -phi.b;
  out.kind = phi.kind == ConvexPotential::Kind::Dual ? ConvexPotential::Kind::Primal : ConvexPotential::Kind::Dual;
  return out;
}

VectorField displacement(const ConvexPotential& P) {
  const int d = P.dim();
  const Stencil& st = stencil_for(d, P.n());
  VectorField v(d, P.n(), d);
  for (std::size_t q = 0; q < P.p.size(); ++q) {
    for (int a = 0; a < d; ++a) v.comp[a][q] = P.b[a] + st.d1(P.p, q, a);
  }
  return v;
}

std::vector<Point> gradient_map(const ConvexPotential& P) {
  VectorField disp = displacement(P);
  std::vector<Point> out(P.p.size());
  for (std::size_t q = 0; q < P.p.size(); ++q) out[q] = wrap(P.p.node(q) + disp.at(q));
  return out;
}

VectorField dual_velocity(const ConvexPotential& P) {
  if (P.kind != ConvexPotential::Kind::Dual) {
    throw Error(ErrorCode::InvalidArgument, "dual_velocity needs a dual potential");
  }
  VectorField disp = displacement(P);
  const int d = P.dim();
  VectorField v(d, P.n(), d);
  for (std::size_t q = 0; q < P.p.size(); ++q) v.set(q, perp(disp.at(q)));
  return v;
}

GridField histogram(const std::vector<Point>& images, int dim, int n) {
  GridField rho(dim, n);
  if (images.size() != rho.size()) throw Error(ErrorCode::DimensionError, "histogram expects one image per node");
  const double w = 1.0;  // each node carries h^d mass; density = count weight
  for (const Point& y0 : images) {
    Point y = wrap(y0);
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> fr{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      const double t = y[a] * n;
      base[a] = static_cast<int>(std::floor(t));
      fr[a] = t - base[a];
    }
    for (int c = 0; c < (1 << dim); ++c) {
      double wt = w;
      std::size_t q = 0;
      for (int a = 0; a < dim; ++a) {
        const int bit = (c >> a) & 1;
        wt *= bit ? fr[a] : 1.0 - fr[a];
        q += static_cast<std::size_t>((base[a] + bit) % n) * rho.stride(a);
      }
      rho[q] += wt;
    }
  }
  return rho;
}

namespace {

GridField binomial_smooth(const GridField& f) {
  GridField cur = f;
  for (int a = 0; a < f.dim(); ++a) {
    GridField next(f.dim(), f.n());
    for (std::size_t q = 0; q < f.size(); ++q) {
      next[q] = 0.25 * cur[cur.shift(q, a, -1)] + 0.5 * cur[q] + 0.25 * cur[cur.shift(q, a, 1)];
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

PolarFactorization polar_factorize(const std::vector<Point>& X, int dim, int n, const MAOptions& opt) {
  GridField rho = binomial_smooth(histogram(X, dim, n));
  if (rho.min() <= 1e-3) {
    throw Error(ErrorCode::ResolutionError, "image density vanishes below grid resolution");
  }
  rho *= 1.0 / rho.mean();
  PolarFactorization out;
  MASolution sol = solve_ma_periodic(rho, opt);
  out.ma_residual = sol.residual;
  out.psi = sol.potential;
  out.phi = legendre_transform(out.psi);
  out.density = rho;
  out.grad_phi = gradient_map(out.phi);
  VectorField disp = displacement(out.psi);
  out.g.resize(X.size());
  for (std::size_t q = 0; q < X.size(); ++q) {
    const Point y = wrap(X[q]);
    out.g[q] = wrap(y + interpolate(disp, y, 3));
  }
  GridField hg = binomial_smooth(histogram(out.g, dim, n));
  double defect = 0.0;
  for (std::size_t q = 0; q < hg.size(); ++q) defect = std::max(defect, std::abs(hg[q] - 1.0));
  out.uniformity_defect = defect;
  return out;
}

}  // namespace sglab
