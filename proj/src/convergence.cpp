#include "sglab/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <thread>

#include "sglab/interpolation.hpp"
#include "sglab/spectral.hpp"

namespace sglab {

namespace {

// 8-point Gauss-Legendre on [0, 1].
const double kGaussS[8] = {0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
                           0.5917173212478249,   0.7627662049581645,  0.8983332387068134, 0.9801449282487681};
const double kGaussW[8] = {0.05061426814518813, 0.11119051722668724, 0.15685332293894363, 0.18134189168918100,
                           0.18134189168918100, 0.15685332293894363, 0.11119051722668724, 0.05061426814518813};
const int kSigns[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

void require_2d(const GridField& f, const char* what) {
  if (f.dim() != 2) throw Error(ErrorCode::DimensionError, std::string(what) + " is 2-D");
}

const Stencil& local_stencil(int n) {
  thread_local std::map<int, std::unique_ptr<Stencil>> cache;
  auto& s = cache[n];
  if (!s) s = std::make_unique<Stencil>(2, n);
  return *s;
}

double mean_of(const std::vector<double>& v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

struct Hessian {
  GridField xx, xy, yy;
};

Hessian spectral_hessian(const GridField& f) {
  return {spectral::second_derivative(f, 0, 0), spectral::second_derivative(f, 0, 1),
          spectral::second_derivative(f, 1, 1)};
}

// Largest |eigenvalue| of a symmetric 2x2 matrix.
double sym_norm(double a, double b, double c) {
  const double m = 0.5 * (a + c), r = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return std::abs(m) + r;
}

// Inverts y -> y + eps grad psi(y) at every node x by Newton on the
// interpolated spectral derivatives, then evaluates the Legendre transform
// there: grad phi(x) = grad psi(y), phi(x) = psi(y) + eps/2 |grad psi(y)|^2.
void fill_primal(SGEpsState& s) {
  const int n = s.psi.n();
  const double eps = s.eps;
  const GridField& px = s.grad_psi.comp[0];
  const GridField& py = s.grad_psi.comp[1];
  Hessian H = spectral_hessian(s.psi);
  const GridField* fs[6] = {&s.psi, &px, &py, &H.xx, &H.xy, &H.yy};
  s.dual_points.assign(s.psi.size(), Point(0.0, 0.0));
  s.grad_phi = VectorField(2, n, 2);
  s.phi = GridField(2, n);
  double v[6];
  for (std::size_t q = 0; q < s.psi.size(); ++q) {
    const Point x = s.psi.node(q);
    Point y = x - eps * Point(px[q], py[q]);
    bool done = false;
    for (int it = 0; it < 30; ++it) {
      interpolate_many(fs, 6, y, 5, v);
      const double r0 = y[0] + eps * v[1] - x[0], r1 = y[1] + eps * v[2] - x[1];
      if (std::abs(r0) + std::abs(r1) < 1e-14) {
        done = true;
        break;
      }
      const double a = 1.0 + eps * v[3], b = eps * v[4], c = 1.0 + eps * v[5];
      const double det = a * c - b * b;
      if (!(det > 0.0) || !(a > 0.0))
        throw Error(ErrorCode::StateInvalid, "I + eps D^2 psi is not positive definite");
      y = y - Point((c * r0 - b * r1) / det, (a * r1 - b * r0) / det);
    }
    if (!done) {
      interpolate_many(fs, 6, y, 5, v);
      if (std::abs(y[0] + eps * v[1] - x[0]) + std::abs(y[1] + eps * v[2] - x[1]) > 1e-11)
        throw Error(ErrorCode::NoConvergence, "inverse of the dual gradient map did not converge");
    }
    s.dual_points[q] = y;
    s.grad_phi.set(q, Point(v[1], v[2]));
    s.phi[q] = v[0] + 0.5 * eps * (v[1] * v[1] + v[2] * v[2]);
  }
}

void solve_eps_ma(SGEpsState& s, const EpsOptions& opt, const GridField* warm_psi) {
  const double eps = s.eps;
  GridField full = s.rho * eps;
  full += 1.0;
  if (!(full.min() > 0.0)) throw Error(ErrorCode::StateInvalid, "1 + eps rho must stay positive");
  GridField seed = warm_psi ? *warm_psi * eps : spectral::poisson_solve(s.rho, 1e-8) * eps;
  seed += -seed.mean();
  MAOptions ma = opt.ma;
  ma.tol = eps * opt.tol;
  ma.warm_start = &seed;
  MASolution sol = solve_ma_periodic(full, ma);
  s.psi = sol.potential.p * (1.0 / eps);
  s.ma_residual = sol.residual / eps;
  s.newton_iterations = sol.newton_iterations;
  s.grad_psi = spectral::gradient(s.psi);
  s.u = VectorField(2, s.psi.n(), 2);
  for (std::size_t q = 0; q < s.psi.size(); ++q) s.u.set(q, perp(s.grad_psi.at(q)));
  fill_primal(s);
}

}  // namespace

SGEpsState init_sg_eps(const GridField& rho, double eps, const EpsOptions& opt, const GridField* warm_psi) {
  require_2d(rho, "init_sg_eps");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (std::abs(rho.mean()) > 1e-10) throw Error(ErrorCode::MeanNotZero, "rho^eps must have zero mean");
  SGEpsState s;
  s.eps = eps;
  s.rho = rho;
  solve_eps_ma(s, opt, warm_psi);
  return s;
}

SGEpsState sg_eps_step(const SGEpsState& s, double dt, const EpsOptions& opt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (dt * s.u.max_norm() > opt.cfl * s.rho.h() * (1.0 + 1e-12))
    throw Error(ErrorCode::TimestepTooLarge, "SG_eps step violates the CFL bound");
  const bool have_prev = !s.u_prev.comp.empty();
  auto feet = departure_points(s.u, have_prev ? &s.u_prev : nullptr, dt, opt.adv);
  SGEpsState out;
  out.eps = s.eps;
  out.t = s.t + dt;
  out.rho = advect(s.rho, feet, opt.adv);
  out.rho += -out.rho.mean();
  solve_eps_ma(out, opt, &s.psi);
  out.u_prev = s.u;
  return out;
}

GridField well_prepared_density(const GridField& rho_bar0, double eps) {
  require_2d(rho_bar0, "well_prepared_density");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const GridField phi = spectral::poisson_solve(rho_bar0, 1e-10);
  const GridField gx = spectral::derivative(phi, 0), gy = spectral::derivative(phi, 1);
  Hessian H = spectral_hessian(phi);
  const GridField* fs[5] = {&gx, &gy, &H.xx, &H.xy, &H.yy};
  GridField out(2, rho_bar0.n());
  double v[5];
  for (std::size_t q = 0; q < out.size(); ++q) {
    const Point y = out.node(q);
    // x - eps grad phi(x) = y
    Point x = y + eps * Point(gx[q], gy[q]);
    double a = 1.0, b = 0.0, c = 1.0;
    for (int it = 0; it < 40; ++it) {
      interpolate_many(fs, 5, x, 5, v);
      a = 1.0 - eps * v[2];
      b = -eps * v[3];
      c = 1.0 - eps * v[4];
      const double r0 = x[0] - eps * v[0] - y[0], r1 = x[1] - eps * v[1] - y[1];
      const double det = a * c - b * b;
      if (!(det > 0.0) || !(a > 0.0))
        throw Error(ErrorCode::InvalidDensity, "eps too large for well-prepared data: I - eps D^2 phi not convex");
      if (std::abs(r0) + std::abs(r1) < 1e-15) break;
      x = x - Point((c * r0 - b * r1) / det, (a * r1 - b * r0) / det);
    }
    out[q] = (1.0 / (a * c - b * b) - 1.0) / eps;
  }
  out += -out.mean();
  return out;
}

EulerNorms euler_norms(const EulerState& e) {
  require_2d(e.psi, "euler_norms");
  EulerNorms r;
  Hessian H = spectral_hessian(e.psi);
  GridField t[4] = {spectral::third_derivative(e.psi, 0, 0, 0), spectral::third_derivative(e.psi, 0, 0, 1),
                    spectral::third_derivative(e.psi, 0, 1, 1), spectral::third_derivative(e.psi, 1, 1, 1)};
  // d_t omega = -u . grad omega, d_t phibar = Lap^{-1} d_t omega
  GridField wx = spectral::derivative(e.omega, 0), wy = spectral::derivative(e.omega, 1);
  GridField wt(2, e.psi.n());
  for (std::size_t q = 0; q < wt.size(); ++q) wt[q] = -(e.u.comp[0][q] * wx[q] + e.u.comp[1][q] * wy[q]);
  wt += -wt.mean();
  Hessian Ht = spectral_hessian(spectral::poisson_solve(wt, 1e-8));
  for (std::size_t q = 0; q < wt.size(); ++q) {
    r.d2 = std::max(r.d2, sym_norm(H.xx[q], H.xy[q], H.yy[q]));
    r.d2dt = std::max(r.d2dt, sym_norm(Ht.xx[q], Ht.xy[q], Ht.yy[q]));
    const double f = t[0][q] * t[0][q] + 3 * t[1][q] * t[1][q] + 3 * t[2][q] * t[2][q] + t[3][q] * t[3][q];
    r.d3 = std::max(r.d3, std::sqrt(f));
  }
  return r;
}

EnergyReport modulated_energy(const SGEpsState& s, const EulerState& e) {
  if (std::abs(s.t - e.t) > 1e-12 * std::max(1.0, std::abs(s.t)))
    throw Error(ErrorCode::StateInvalid, "SG_eps and Euler states are at different times");
  if (!s.psi.same_shape(e.psi)) throw Error(ErrorCode::StateInvalid, "SG_eps and Euler grids differ");
  const double eps = s.eps;
  const std::size_t N = s.psi.size();
  VectorField gb = spectral::gradient(e.psi);
  Hessian H = spectral_hessian(e.psi);
  const GridField* fs[3] = {&H.xx, &H.xy, &H.yy};
  const double R = std::pow(eps, -1.0 / 3.0);
  std::vector<double> h(N), g(N), en(N), qv(N), dl(N, 0.0), dh(N, 0.0);
  double v[3];
  for (std::size_t q = 0; q < N; ++q) {
    const Point f = s.grad_phi.at(q), b = gb.at(q);
    h[q] = 0.5 * norm2(f - b);
    g[q] = 0.5 * (1.0 + eps * s.rho[q]) * norm2(s.grad_psi.at(q) - b);
    en[q] = norm2(f);
    const Point x = s.psi.node(q);
    double avg[3] = {0, 0, 0}, mom[3] = {0, 0, 0};
    for (int k = 0; k < 8; ++k) {
      interpolate_many(fs, 3, x - (kGaussS[k] * eps) * f, 5, v);
      for (int c = 0; c < 3; ++c) {
        avg[c] += kGaussW[k] * v[c];
        mom[c] += kGaussW[k] * (1.0 - kGaussS[k]) * v[c];
      }
    }
    const double quad = mom[0] * f[0] * f[0] + 2 * mom[1] * f[0] * f[1] + mom[2] * f[1] * f[1];
    qv[q] = eps * quad;
    const double a0 = H.xx[q] - avg[0], a1 = H.xy[q] - avg[1], a2 = H.yy[q] - avg[2];
    const Point Af(a0 * f[0] + a1 * f[1], a1 * f[0] + a2 * f[1]);
    const double d = dot(perp(f), Af);
    (norm(f) <= R ? dl[q] : dh[q]) = d;
  }
  EnergyReport r;
  r.t = s.t;
  r.H = mean_of(h);
  r.G = mean_of(g);
  r.E = mean_of(en);
  r.Q = mean_of(qv);
  r.Delta_low = mean_of(dl);
  r.Delta_high = mean_of(dh);
  r.Delta = r.Delta_low + r.Delta_high;
  return r;
}

ExpansionReport expansion_monitor(const SGEpsState& s, const EulerState& e) {
  if (std::abs(s.t - e.t) > 1e-12 * std::max(1.0, std::abs(s.t)))
    throw Error(ErrorCode::StateInvalid, "SG_eps and Euler states are at different times");
  if (!s.psi.same_shape(e.psi)) throw Error(ErrorCode::StateInvalid, "SG_eps and Euler grids differ");
  const double eps = s.eps;
  const int n = s.psi.n();
  const double h = 1.0 / n;
  const Stencil& st = local_stencil(n);
  GridField rho1 = (s.rho - e.omega) * (1.0 / eps);
  GridField phib = spectral::fd_laplacian_inverse(e.omega);
  GridField psi1 = (s.psi - phib) * (1.0 / eps);
  ExpansionReport r;
  double rinf = rho1.max_abs(), rgrad = 0.0, rlip = 0.0;
  double pinf = psi1.max_abs(), pgrad = 0.0, phess = 0.0;
  for (std::size_t q = 0; q < rho1.size(); ++q) {
    rgrad = std::max(rgrad, std::hypot(st.d1(rho1, q, 0), st.d1(rho1, q, 1)));
    for (int a = 0; a < 2; ++a)
      for (int sg = -1; sg <= 1; sg += 2) rlip = std::max(rlip, std::abs(rho1[st.along(q, a, sg)] - rho1[q]) / h);
    pgrad = std::max(pgrad, std::hypot(st.d1(psi1, q, 0), st.d1(psi1, q, 1)));
    phess = std::max(phess, sym_norm(st.d2(psi1, q, 0), st.centered_mixed(psi1, q, 0, 1), st.d2(psi1, q, 1)));
    // D_h(A, B) = (A11 B22 + A22 B11)/2 - 1/4 sum_q A12^q B12^q, the polarisation of det_h
    const double f11 = st.d2(phib, q, 0), f22 = st.d2(phib, q, 1);
    const double s11 = st.d2(psi1, q, 0), s22 = st.d2(psi1, q, 1);
    double ff = 0.0, fs = 0.0, ss = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double mf = st.mixed(phib, q, 0, 1, kSigns[k][0], kSigns[k][1]);
      const double ms = st.mixed(psi1, q, 0, 1, kSigns[k][0], kSigns[k][1]);
      ff += mf * mf;
      fs += mf * ms;
      ss += ms * ms;
    }
    const double Dff = f11 * f22 - 0.25 * ff;
    const double Dfs = 0.5 * (f11 * s22 + f22 * s11) - 0.25 * fs;
    const double Dss = s11 * s22 - 0.25 * ss;
    const double res = (s11 + s22) + 2.0 * eps * Dfs + eps * eps * Dss - (rho1[q] - Dff);
    r.residual = std::max(r.residual, std::abs(res));
  }
  r.rho1_w1inf = rinf + rgrad;
  r.rho1_lip = rinf + rlip;
  r.psi1_c11 = pinf + pgrad + phess;
  return r;
}

PairedRun paired_run(const GridField& rho_bar0, double eps, const SweepOptions& opt) {
  require_2d(rho_bar0, "paired_run");
  if (rho_bar0.n() != opt.n) throw Error(ErrorCode::InvalidArgument, "rho_bar0 resolution differs from n");
  PairedRun pr;
  pr.eps = eps;
  pr.record = RunRecord({"t", "H", "G", "Q", "Delta", "Delta_low", "Delta_high", "E", "d2", "d3", "d2dt",
                         "rho1_w1inf", "psi1_c11", "psi1_residual", "ma_residual"});
  pr.record.config = {{"kind", "converge"},
                      {"eps", format_double(eps)},
                      {"n", std::to_string(opt.n)},
                      {"T", format_double(opt.T)},
                      {"dt", format_double(opt.dt)},
                      {"tol", format_double(opt.eps_opt.tol)},
                      {"well_prepared", opt.well_prepared ? "1" : "0"}};
  const int steps = static_cast<int>(std::llround(opt.T / opt.dt));
  if (steps < 0 || std::abs(steps * opt.dt - opt.T) > 1e-9 * std::max(1.0, opt.T))
    throw Error(ErrorCode::InvalidArgument, "T must be a multiple of dt");
  EulerOptions eo;
  eo.adv = opt.eps_opt.adv;
  eo.cfl = opt.eps_opt.cfl;
  double E0 = 0.0;
  try {
    GridField rho0 = opt.well_prepared ? well_prepared_density(rho_bar0, eps) : rho_bar0;
    SGEpsState s = init_sg_eps(rho0, eps, opt.eps_opt);
    EulerState e = init_euler(rho_bar0);
    for (int k = 0;; ++k) {
      // Both clocks accumulate identically; pin them to k dt.
      s.t = e.t = k * opt.dt;
      EnergyReport er = modulated_energy(s, e);
      EulerNorms nr = euler_norms(e);
      ExpansionReport xr = expansion_monitor(s, e);
      if (k == 0) {
        E0 = er.E;
        pr.H0 = er.H;
      }
      pr.HT = er.H;
      pr.GT = er.G;
      pr.E_drift = std::max(pr.E_drift, E0 > 0.0 ? std::abs(er.E - E0) / E0 : std::abs(er.E));
      pr.sup_rho1_w1inf = std::max(pr.sup_rho1_w1inf, xr.rho1_w1inf);
      pr.max_psi1_residual = std::max(pr.max_psi1_residual, xr.residual);
      pr.norms_sup = std::max({pr.norms_sup, nr.d2, nr.d3, nr.d2dt});
      pr.record.add_row({er.t, er.H, er.G, er.Q, er.Delta, er.Delta_low, er.Delta_high, er.E, nr.d2, nr.d3,
                         nr.d2dt, xr.rho1_w1inf, xr.psi1_c11, xr.residual, s.ma_residual});
      if (k == steps) break;
      s = sg_eps_step(s, opt.dt, opt.eps_opt);
      e = euler_step(e, opt.dt, eo);
    }
  } catch (const Error& err) {
    pr.record.abort(std::string(to_string(err.code())) + ": " + err.what());
  }
  return pr;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "slope needs two or more points");
  double mx = 0.0, my = 0.0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorCode::InvalidValue, "log-log fit needs positive data");
    mx += std::log(x[i]) / m;
    my += std::log(y[i]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidValue, "log-log fit needs distinct x");
  return sxy / sxx;
}

SweepReport eps_sweep(const GridField& rho_bar0, const std::vector<double>& eps, const SweepOptions& opt) {
  if (eps.empty()) throw Error(ErrorCode::InvalidArgument, "empty eps list");
  for (std::size_t i = 1; i < eps.size(); ++i)
    if (!(eps[i] < eps[i - 1])) throw Error(ErrorCode::InvalidArgument, "eps list must be decreasing");
  SweepReport rep;
  rep.runs.resize(eps.size());
  const int threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(eps.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < eps.size(); ++i) rep.runs[i] = paired_run(rho_bar0, eps[i], opt);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < eps.size(); i += static_cast<std::size_t>(threads))
          rep.runs[i] = paired_run(rho_bar0, eps[i], opt);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& r : rep.runs) rep.c_hat = std::max(rep.c_hat, r.norms_sup);
  const double C = rep.c_hat;
  rep.table = RunRecord({"eps", "T", "H0", "HT", "GT", "E_drift", "exponent_running"});
  rep.table.config = {{"kind", "converge-sweep"}, {"n", std::to_string(opt.n)}, {"T", format_double(opt.T)},
                      {"dt", format_double(opt.dt)}, {"c_hat", format_double(C)}};
  std::vector<double> xs, ys;
  // The table is keyed by eps in increasing order so its first column is monotone.
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const PairedRun& r = rep.runs[i];
    bool env = r.record.ok(), qok = r.record.ok(), dok = r.record.ok();
    if (r.record.ok()) {
      const auto t = r.record.column("t"), H = r.record.column("H"), Q = r.record.column("Q"),
                 D = r.record.column("Delta");
      const double e23 = std::pow(eps[i], 2.0 / 3.0);
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(H[k] <= (r.H0 + C * e23 * (1.0 + t[k])) * std::exp(C * t[k]))) env = false;
        if (!(std::abs(Q[k]) <= C * eps[i])) qok = false;
        if (!(std::abs(D[k]) <= C * (e23 + H[k]))) dok = false;
      }
    }
    const bool eok = r.record.ok() && r.E_drift <= 1e-3;
    rep.envelope_ok.push_back(env);
    rep.q_ok.push_back(qok);
    rep.delta_ok.push_back(dok);
    rep.energy_ok.push_back(eok);
    rep.all_ok = rep.all_ok && env && qok && dok && eok;
    double running = std::numeric_limits<double>::quiet_NaN();
    if (r.record.ok() && r.HT > 0.0) {
      xs.push_back(eps[i]);
      ys.push_back(r.HT);
      if (xs.size() >= 2) running = loglog_slope(xs, ys);
    }
    rows.push_back({eps[i], opt.T, r.H0, r.HT, r.GT, r.E_drift, running});
  }
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) rep.table.add_row(*it);
  if (xs.size() >= 2) {
    rep.exponent = loglog_slope(xs, ys);
  } else {
    rep.exponent = std::numeric_limits<double>::quiet_NaN();
  }
  if (!(rep.exponent >= 0.6) || xs.size() != eps.size()) rep.all_ok = false;
  return rep;
}

StrongReport strong_expansion_monitor(const SweepReport& sweep, double tol) {
  StrongReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : sweep.runs) {
    rep.eps.push_back(r.eps);
    rep.sup_rho1_w1inf.push_back(r.sup_rho1_w1inf);
    rep.residual_scaled.push_back(r.max_psi1_residual * r.eps / tol);
    if (!r.record.ok()) {
      rep.ok = false;
      continue;
    }
    lo = std::min(lo, r.sup_rho1_w1inf);
    hi = std::max(hi, r.sup_rho1_w1inf);
    const auto a = r.record.column("psi1_c11"), b = r.record.column("rho1_w1inf");
    for (std::size_t k = 0; k < a.size(); ++k) rep.elliptic_c = std::max(rep.elliptic_c, a[k] / (1.0 + b[k]));
    if (!(rep.residual_scaled.back() <= 10.0)) rep.ok = false;
  }
  rep.variation = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(rep.variation <= 2.0)) rep.ok = false;
  return rep;
}

}  // namespace sglab
