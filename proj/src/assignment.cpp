#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "sglab/transport.hpp"

namespace sglab {

double transport_cost(const Point& x, const Point& y, bool periodic) {
  if (periodic) {
    const Point d = torus_delta(x, y);
    return norm2(d);
  }
  return norm2(x - y);
}

namespace {

bool uniform_masses(const ParticleCloud& c) {
  if (c.size() == 0) return false;
  const double m0 = c.masses[0];
  for (double m : c.masses)
    if (std::abs(m - m0) > 1e-12 * std::max(1.0, std::abs(m0))) return false;
  return true;
}

// Dense Hungarian algorithm with row and column potentials. Returns the
// column assigned to each row and leaves the potentials in u, v.
std::vector<std::size_t> hungarian(const std::vector<double>& C, std::size_t n, std::vector<double>& u,
                                   std::vector<double>& v) {
  const double inf = std::numeric_limits<double>::infinity();
  u.assign(n + 1, 0.0);
  v.assign(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = C[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

// Rewrites an optimal assignment into the lexicographically smallest optimal
// one. Every optimal assignment uses only tight edges of the dual solution,
// so it suffices to swap along alternating paths of tight edges.
void lexicographic_tie_break(const std::vector<double>& C, std::size_t n, const std::vector<double>& u,
                             const std::vector<double>& v, std::vector<std::size_t>& sigma) {
  double scale = 1.0;
  for (double c : C) scale = std::max(scale, std::abs(c));
  const double tol = 1e-11 * scale;
  std::vector<std::vector<std::size_t>> tight(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (C[i * n + j] - u[i + 1] - v[j + 1] <= tol) tight[i].push_back(j);
  std::vector<std::size_t> owner(n);
  for (std::size_t i = 0; i < n; ++i) owner[sigma[i]] = i;
  std::vector<char> fixed_col(n, 0);
  std::vector<std::size_t> from_row(n), via_col(n);
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : tight[i]) {
      if (j >= sigma[i]) break;
      if (fixed_col[j]) continue;
      // Search a tight alternating path from the current owner of j that
      // ends at column sigma[i], avoiding fixed columns and j itself.
      const std::size_t target = sigma[i];
      std::fill(seen.begin(), seen.end(), 0);
      std::queue<std::size_t> rows;
      const std::size_t r0 = owner[j];
      rows.push(r0);
      seen[r0] = 1;
      bool found = false;
      std::size_t end_row = 0;
      while (!rows.empty() && !found) {
        const std::size_t r = rows.front();
        rows.pop();
        for (std::size_t jj : tight[r]) {
          if (fixed_col[jj] || jj == j || jj == sigma[r]) continue;
          if (jj == target) {
            found = true;
            end_row = r;
            break;
          }
          const std::size_t r2 = owner[jj];
          if (r2 == i || seen[r2]) continue;
          seen[r2] = 1;
          from_row[r2] = r;
          via_col[r2] = jj;
          rows.push(r2);
        }
      }
      if (!found) continue;
      // Shift columns backwards along the path: end_row takes target, each
      // predecessor row takes the column that led to its successor.
      std::size_t r = end_row;
      std::size_t col = target;
      while (true) {
        sigma[r] = col;
        owner[col] = r;
        if (r == r0) break;
        col = via_col[r];
        r = from_row[r];
      }
      sigma[i] = j;
      owner[j] = i;
      break;
    }
    fixed_col[sigma[i]] = 1;
  }
}

}  // namespace

TransportPlan exact_assignment(const ParticleCloud& a, const ParticleCloud& b) {
  if (a.dim != b.dim) throw Error(ErrorCode::DimensionError, "clouds of different dimension");
  if (a.size() != b.size()) throw Error(ErrorCode::NotBalanced, "assignment needs equal particle counts");
  if (a.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty cloud");
  if (a.size() > 512) throw Error(ErrorCode::InvalidArgument, "assignment is limited to 512 particles");
  a.validate();
  b.validate();
  if (!uniform_masses(a) || !uniform_masses(b) || std::abs(a.masses[0] - b.masses[0]) > 1e-12 * a.masses[0]) {
    throw Error(ErrorCode::NotBalanced, "assignment needs equal uniform masses");
  }
  const bool periodic = a.periodic && b.periodic;
  const std::size_t n = a.size();
  std::vector<double> C(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) C[i * n + j] = transport_cost(a.positions[i], b.positions[j], periodic);
  std::vector<double> u, v;
  std::vector<std::size_t> sigma = hungarian(C, n, u, v);
  lexicographic_tie_break(C, n, u, v, sigma);

  TransportPlan plan;
  plan.source = a;
  plan.target = b;
  plan.assignment = sigma;
  const double m = a.masses[0];
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    plan.coupling.push_back({i, sigma[i], m});
    terms[i] = m * C[i * n + sigma[i]];
  }
  plan.cost = pairwise_sum(terms);
  return plan;
}

namespace {

// Lexicographic order on clouds, used to make w2 symmetric bit for bit.
bool cloud_less(const ParticleCloud& a, const ParticleCloud& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < a.dim; ++k)
      if (a.positions[i][k] != b.positions[i][k]) return a.positions[i][k] < b.positions[i][k];
    if (a.masses[i] != b.masses[i]) return a.masses[i] < b.masses[i];
  }
  return false;
}

double logsumexp_row(const std::vector<double>& vals) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : vals) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : vals) s += std::exp(x - mx);
  return mx + std::log(s);
}

// One c-transform: out_j = -eps log sum_i a_i exp((f_i - C(x_i, y_j)) / eps).
void soft_transform(const ParticleCloud& X, const std::vector<double>& f, const ParticleCloud& Y,
                    std::vector<double>& out, double eps) {
  std::vector<double> vals(X.size());
  out.resize(Y.size());
  for (std::size_t j = 0; j < Y.size(); ++j) {
    for (std::size_t i = 0; i < X.size(); ++i)
      vals[i] = std::log(X.masses[i]) + (f[i] - transport_cost(X.positions[i], Y.positions[j], true)) / eps;
    out[j] = -eps * logsumexp_row(vals);
  }
}

double dual_value(const ParticleCloud& a, const std::vector<double>& f, const ParticleCloud& b,
                  const std::vector<double>& g) {
  std::vector<double> t;
  t.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) t.push_back(a.masses[i] * f[i]);
  for (std::size_t j = 0; j < b.size(); ++j) t.push_back(b.masses[j] * g[j]);
  return pairwise_sum(t);
}

double sinkhorn_cost(const ParticleCloud& a, const ParticleCloud& b, const W2Options& opt, bool symmetric) {
  const double diam2 = 0.25 * a.dim;
  std::vector<double> f(a.size(), 0.0), g(b.size(), 0.0), tmp;
  double eps = opt.eps_start * diam2;
  const double eps_end = opt.eps_end * diam2;
  int it = 0;
  while (true) {
    const bool last = eps <= eps_end * (1 + 1e-12);
    const int inner = last ? opt.max_iterations : 20;
    for (int k = 0; k < inner; ++k, ++it) {
      if (symmetric) {
        soft_transform(a, f, a, tmp, eps);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.5 * (f[i] + tmp[i]);
      } else {
        soft_transform(a, f, b, g, eps);
        soft_transform(b, g, a, f, eps);
      }
      if (last && k % 10 == 9) {
        // Marginal defect of the second marginal after the f-update.
        const ParticleCloud& Y = symmetric ? a : b;
        const std::vector<double>& gg = symmetric ? f : g;
        double err = 0.0;
        for (std::size_t j = 0; j < Y.size(); ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < a.size(); ++i)
            s += a.masses[i] *
                 std::exp((f[i] + gg[j] - transport_cost(a.positions[i], Y.positions[j], true)) / eps);
          err += std::abs(s * Y.masses[j] - Y.masses[j]);
        }
        if (err < opt.marginal_tol) break;
      }
    }
    if (last) break;
    eps = std::max(eps_end, 0.5 * eps);
  }
  return symmetric ? dual_value(a, f, a, f) : dual_value(a, f, b, g);
}

}  // namespace

double w2_torus(const ParticleCloud& mu_in, const ParticleCloud& nu_in, const W2Options& opt) {
  if (mu_in.dim != nu_in.dim) throw Error(ErrorCode::DimensionError, "clouds of different dimension");
  mu_in.validate();
  nu_in.validate();
  const double ma = mu_in.total_mass(), mb = nu_in.total_mass();
  if (std::abs(ma - mb) > 1e-10 * std::max(1.0, ma)) throw Error(ErrorCode::NotBalanced, "total masses differ");
  const bool swap = cloud_less(nu_in, mu_in);
  ParticleCloud mu = swap ? nu_in : mu_in;
  ParticleCloud nu = swap ? mu_in : nu_in;
  mu.periodic = nu.periodic = true;
  for (auto& p : mu.positions) p = wrap(p);
  for (auto& p : nu.positions) p = wrap(p);
  if (mu.size() == 1 && nu.size() == 1) return std::sqrt(ma * transport_cost(mu.positions[0], nu.positions[0], true));
  if (mu.size() == nu.size() && mu.size() <= opt.exact_limit && uniform_masses(mu) && uniform_masses(nu) &&
      std::abs(mu.masses[0] - nu.masses[0]) <= 1e-12 * mu.masses[0]) {
    return std::sqrt(std::max(0.0, exact_assignment(mu, nu).cost));
  }
  const double ab = sinkhorn_cost(mu, nu, opt, false);
  const double aa = sinkhorn_cost(mu, mu, opt, true);
  const double bb = sinkhorn_cost(nu, nu, opt, true);
  return std::sqrt(std::max(0.0, ab - 0.5 * aa - 0.5 * bb));
}

ParticleCloud quantize(const GridField& f) {
  ParticleCloud c;
  c.dim = f.dim();
  c.periodic = true;
  double hd = 1.0;
  for (int k = 0; k < f.dim(); ++k) hd *= f.h();
  for (std::size_t q = 0; q < f.size(); ++q) {
    if (f[q] < 0.0 || !std::isfinite(f[q])) throw Error(ErrorCode::InvalidDensity, "grid measure must be nonnegative");
    if (f[q] == 0.0) continue;
    c.positions.push_back(f.node(q));
    c.masses.push_back(f[q] * hd);
  }
  return c;
}

double w2_torus(const GridField& mu, const GridField& nu, const W2Options& opt) {
  mu.require_same_shape(nu, "w2_torus");
  return w2_torus(quantize(mu), quantize(nu), opt);
}

}  // namespace sglab
