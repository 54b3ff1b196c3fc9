#include "sglab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sglab {

namespace {

struct Offset {
  std::array<int, 3> o{};
  double dist = 0.0;
};

std::vector<Offset> offsets_within(int dim, int n, double rmax) {
  std::vector<Offset> out;
  const int half = n / 2;
  const double h = 1.0 / n;
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    lo[a] = -((n - 1) / 2);
    hi[a] = half;
  }
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        double d = h * std::sqrt(double(i) * i + double(j) * j + double(k) * k);
        if (d <= rmax + 1e-15) out.push_back({{i, j, k}, d});
      }
  return out;
}

double scan_offset(const GridField& f, const std::array<int, 3>& o) {
  const int n = f.n(), d = f.dim();
  std::array<int, 3> ext{1, 1, 1};
  std::array<std::size_t, 3> st{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    ext[3 - d + a] = n;
    st[3 - d + a] = f.stride(a);
  }
  std::array<int, 3> oo{0, 0, 0};
  for (int a = 0; a < d; ++a) oo[3 - d + a] = o[a];
  std::vector<std::size_t> wk(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) wk[k] = static_cast<std::size_t>(((k + oo[2]) % n + n) % n) * st[2];
  const double* v = f.data();
  double m = 0.0;
  for (int i = 0; i < ext[0]; ++i) {
    const std::size_t bi = i * st[0], ci = static_cast<std::size_t>(((i + oo[0]) % n + n) % n) * st[0];
    for (int j = 0; j < ext[1]; ++j) {
      const std::size_t bj = bi + j * st[1];
      const std::size_t cj = ci + static_cast<std::size_t>(((j + oo[1]) % n + n) % n) * st[1];
      for (int k = 0; k < ext[2]; ++k) {
        m = std::max(m, std::abs(v[cj + wk[k]] - v[bj + k * st[2]]));
      }
    }
  }
  return m;
}

}  // namespace

std::vector<std::pair<double, double>> modulus_table(const GridField& f, std::uint64_t seed) {
  const int d = f.dim(), n = f.n();
  const double h = f.h();
  auto offs = offsets_within(d, n, std::sqrt(double(d)) / 2.0);
  const double work = double(offs.size()) * double(f.size());
  std::vector<std::pair<double, double>> tab;
  if (work <= 3e8) {
    tab.reserve(offs.size());
    for (const auto& o : offs) tab.emplace_back(o.dist, scan_offset(f, o.o));
  } else {
    // Small offsets decide the behaviour of the Dini integrand near r = h, so
    // they are always scanned; the rest are sampled.
    std::mt19937_64 rng(seed);
    std::vector<Offset> picked;
    std::vector<Offset> rest;
    for (const auto& o : offs) (o.dist <= 4.0 * h ? picked : rest).push_back(o);
    std::shuffle(rest.begin(), rest.end(), rng);
    std::size_t budget = static_cast<std::size_t>(std::max(1e5, 3e8 / double(f.size())));
    std::size_t extra = std::min(rest.size(), budget > picked.size() ? budget - picked.size() : 0);
    extra = std::min<std::size_t>(extra, static_cast<std::size_t>(3e8 / double(f.size())));
    picked.insert(picked.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(extra));
    for (const auto& o : picked) tab.emplace_back(o.dist, scan_offset(f, o.o));
  }
  std::sort(tab.begin(), tab.end());
  double run = 0.0;
  for (auto& e : tab) {
    run = std::max(run, e.second);
    e.second = run;
  }
  return tab;
}

namespace {

double lookup(const std::vector<std::pair<double, double>>& tab, double r) {
  auto it = std::upper_bound(tab.begin(), tab.end(), std::make_pair(r + 1e-15, 1e300));
  if (it == tab.begin()) return 0.0;
  return std::prev(it)->second;
}

}  // namespace

std::vector<double> modulus_of_continuity(const GridField& f, const std::vector<double>& radii, std::uint64_t seed) {
  if (radii.empty()) throw Error(ErrorCode::InvalidArgument, "modulus_of_continuity: empty radius list");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0 && radii[i] <= 0.5)) throw Error(ErrorCode::InvalidArgument, "radii must lie in (0, 1/2]");
    if (i > 0 && radii[i] < radii[i - 1]) throw Error(ErrorCode::InvalidArgument, "radii must be sorted ascending");
  }
  auto tab = modulus_table(f, seed);
  std::vector<double> w;
  w.reserve(radii.size());
  for (double r : radii) w.push_back(lookup(tab, r));
  return w;
}

double dini_integral(const std::function<double(double)>& w, double r_min, int points) {
  if (!(r_min > 0.0 && r_min < 1.0)) throw Error(ErrorCode::InvalidArgument, "dini_integral: r_min must lie in (0,1)");
  // With s = log r the integrand w(r)/r dr becomes w(e^s) ds.
  const double a = std::log(r_min);
  const double ds = -a / (points - 1);
  std::vector<double> terms(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    double s = a + i * ds;
    double wt = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    terms[static_cast<std::size_t>(i)] = wt * w(std::exp(s));
  }
  return pairwise_sum(terms) * ds;
}

DiniResult dini_seminorm(const GridField& f, std::uint64_t seed) {
  auto tab = modulus_table(f, seed);
  DiniResult r;
  r.r_min = f.h();
  r.value = dini_integral([&](double x) { return lookup(tab, x); }, r.r_min);
  return r;
}

std::pair<double, double> linf_envelope(const GridField& f) { return {f.min(), f.max()}; }

std::pair<GridField, GridField> signed_split(const GridField& f) {
  const double m = f.mean();
  if (std::abs(m) > 1e-10) throw Error(ErrorCode::MeanNotZero, "signed_split needs a zero-mean field");
  GridField plus(f.dim(), f.n()), minus(f.dim(), f.n());
  for (std::size_t q = 0; q < f.size(); ++q) {
    plus[q] = std::max(f[q], 0.0);
    minus[q] = std::max(-f[q], 0.0);
  }
  return {plus, minus};
}

}  // namespace sglab
