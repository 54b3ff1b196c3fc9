#include "sglab/interpolation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace sglab {

namespace {

constexpr int kMaxNodes = 6;

struct AxisStencil {
  int count = 0;
  std::array<std::size_t, kMaxNodes> idx{};  // wrapped node offsets (index * stride)
  std::array<double, kMaxNodes> w{};
  std::array<double, kMaxNodes> dw{};  // derivative weights, in grid units
};

// 1 / prod_{b != a} (x_a - x_b) for the symmetric node sets of each order.
const std::array<double, kMaxNodes>& denominators(int order) {
  static const auto table = [] {
    std::array<std::array<double, kMaxNodes>, 6> t{};
    for (int order : {1, 3, 5}) {
      const int count = order + 1;
      for (int a = 0; a < count; ++a) {
        double den = 1.0;
        for (int b = 0; b < count; ++b)
          if (b != a) den *= double(a - b);
        t[order][a] = 1.0 / den;
      }
    }
    return t;
  }();
  return table[order];
}

int wrap_index(int i, int n) {
  int m = i % n;
  return m < 0 ? m + n : m;
}

AxisStencil make_stencil(double t, int order, bool with_derivative, int n, std::size_t stride) {
  if (order != 1 && order != 3 && order != 5) {
    throw Error(ErrorCode::InvalidArgument, "interpolation order must be 1, 3 or 5");
  }
  AxisStencil s;
  const double base = std::floor(t);
  const double u = t - base;
  s.count = order + 1;
  const int lo = -(order - 1) / 2;
  const int first = wrap_index(static_cast<int>(base) + lo, n);
  for (int a = 0; a < s.count; ++a) {
    const int i = first + a;
    s.idx[a] = static_cast<std::size_t>(i >= n ? i - n : i) * stride;
  }
  const auto& inv = denominators(order);
  std::array<double, kMaxNodes> diff{};
  for (int b = 0; b < s.count; ++b) diff[b] = u - (lo + b);
  for (int a = 0; a < s.count; ++a) {
    double num = 1.0;
    for (int b = 0; b < s.count; ++b)
      if (b != a) num *= diff[b];
    s.w[a] = num * inv[a];
    if (with_derivative) {
      double d = 0.0;
      for (int c = 0; c < s.count; ++c) {
        if (c == a) continue;
        double prod = 1.0;
        for (int b = 0; b < s.count; ++b)
          if (b != a && b != c) prod *= diff[b];
        d += prod;
      }
      s.dw[a] = d * inv[a];
    }
  }
  return s;
}

// Evaluates m fields sharing one grid at x; grads may be null when !Grad.
template <bool Grad>
void eval_many(const GridField* const* fs, int m, const Point& x, int order, double* vals, Point* grads) {
  const GridField& f0 = *fs[0];
  const int d = f0.dim(), n = f0.n();
  if (x.dim() != d) throw Error(ErrorCode::DimensionError, "interpolation point has wrong dimension");
  std::array<AxisStencil, 3> st;
  for (int a = 0; a < d; ++a) {
    if (!std::isfinite(x[a])) throw Error(ErrorCode::InvalidPoint, "non-finite interpolation point");
    st[a] = make_stencil(x[a] * n, order, Grad, n, f0.stride(a));
  }
  for (int k = 0; k < m; ++k) {
    const double* v = fs[k]->data();
    double val = 0.0;
    std::array<double, 3> g{0.0, 0.0, 0.0};
    if (d == 2) {
      for (int a = 0; a < st[0].count; ++a) {
        const double* row = v + st[0].idx[a];
        double r = 0.0, rd = 0.0;
        for (int b = 0; b < st[1].count; ++b) {
          const double fv = row[st[1].idx[b]];
          r += st[1].w[b] * fv;
          if constexpr (Grad) rd += st[1].dw[b] * fv;
        }
        val += st[0].w[a] * r;
        if constexpr (Grad) {
          g[0] += st[0].dw[a] * r;
          g[1] += st[0].w[a] * rd;
        }
      }
    } else if (d == 3) {
      for (int a = 0; a < st[0].count; ++a) {
        double pv = 0.0, pg1 = 0.0, pg2 = 0.0;
        for (int b = 0; b < st[1].count; ++b) {
          const double* row = v + st[0].idx[a] + st[1].idx[b];
          double r = 0.0, rd = 0.0;
          for (int c = 0; c < st[2].count; ++c) {
            const double fv = row[st[2].idx[c]];
            r += st[2].w[c] * fv;
            if constexpr (Grad) rd += st[2].dw[c] * fv;
          }
          pv += st[1].w[b] * r;
          if constexpr (Grad) {
            pg1 += st[1].dw[b] * r;
            pg2 += st[1].w[b] * rd;
          }
        }
        val += st[0].w[a] * pv;
        if constexpr (Grad) {
          g[0] += st[0].dw[a] * pv;
          g[1] += st[0].w[a] * pg1;
          g[2] += st[0].w[a] * pg2;
        }
      }
    } else {
      for (int a = 0; a < st[0].count; ++a) {
        const double fv = v[st[0].idx[a]];
        val += st[0].w[a] * fv;
        if constexpr (Grad) g[0] += st[0].dw[a] * fv;
      }
    }
    vals[k] = val;
    if constexpr (Grad) {
      grads[k] = Point::zero(d);
      for (int a = 0; a < d; ++a) grads[k][a] = g[a] * n;
    }
  }
}

}  // namespace

double interpolate(const GridField& f, const Point& x, int order) {
  const GridField* fs[1] = {&f};
  double v;
  eval_many<false>(fs, 1, x, order, &v, nullptr);
  return v;
}

double interpolate_with_gradient(const GridField& f, const Point& x, int order, Point& grad) {
  const GridField* fs[1] = {&f};
  double v;
  eval_many<true>(fs, 1, x, order, &v, &grad);
  return v;
}

void interpolate_many(const GridField* const* fields, int count, const Point& x, int order, double* out) {
  if (count <= 0) return;
  for (int k = 1; k < count; ++k) fields[0]->require_same_shape(*fields[k], "interpolate_many");
  eval_many<false>(fields, count, x, order, out, nullptr);
}

double interpolate_clipped(const GridField& f, const Point& x, int order) {
  const double val = interpolate(f, x, order);
  const int d = f.dim(), n = f.n();
  std::array<int, 3> base{0, 0, 0};
  for (int a = 0; a < d; ++a) base[a] = static_cast<int>(std::floor(x[a] * n));
  double lo = 1e300, hi = -1e300;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    std::size_t q = 0;
    for (int a = 0; a < d; ++a) {
      q += static_cast<std::size_t>(wrap_index(base[a] + ((c >> a) & 1), n)) * f.stride(a);
    }
    lo = std::min(lo, f[q]);
    hi = std::max(hi, f[q]);
  }
  return std::clamp(val, lo, hi);
}

Point interpolate(const VectorField& v, const Point& x, int order) {
  const int m = v.components();
  if (m > 3) throw Error(ErrorCode::DimensionError, "vector fields have at most 3 components");
  const GridField* fs[3] = {};
  double out[3];
  for (int a = 0; a < m; ++a) fs[a] = &v.comp[a];
  eval_many<false>(fs, m, x, order, out, nullptr);
  Point r = Point::zero(m);
  for (int a = 0; a < m; ++a) r[a] = out[a];
  return r;
}

}  // namespace sglab
