#include "sglab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

namespace sglab::spectral {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// Forward/backward real transforms with their own aligned buffers.
class Plan {
 public:
  Plan(int dim, int n) : dim_(dim), n_(n) {
    std::size_t real = 1;
    for (int a = 0; a < dim; ++a) real *= static_cast<std::size_t>(n);
    real_size_ = real;
    complex_size_ = real / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
    in_ = fftw_alloc_real(real_size_);
    out_ = fftw_alloc_complex(complex_size_);
    int dims[3] = {n, n, n};
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c(dim, dims, in_, out_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r(dim, dims, out_, in_, FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(out_); }
  std::size_t complex_size() const { return complex_size_; }

  void forward(const GridField& f) {
    std::copy(f.data(), f.data() + real_size_, in_);
    fftw_execute(fwd_);
  }
  /// Inverse transform into `g`, normalized.
  void backward(GridField& g) {
    fftw_execute(bwd_);
    const double s = 1.0 / static_cast<double>(real_size_);
    for (std::size_t q = 0; q < real_size_; ++q) g[q] = in_[q] * s;
  }

  /// Calls fn(idx, k) for every stored mode, k the signed integer wavenumbers.
  template <class Fn>
  void for_each_mode(Fn&& fn) const {
    const int nh = n_ / 2 + 1;
    std::array<int, 3> k{0, 0, 0};
    std::size_t idx = 0;
    if (dim_ == 1) {
      for (int c = 0; c < nh; ++c, ++idx) fn(idx, std::array<int, 3>{c, 0, 0});
    } else if (dim_ == 2) {
      for (int a = 0; a < n_; ++a)
        for (int c = 0; c < nh; ++c, ++idx) {
          k = {signed_k(a), c, 0};
          fn(idx, k);
        }
    } else {
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          for (int c = 0; c < nh; ++c, ++idx) {
            k = {signed_k(a), signed_k(b), c};
            fn(idx, k);
          }
    }
  }

  int dim() const { return dim_; }
  int n() const { return n_; }
  int signed_k(int a) const { return a <= n_ / 2 ? a : a - n_; }

 private:
  int dim_, n_;
  std::size_t real_size_ = 0, complex_size_ = 0;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

Plan& plan_for(int dim, int n) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
  auto& slot = cache[{dim, n}];
  if (!slot) slot = std::make_unique<Plan>(dim, n);
  return *slot;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Odd derivatives of the unpaired Nyquist mode are not real; they are dropped.
bool is_nyquist(const std::array<int, 3>& k, int axis, int n) { return (n % 2 == 0) && std::abs(k[axis]) == n / 2; }

}  // namespace

GridField poisson_solve(const GridField& f, double mean_tol) {
  if (std::abs(f.mean()) > mean_tol) throw Error(ErrorCode::MeanNotZero, "poisson_solve needs a zero-mean right-hand side");
  Plan& p = plan_for(f.dim(), f.n());
  p.forward(f);
  auto* s = p.spectrum();
  const int d = f.dim();
  p.for_each_mode([&](std::size_t idx, const std::array<int, 3>& k) {
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += double(k[a]) * k[a];
    s[idx] = k2 == 0.0 ? 0.0 : s[idx] / (-kTwoPi * kTwoPi * k2);
  });
  GridField u(f.dim(), f.n());
  p.backward(u);
  return u;
}

GridField laplacian(const GridField& u) {
  Plan& p = plan_for(u.dim(), u.n());
  p.forward(u);
  auto* s = p.spectrum();
  const int d = u.dim();
  p.for_each_mode([&](std::size_t idx, const std::array<int, 3>& k) {
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += double(k[a]) * k[a];
    s[idx] *= -kTwoPi * kTwoPi * k2;
  });
  GridField r(u.dim(), u.n());
  p.backward(r);
  return r;
}

GridField fd_laplacian_inverse(const GridField& f) {
  Plan& p = plan_for(f.dim(), f.n());
  p.forward(f);
  auto* s = p.spectrum();
  const int d = f.dim(), n = f.n();
  const double h2 = 1.0 / (double(n) * n);
  p.for_each_mode([&](std::size_t idx, const std::array<int, 3>& k) {
    double lam = 0.0;
    for (int a = 0; a < d; ++a) {
      double sn = std::sin(M_PI * k[a] / n);
      lam -= 4.0 * sn * sn / h2;
    }
    s[idx] = lam == 0.0 ? 0.0 : s[idx] / lam;
  });
  GridField u(f.dim(), f.n());
  p.backward(u);
  return u;
}

GridField derivative(const GridField& u, int axis) {
  Plan& p = plan_for(u.dim(), u.n());
  p.forward(u);
  auto* s = p.spectrum();
  const int n = u.n();
  p.for_each_mode([&](std::size_t idx, const std::array<int, 3>& k) {
    if (is_nyquist(k, axis, n)) {
      s[idx] = 0.0;
      return;
    }
    s[idx] *= std::complex<double>(0.0, kTwoPi * k[axis]);
  });
  GridField r(u.dim(), u.n());
  p.backward(r);
  return r;
}

GridField second_derivative(const GridField& u, int a, int b) {
  Plan& p = plan_for(u.dim(), u.n());
  p.forward(u);
  auto* s = p.spectrum();
  const int n = u.n();
  p.for_each_mode([&](std::size_t idx, const std::array<int, 3>& k) {
    if (a != b && (is_nyquist(k, a, n) || is_nyquist(k, b, n))) {
      s[idx] = 0.0;
      return;
    }
    s[idx] *= -kTwoPi * kTwoPi * double(k[a]) * double(k[b]);
  });
  GridField r(u.dim(), u.n());
  p.backward(r);
  return r;
}

GridField third_derivative(const GridField& u, int a, int b, int c) {
  Plan& p = plan_for(u.dim(), u.n());
  p.forward(u);
  auto* s = p.spectrum();
  const int n = u.n();
  p.for_each_mode([&](std::size_t idx, const std::array<int, 3>& k) {
    if (is_nyquist(k, a, n) || is_nyquist(k, b, n) || is_nyquist(k, c, n)) {
      s[idx] = 0.0;
      return;
    }
    const double f = kTwoPi * kTwoPi * kTwoPi * double(k[a]) * double(k[b]) * double(k[c]);
    s[idx] *= std::complex<double>(0.0, -f);
  });
  GridField r(u.dim(), u.n());
  p.backward(r);
  return r;
}

VectorField gradient(const GridField& u) {
  VectorField g;
  for (int a = 0; a < u.dim(); ++a) g.comp.push_back(derivative(u, a));
  return g;
}

GridField low_pass(const GridField& u, int keep) {
  Plan& p = plan_for(u.dim(), u.n());
  p.forward(u);
  auto* s = p.spectrum();
  const int d = u.dim();
  p.for_each_mode([&](std::size_t idx, const std::array<int, 3>& k) {
    for (int a = 0; a < d; ++a) {
      if (std::abs(k[a]) > keep) {
        s[idx] = 0.0;
        return;
      }
    }
  });
  GridField r(u.dim(), u.n());
  p.backward(r);
  return r;
}

}  // namespace sglab::spectral
