#pragma once

#include <array>
#include <vector>

#include "sglab/grid_field.hpp"

namespace sglab {

/// Psi(x) = |x|^2/2 + b.x + p(x) with p periodic and zero-mean. The linear part
/// b is zero for solutions of the periodic Monge-Ampere problem; it becomes
/// nonzero after Legendre transforms of shifted potentials.
struct ConvexPotential {
  enum class Kind { Dual, Primal };

  GridField p;
  Point b;
  Kind kind = Kind::Dual;

  static ConvexPotential identity(int dim, int n, Kind kind = Kind::Dual);
  int dim() const { return p.dim(); }
  int n() const { return p.n(); }
};

const char* kind_name(ConvexPotential::Kind k);

/// Neighbour table for offsets in {-1,0,1}^d.
class Stencil {
 public:
  Stencil(int dim, int n);
  int dim() const { return dim_; }
  int n() const { return n_; }
  double h() const { return 1.0 / n_; }
  std::size_t size() const { return size_; }
  /// Index of q shifted by the offset vector o (components in {-1,0,1}).
  std::size_t at(std::size_t q, int o0, int o1, int o2 = 0) const {
    return nb_[q * 27 + static_cast<std::size_t>((o0 + 1) + 3 * (o1 + 1) + 9 * (o2 + 1))];
  }
  std::size_t along(std::size_t q, int axis, int s) const {
    int o[3] = {0, 0, 0};
    o[axis] = s;
    return at(q, o[0], o[1], o[2]);
  }

  double d2(const GridField& f, std::size_t q, int a) const;
  /// One-sided mixed difference D_a^{sa} D_b^{sb} f, sa, sb in {+1,-1}.
  double mixed(const GridField& f, std::size_t q, int a, int b, int sa, int sb) const;
  double centered_mixed(const GridField& f, std::size_t q, int a, int b) const;
  double d1(const GridField& f, std::size_t q, int a) const;

 private:
  int dim_, n_;
  std::size_t size_;
  std::vector<std::size_t> nb_;
};

/// det_h(I + D^2 p). In 2-D the mixed term averages the four one-sided
/// quadrant products, which makes the discrete mean of det_h exactly 1 for
/// every periodic p.
GridField ma_determinant(const GridField& p);

/// Centered-difference Hessian of p at node q (d x d, row-major in a 3x3 array).
std::array<double, 9> centered_hessian(const GridField& p, const Stencil& st, std::size_t q);

/// Smallest eigenvalue of I + centered D^2 p over all nodes.
double min_hessian_eigenvalue(const GridField& p);

struct MAOptions {
  double tol = 1e-10;          // sup-norm residual target
  int max_newton = 80;
  int max_linear = 500;
  double convexity_floor = -1e-8;
  const GridField* warm_start = nullptr;  // previous periodic part, zero mean
};

struct MASolution {
  ConvexPotential potential;
  double residual = 0.0;          // sup |det_h - rho| (after the constant shift in 3-D)
  int newton_iterations = 0;
  int homotopy_steps = 0;
  double lagrange_constant = 0.0; // mean(det_h) - 1; identically 0 in 2-D
};

/// Solves det_h(I + D^2 p) = rho on the periodic grid by damped Newton with
/// homotopy from the warm start. Requires rho > 0, mean(rho) = 1, n >= 16.
MASolution solve_ma_periodic(const GridField& rho, const MAOptions& opt = {});

/// Linearisation of det_h at a fixed p with cached per-node coefficients. In
/// 3-D the output is projected to zero mean (the Lagrange constant is free).
class MALinearization {
 public:
  explicit MALinearization(const GridField& p);
  void apply(const GridField& d, GridField& out) const;
  int dim() const { return dim_; }

 private:
  const Stencil* st_;
  int dim_;
  std::vector<double> c_;
};

/// Applies the linearisation of det_h at p to delta (used by transport estimates).
GridField ma_linearization_apply(const GridField& p, const GridField& delta);

/// Solves J_p x = f (f zero mean) with the preconditioned Krylov iteration used by the solver.
GridField ma_linearization_solve(const GridField& p, const GridField& f, double rtol = 1e-10, int max_iter = 800);

/// Legendre-Fenchel transform on the torus; flips the kind flag.
ConvexPotential legendre_transform(const ConvexPotential& phi);

/// Centered-difference gradient of the periodic part plus b.
VectorField displacement(const ConvexPotential& P);

/// x -> grad Psi(x) at the nodes, wrapped to [0,1)^d.
std::vector<Point> gradient_map(const ConvexPotential& P);

/// v = perp(grad Psi(x) - x) for a dual potential; InvalidArgument otherwise.
VectorField dual_velocity(const ConvexPotential& P);

struct PolarFactorization {
  ConvexPotential psi;          // dual potential of the histogram
  ConvexPotential phi;          // its Legendre transform
  GridField density;            // smoothed histogram X_# dx
  std::vector<Point> grad_phi;  // nabla Phi at the nodes
  std::vector<Point> g;         // measure-preserving factor, grad Psi o X
  double uniformity_defect = 0.0;  // sup |histogram(g) - 1|
  double ma_residual = 0.0;
};

/// Cloud-in-cell histogram of the node images X(x_q), each carrying mass h^d.
GridField histogram(const std::vector<Point>& images, int dim, int n);

/// X = grad Phi o g with g measure-preserving. X is given at the nodes.
PolarFactorization polar_factorize(const std::vector<Point>& X, int dim, int n, const MAOptions& opt = {});

}  // namespace sglab
