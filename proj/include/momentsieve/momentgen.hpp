#pragma once

#include <cstdint>
#include <vector>

#include "momentsieve/core.hpp"
#include "momentsieve/gaussian.hpp"

namespace momentsieve {
namespace gen {

/// Nodes and weights; `exact_degree` is the largest polynomial degree integrated exactly.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int exact_degree = 0;
};

/// Gauss-Legendre on [lo, hi] by Golub-Welsch.
QuadratureRule gauss_legendre(int m, double lo = -1.0, double hi = 1.0);
/// Gauss-Hermite for the weight exp(-x^2 / 2) on the real line.
QuadratureRule gauss_hermite(int m);

MomentSequence atomic_moments(const std::vector<double>& x, const std::vector<double>& w,
                              int degree);
MomentSequence atomic_moments_nd(const std::vector<Vector>& points, const std::vector<double>& w,
                                 int degree);

struct Box {
  Vector lower;
  Vector upper;
  double coef = 1.0;
};

/// sum_j c_j prod_i (u_i^{alpha_i+1} - l_i^{alpha_i+1}) / (alpha_i + 1)
MomentSequence box_moments(const std::vector<Box>& boxes, int degree);

struct Simplex {
  std::vector<Vector> vertices;  ///< n+1 points in R^n
};

/// Triangulation of a convex polygon given by its vertices in boundary order.
std::vector<Simplex> fan_triangulation(const std::vector<Vector>& polygon);

/// Exact monomial moments of sum_j coefs[j] * chi_{simplices[j]}.
MomentSequence simplex_moments(const std::vector<Simplex>& simplices,
                               const std::vector<double>& coefs, int degree);

/// int <x, r>^j over the same simplicial complex, j = 0..jmax (univariate sequence).
MomentSequence polytope_directional_moments(const std::vector<Simplex>& simplices,
                                            const std::vector<double>& coefs, const Vector& r,
                                            int jmax);

/// Seeded arrangement of k boxes in R^n. Facet coordinates lie on a 1/100 grid in [lo, hi],
/// are distinct per axis with gaps >= min_gap, and coefficients have magnitude in [0.5, 2].
std::vector<Box> random_box_arrangement(std::size_t n, int k, double lo, double hi, double min_gap,
                                        std::uint64_t seed);

/// Seeded convex polygon with k vertices in boundary order, on a random ellipse.
std::vector<Vector> random_convex_polygon(int k, std::uint64_t seed);

/// Mixtures in the half-precision convention; the nD case uses whitened Gauss-Hermite.
MomentSequence gaussian_mixture_moments(const std::vector<gauss::Gaussian1D>& comps, int degree);
MomentSequence gaussian_nd_moments(const std::vector<gauss::GaussianND>& comps, int degree);

/// Moments of exp(p(x)) chi_G(x) on the box G = [lower, upper] by tensor Gauss-Legendre.
MomentSequence density_moments(const MultiPolynomial& p, const Vector& lower, const Vector& upper,
                               int degree, int nodes_per_axis = 64);

struct DerivativeCheck {
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

/// d s for chi_[lo,hi] against the moments of delta_lo - delta_hi.
DerivativeCheck interval_derivative_check(double lo, double hi, int degree);

/// d^l s for f = exp(-(alpha x - beta)^2) against the moments of h_l f,
/// h_l(x) = (-alpha)^l H_l(alpha x - beta).
DerivativeCheck gaussian_derivative_check(double alpha, double beta, int l, int degree);

}  // namespace gen
}  // namespace momentsieve
