#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <string>

#include "common.hpp"
#include "momentsieve/gaussian.hpp"

namespace momentsieve {
namespace gauss {

namespace {

std::string fmt(const char* label, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s = %.6e", label, v);
  return buf;
}

}  // namespace

MomentSequence gaussian1d_moments(double a, double b, double c, int degree) {
  if (!(a > 0.0)) throw InvalidInput("gaussian1d_moments: a must be positive");
  if (degree < 0) throw InvalidInput("gaussian1d_moments: negative degree");
  std::vector<double> s(degree + 1);
  s[0] = c * std::sqrt(2.0 * M_PI / a);
  if (degree >= 1) s[1] = b * s[0];
  for (int i = 1; i < degree; ++i) s[i + 1] = b * s[i] + (i / a) * s[i - 1];
  return MomentSequence::univariate(std::move(s));
}

MomentSequence gaussian1d_mixture_moments(const std::vector<Gaussian1D>& comps, int degree) {
  MomentSequence s(1, degree);
  for (const auto& g : comps) s = s + gaussian1d_moments(g.a, g.b, g.c, degree);
  return s;
}

Gaussian1DFit fit_single_gaussian_1d(const MomentSequence& s, const FitOptions& opts) {
  if (s.dim() != 1) throw Rejection("dimension mismatch", {"univariate moments required"});
  if (s.degree() < 2) throw InvalidInput("fit_single_gaussian_1d: need degree >= 2");
  const double s0 = s[0], s1 = s[1], s2 = s[2];
  if (std::abs(s0) <= 1e-300 || std::abs(s0) <= 1e-14 * s.norm())
    throw Rejection("zero total mass", {fmt("s0", s0)});
  const double den = s0 * s2 - s1 * s1;
  if (!(den > 0.0)) throw Rejection("non-positive variance", {fmt("s0*s2 - s1^2", den)});

  Gaussian1DFit out;
  out.g.a = s0 * s0 / den;
  out.g.b = s1 / s0;
  out.g.c = s0 * std::sqrt(out.g.a / (2.0 * M_PI));
  if (!(out.g.c > 0.0)) throw Rejection("non-positive mass", {fmt("c", out.g.c)});

  // (1, -ab, a) must annihilate (d s, s, M_1 s)_{k-1}.
  const int k = s.degree();
  Matrix M(k, 3);
  for (int i = 0; i < k; ++i) {
    M(i, 0) = i > 0 ? -i * s[i - 1] : 0.0;
    M(i, 1) = s[i];
    M(i, 2) = s[i + 1];
  }
  Vector v(3);
  v << 1.0, -out.g.a * out.g.b, out.g.a;
  out.membership_residual = detail::row_residual(M, v);
  if (out.membership_residual > opts.membership_tol)
    throw Rejection("kernel membership failed",
                    {fmt("row residual", out.membership_residual),
                     fmt("membership_tol", opts.membership_tol)});
  return out;
}

GaussianNDFit fit_single_gaussian_nd(const MomentSequence& s, const FitOptions& opts) {
  const std::size_t n = s.dim();
  if (s.degree() < 2) throw InvalidInput("fit_single_gaussian_nd: need degree >= 2");
  const int k = s.degree();
  const auto ni = static_cast<Eigen::Index>(n);
  const double s0 = s[0];
  if (std::abs(s0) <= 1e-300 || std::abs(s0) <= 1e-14 * s.norm())
    throw Rejection("zero total mass", {fmt("s0", s0)});

  std::vector<MomentSequence> shifted;
  for (std::size_t j = 0; j < n; ++j) shifted.push_back(shift(s, MultiIndex::unit(n, j)));

  Matrix A(ni, ni);
  Vector beta(ni);
  GaussianNDFit out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<MomentSequence> cols;
    cols.push_back(monomial_derivative(s, MultiIndex::unit(n, i)));
    cols.push_back(s);
    for (const auto& m : shifted) cols.push_back(m);
    Matrix small = columns_matrix(cols, 1);
    KernelResult ker = numerical_kernel(small, opts.kernel_tol);
    if (ker.dimension() != 1)
      throw Rejection("kernel membership failed",
                      {"axis " + std::to_string(i) + ": degree-1 kernel has dimension " +
                       std::to_string(ker.dimension())});
    Vector v = ker.basis.col(0);
    if (std::abs(v(0)) <= 1e-12 * v.norm())
      throw Rejection("kernel membership failed",
                      {"axis " + std::to_string(i) + ": kernel vector has no derivative term"});
    v /= v(0);
    Matrix big = columns_matrix(cols, k - 1);
    out.membership_residual = std::max(out.membership_residual, detail::row_residual(big, v));
    beta(static_cast<Eigen::Index>(i)) = -v(1);
    A.row(static_cast<Eigen::Index>(i)) = v.tail(ni).transpose();
  }
  if (out.membership_residual > opts.membership_tol)
    throw Rejection("kernel membership failed", {fmt("row residual", out.membership_residual),
                                                 fmt("membership_tol", opts.membership_tol)});
  out.asymmetry = (A - A.transpose()).norm() / A.norm();
  if (out.asymmetry > opts.sym_tol)
    throw Rejection("precision matrix not symmetric",
                    {fmt("asymmetry", out.asymmetry), fmt("sym_tol", opts.sym_tol)});
  A = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw Rejection("precision matrix not positive definite",
                    {fmt("min eigenvalue", es.eigenvalues().minCoeff())});
  out.g.A = A;
  out.g.b = A.llt().solve(beta);
  out.g.c = s0 * std::sqrt(A.determinant()) / std::pow(2.0 * M_PI, 0.5 * static_cast<double>(n));
  return out;
}

}  // namespace gauss
}  // namespace momentsieve
