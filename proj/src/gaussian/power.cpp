#include <cmath>
#include <cstdio>
#include <string>

#include "common.hpp"
#include "momentsieve/gaussian.hpp"

namespace momentsieve {
namespace gauss {

namespace {

// int y^j exp(-kappa y^p) dy over the real line, p even.
double central_power_moment(int j, double kappa, int p) {
  if (j % 2 == 1) return 0.0;
  const double e = (j + 1.0) / p;
  return 2.0 * std::tgamma(e) / (p * std::pow(kappa, e));
}

std::string fmt(const char* label, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s = %.6e", label, v);
  return buf;
}

}  // namespace

MomentSequence power_gaussian_moments(const PowerGaussian& g, int degree) {
  if (!(g.a > 0.0) || g.d < 1) throw InvalidInput("power_gaussian_moments: need a > 0, d >= 1");
  const int p = 2 * g.d;
  const double kappa = g.a / p;
  std::vector<double> s(degree + 1, 0.0);
  for (int m = 0; m <= degree; ++m) {
    double acc = 0.0;
    for (int j = 0; j <= m; j += 2)
      acc += binomial(m, j) * std::pow(g.b, m - j) * central_power_moment(j, kappa, p);
    s[m] = g.c * acc;
  }
  return MomentSequence::univariate(std::move(s));
}

PowerGaussianFit fit_power_gaussian_1d(const MomentSequence& s, int d, const FitOptions& opts) {
  if (s.dim() != 1) throw Rejection("dimension mismatch", {"univariate moments required"});
  if (d < 1) throw InvalidInput("fit_power_gaussian_1d: d must be >= 1");
  const int k = s.degree();
  if (k < 4 * d - 2)
    throw InvalidInput("fit_power_gaussian_1d: need degree >= " + std::to_string(4 * d - 2));
  const int q = 2 * d - 1;

  std::vector<MomentSequence> cols;
  cols.push_back(monomial_derivative(s, MultiIndex{1}));
  for (int j = 0; j <= q; ++j) cols.push_back(shift(s, MultiIndex{j}));
  Matrix M = columns_matrix(cols, k - q);
  KernelResult ker = equilibrated_kernel(M, opts.kernel_tol);
  if (ker.dimension() != 1)
    throw Rejection("kernel membership failed",
                    {"kernel dimension " + std::to_string(ker.dimension()) + " (expected 1)"});
  Vector v = ker.basis.col(0);
  if (std::abs(v(0)) <= 1e-12 * v.norm())
    throw Rejection("kernel membership failed", {"kernel vector has no derivative term"});
  v /= v(0);

  PowerGaussianFit out;
  out.membership_residual = detail::row_residual(M, v);
  const double a = v(q + 1);
  if (!(a > 0.0)) throw Rejection("non-positive precision", {fmt("a", a)});
  const double b = -v(q) / (a * q);

  Vector pattern(q + 2);
  pattern(0) = 1.0;
  for (int j = 0; j <= q; ++j) pattern(j + 1) = a * binomial(q, j) * std::pow(-b, q - j);
  out.pattern_residual = (pattern - v).norm() / v.norm();
  if (out.pattern_residual > 1e3 * opts.membership_tol)
    throw Rejection("kernel vector lacks the binomial pattern",
                    {fmt("pattern residual", out.pattern_residual)});

  out.g = PowerGaussian{a, b, 1.0, d};
  const double e = 1.0 / (2.0 * d);
  out.g.c = std::pow(a / (2.0 * d), e) * s[0] / (2.0 * std::tgamma(1.0 + e));

  // The kernel relation only fixes s from its first 2d-1 entries on.
  const MomentSequence fitted = power_gaussian_moments(out.g, 2 * d - 2);
  out.low_order_residual = detail::relative_residual(fitted, s.truncated(2 * d - 2));
  if (out.low_order_residual > opts.fit_tol)
    throw Rejection("low-order moments mismatch",
                    {fmt("relative residual", out.low_order_residual), fmt("fit_tol", opts.fit_tol)});
  return out;
}

}  // namespace gauss
}  // namespace momentsieve
