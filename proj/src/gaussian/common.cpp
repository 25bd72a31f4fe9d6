#include "common.hpp"

#include <cmath>

namespace momentsieve {
namespace gauss {
namespace detail {

MomentSequence affine_moments(const MomentSequence& s, double mu, double sigma) {
  if (s.dim() != 1) throw InvalidInput("affine_moments: univariate only");
  std::vector<double> t(s.degree() + 1, 0.0);
  for (int m = 0; m <= s.degree(); ++m) {
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) acc += binomial(m, j) * s[j] * std::pow(-mu, m - j);
    t[m] = acc / std::pow(sigma, m);
  }
  return MomentSequence::univariate(std::move(t));
}

Standardised standardise(const MomentSequence& s) {
  Standardised out{s, 0.0, 1.0};
  if (s.degree() < 2 || !(s[0] > 0.0)) return out;
  const double mu = s[1] / s[0];
  const double var = s[2] / s[0] - mu * mu;
  if (!(var > 0.0)) return out;
  out.mu = mu;
  out.sigma = std::sqrt(var);
  out.t = affine_moments(s, out.mu, out.sigma);
  return out;
}

double row_residual(const Matrix& M, const Vector& v) {
  const double vn = v.norm();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double rn = M.row(i).norm();
    if (rn == 0.0) continue;
    worst = std::max(worst, std::abs(M.row(i).dot(v)) / (rn * vn));
  }
  return worst;
}

double relative_residual(const MomentSequence& fitted, const MomentSequence& s) {
  const double n = s.norm();
  return (fitted - s).norm() / (n > 0.0 ? n : 1.0);
}

}  // namespace detail
}  // namespace gauss
}  // namespace momentsieve
