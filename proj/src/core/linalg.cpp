#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "momentsieve/core.hpp"

namespace momentsieve {

double default_kernel_tolerance(const Matrix& m) {
  return static_cast<double>(std::max(m.rows(), m.cols())) * std::ldexp(1.0, -52) * 1e4;
}

KernelResult numerical_kernel(const Matrix& m, std::optional<double> tol) {
  KernelResult out;
  out.tolerance_used = tol.value_or(default_kernel_tolerance(m));
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0 || cols == 0) {
    out.basis = Matrix::Identity(cols, cols);
    out.singular_values = Vector(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const Vector& sv = out.singular_values;
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  if (smax > 0.0)
    while (rank < sv.size() && sv(rank) > out.tolerance_used * smax) ++rank;
  out.basis = svd.matrixV().rightCols(cols - rank);
  return out;
}

KernelResult equilibrated_kernel(const Matrix& m, std::optional<double> tol) {
  Vector r = m.rowwise().norm();
  Vector c = m.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = r(i) > 0 ? 1.0 / r(i) : 1.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = c(i) > 0 ? 1.0 / c(i) : 1.0;
  // Column pass after row pass keeps both roughly balanced for the sizes used here.
  Matrix scaled = r.asDiagonal() * m;
  Vector c2 = scaled.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < c2.size(); ++i) c2(i) = c2(i) > 0 ? 1.0 / c2(i) : 1.0;
  scaled = scaled * c2.asDiagonal();
  KernelResult k = numerical_kernel(scaled, tol);
  Matrix b = c2.asDiagonal() * k.basis;
  for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j).normalize();
  k.basis = b;
  return k;
}

RealPolynomial vieta_from_kernel(const Vector& v, double zero_tol) {
  if (v.size() < 1) throw InvalidInput("vieta_from_kernel: empty vector");
  const double last = v(v.size() - 1);
  if (std::abs(last) <= zero_tol * v.norm())
    throw InvalidInput("vieta_from_kernel: kernel vector is not monic (last entry ~ 0)");
  std::vector<double> c(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) c[i] = v(i) / last;
  c.back() = 1.0;
  return RealPolynomial(std::move(c));
}

std::vector<double> elementary_symmetric(const std::vector<double>& b) {
  std::vector<double> e(b.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j >= 1; --j) e[j] += b[i] * e[j - 1];
  return std::vector<double>(e.begin() + 1, e.end());
}

std::vector<Complex> poly_roots(const RealPolynomial& p) {
  const int k = p.degree();
  if (k <= 0) return {};
  const auto& c = p.coefficients();
  Matrix C = Matrix::Zero(k, k);
  for (int i = 1; i < k; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < k; ++i) C(i, k - 1) = -c[i] / c[k];
  Eigen::EigenSolver<Matrix> es(C, false);
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + k);
  const RealPolynomial dp = p.derivative();
  for (Complex& z : roots) {
    double best = std::abs(p(z));
    for (int it = 0; it < 20 && best > 0.0; ++it) {
      const Complex d = dp(z);
      if (d == 0.0) break;
      const Complex next = z - p(z) / d;
      const double val = std::abs(p(next));
      if (!(val < best)) break;
      z = next;
      best = val;
    }
  }
  return roots;
}

bool is_numerically_real(Complex z) { return std::abs(z.imag()) <= 1e-7 * (1.0 + std::abs(z.real())); }

std::vector<double> real_roots(const RealPolynomial& p) {
  std::vector<double> out;
  for (const Complex& z : poly_roots(p))
    if (is_numerically_real(z)) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

RealPolynomial hermite(int l) {
  if (l < 0) throw InvalidInput("hermite: negative order");
  RealPolynomial prev{1.0};
  if (l == 0) return prev;
  const RealPolynomial twox{0.0, 2.0};
  RealPolynomial cur = twox;
  for (int j = 1; j < l; ++j) {
    RealPolynomial next = twox * cur - (2.0 * j) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace momentsieve
