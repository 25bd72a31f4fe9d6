#include <cmath>
#include <string>

#include "momentsieve/core.hpp"

namespace momentsieve {

namespace {

double falling(const MultiIndex& alpha, const MultiIndex& beta) {
  double r = 1.0;
  for (std::size_t i = 0; i < alpha.dim(); ++i)
    for (int t = 0; t < beta[i]; ++t) r *= alpha[i] - t;
  return r;
}

void require_univariate(const MomentSequence& s, const char* op) {
  if (s.dim() != 1) throw InvalidInput(std::string(op) + " requires a univariate sequence");
}

}  // namespace

MomentSequence shift(const MomentSequence& s, const MultiIndex& beta) {
  if (beta.dim() != s.dim()) throw InvalidInput("shift: dimension mismatch");
  const int d = s.degree() - beta.order();
  if (d < 0)
    throw InvalidInput("shift: degree underflow (|beta| = " + std::to_string(beta.order()) +
                       " > degree " + std::to_string(s.degree()) + ")");
  MomentSequence r(s.dim(), d);
  const auto& idx = r.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) r[k] = s.at(idx[k] + beta);
  return r;
}

MomentSequence monomial_derivative(const MomentSequence& s, const MultiIndex& beta) {
  if (beta.dim() != s.dim()) throw InvalidInput("monomial_derivative: dimension mismatch");
  const double sign = beta.order() % 2 == 0 ? 1.0 : -1.0;
  MomentSequence r(s.dim(), s.degree());
  const auto& idx = r.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (!beta.divides(idx[k])) continue;
    r[k] = sign * falling(idx[k], beta) * s.at(idx[k] - beta);
  }
  return r;
}

Matrix monomial_derivative_matrix(std::size_t n, int degree, const MultiIndex& beta) {
  if (beta.dim() != n) throw InvalidInput("monomial_derivative_matrix: dimension mismatch");
  const auto& idx = graded_indices(n, degree);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Matrix D = Matrix::Zero(m, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const MultiIndex& a = idx[c];
    if (!beta.divides(a)) continue;
    D(static_cast<Eigen::Index>(graded_rank(a - beta, degree)), c) = falling(a, beta);
  }
  return D;
}

Vector basis_derivative(const Vector& s, const Matrix& D, int order, DerivativeSign sign) {
  if (D.rows() != s.size() || D.cols() != s.size())
    throw InvalidInput("basis_derivative: derivative matrix must be square of the basis size");
  if (order < 0) throw InvalidInput("basis_derivative: negative order");
  Vector r = D.transpose() * s;
  if (sign == DerivativeSign::Signed && order % 2 == 1) r = -r;
  return r;
}

MomentSequence apply_poly_shift(const MomentSequence& s, const MultiPolynomial& g) {
  if (g.dim() != s.dim()) throw InvalidInput("apply_poly_shift: dimension mismatch");
  const int gd = std::max(g.degree(), 0);
  const int d = s.degree() - gd;
  if (d < 0) throw InvalidInput("apply_poly_shift: degree underflow");
  MomentSequence r(s.dim(), d);
  const auto& idx = r.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    double acc = 0.0;
    for (const auto& [alpha, c] : g.terms()) acc += c * s.at(idx[k] + alpha);
    r[k] = acc;
  }
  return r;
}

MomentSequence delta_a(const MomentSequence& s, double a) {
  require_univariate(s, "delta_a");
  if (a == 0.0) throw InvalidInput("delta_a: a must be non-zero");
  if (s.degree() < 1) throw InvalidInput("delta_a: degree underflow");
  std::vector<double> r(s.degree());
  for (int i = 0; i < s.degree(); ++i)
    r[i] = s[i + 1] - (i > 0 ? (i / a) * s[i - 1] : 0.0);
  return MomentSequence::univariate(std::move(r));
}

Matrix hankel(const MomentSequence& s, int d) {
  require_univariate(s, "hankel");
  if (d < 0 || 2 * d > s.degree())
    throw InvalidInput("hankel: need degree >= " + std::to_string(2 * d));
  Matrix H(d + 1, d + 1);
  for (int i = 0; i <= d; ++i)
    for (int j = 0; j <= d; ++j) H(i, j) = s[i + j];
  return H;
}

Matrix hankel_nd(const MomentSequence& s, int d) {
  if (d < 0 || 2 * d > s.degree())
    throw InvalidInput("hankel_nd: need degree >= " + std::to_string(2 * d));
  const auto& idx = graded_indices(s.dim(), d);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Matrix H(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) H(i, j) = s.at(idx[i] + idx[j]);
  return H;
}

Matrix columns_matrix(const std::vector<MomentSequence>& seqs, int l) {
  if (seqs.empty()) throw InvalidInput("columns_matrix: no sequences");
  if (l < 0) throw InvalidInput("columns_matrix: negative row degree");
  const std::size_t n = seqs.front().dim();
  const auto rows = static_cast<Eigen::Index>(graded_count(n, l));
  Matrix M(rows, static_cast<Eigen::Index>(seqs.size()));
  for (std::size_t c = 0; c < seqs.size(); ++c) {
    if (seqs[c].dim() != n) throw InvalidInput("columns_matrix: dimension mismatch");
    if (seqs[c].degree() < l)
      throw InvalidInput("columns_matrix: column " + std::to_string(c) + " has degree " +
                         std::to_string(seqs[c].degree()) + " < " + std::to_string(l));
    for (Eigen::Index r = 0; r < rows; ++r) M(r, static_cast<Eigen::Index>(c)) = seqs[c][r];
  }
  return M;
}

}  // namespace momentsieve
