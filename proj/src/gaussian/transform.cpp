#include <cmath>
#include <functional>
#include <map>

#include "momentsieve/gaussian.hpp"

namespace momentsieve {
namespace gauss {

namespace {

double double_factorial_odd(int l) {  // (l-1)!! for even l >= 0
  double r = 1.0;
  for (int t = l - 1; t > 1; t -= 2) r *= t;
  return r;
}

using PolyMatrix = std::vector<std::vector<RealPolynomial>>;

RealPolynomial cofactor_det(const PolyMatrix& m) {
  const int n = static_cast<int>(m.size());
  std::map<unsigned, RealPolynomial> memo;
  // det of the minor using rows in `mask` and the last popcount(mask) columns
  std::function<RealPolynomial(unsigned)> rec = [&](unsigned mask) -> RealPolynomial {
    const int size = __builtin_popcount(mask);
    if (size == 0) return RealPolynomial{1.0};
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    const int col = n - size;
    RealPolynomial acc;
    int sign = 1;
    for (int r = 0; r < n; ++r) {
      if (!(mask & (1u << r))) continue;
      if (!m[r][col].is_zero()) {
        RealPolynomial term = m[r][col] * rec(mask & ~(1u << r));
        acc = sign > 0 ? acc + term : acc - term;
      }
      sign = -sign;
    }
    memo.emplace(mask, acc);
    return acc;
  };
  return rec((1u << n) - 1);
}

RealPolynomial bareiss_det(PolyMatrix m) {
  const int n = static_cast<int>(m.size());
  RealPolynomial prev{1.0};
  double sign = 1.0;
  for (int k = 0; k < n - 1; ++k) {
    if (m[k][k].is_zero()) {
      int r = k + 1;
      while (r < n && m[r][k].is_zero()) ++r;
      if (r == n) return {};
      std::swap(m[k], m[r]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[i][j] = RealPolynomial::divide(m[k][k] * m[i][j] - m[i][k] * m[k][j], prev);
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

}  // namespace

Matrix transform_matrix_inverse(double a, int degree) {
  if (!(a > 0.0)) throw InvalidInput("transform matrix needs a > 0");
  const double m0 = std::sqrt(2.0 * M_PI / a);
  Matrix T = Matrix::Zero(degree + 1, degree + 1);
  for (int i = 0; i <= degree; ++i)
    for (int j = i; j >= 0; j -= 2) {
      const int l = i - j;
      T(i, j) = binomial(i, j) * double_factorial_odd(l) * std::pow(a, -0.5 * l) * m0;
    }
  return T;
}

Matrix transform_matrix(double a, int degree) {
  if (!(a > 0.0)) throw InvalidInput("transform matrix needs a > 0");
  const double m0 = std::sqrt(2.0 * M_PI / a);
  Matrix R = Matrix::Zero(degree + 1, degree + 1);
  for (int i = 0; i <= degree; ++i)
    for (int j = i; j >= 0; j -= 2) {
      const int l = i - j;
      const double sign = (l / 2) % 2 == 0 ? 1.0 : -1.0;
      R(i, j) = binomial(i, j) * sign * double_factorial_odd(l) * std::pow(a, -0.5 * l) / m0;
    }
  return R;
}

Matrix delta_a_matrix(double a, int degree) {
  if (a == 0.0) throw InvalidInput("delta_a_matrix: a must be non-zero");
  if (degree < 1) throw InvalidInput("delta_a_matrix: degree must be >= 1");
  Matrix D = Matrix::Zero(degree, degree + 1);
  for (int i = 0; i < degree; ++i) {
    D(i, i + 1) = 1.0;
    if (i > 0) D(i, i - 1) = -i / a;
  }
  return D;
}

RealPolynomial variance_polynomial(const MomentSequence& s, int k) {
  if (s.dim() != 1) throw InvalidInput("variance_polynomial: univariate only");
  if (k < 1) throw InvalidInput("variance_polynomial: k must be >= 1");
  if (s.degree() < 2 * k)
    throw InvalidInput("variance_polynomial: need degree >= " + std::to_string(2 * k));
  // Column j is a^j Delta_a^j s = (d + a M_1)^j s, polynomial in a.
  std::vector<std::vector<RealPolynomial>> cols;
  std::vector<RealPolynomial> cur;
  for (double v : s.values()) cur.push_back(RealPolynomial{v});
  cols.push_back(cur);
  const RealPolynomial x{0.0, 1.0};
  for (int j = 1; j <= k; ++j) {
    std::vector<RealPolynomial> next(cur.size() - 1);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      next[i] = x * cur[i + 1];
      if (i > 0) next[i] = next[i] - static_cast<double>(i) * cur[i - 1];
    }
    cols.push_back(next);
    cur = next;
  }
  PolyMatrix m(k + 1, std::vector<RealPolynomial>(k + 1));
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) m[i][j] = cols[j][i];
  return k <= 6 ? cofactor_det(m) : bareiss_det(m);
}

}  // namespace gauss
}  // namespace momentsieve
