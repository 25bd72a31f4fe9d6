#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <vector>

#include "momentsieve/errors.hpp"

namespace momentsieve {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Multi-index alpha in N^n.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t n) : e_(n, 0) {}
  MultiIndex(std::initializer_list<int> v) : e_(v) { check(); }
  explicit MultiIndex(std::vector<int> v) : e_(std::move(v)) { check(); }

  static MultiIndex unit(std::size_t n, std::size_t i);

  std::size_t dim() const { return e_.size(); }
  int order() const;
  int operator[](std::size_t i) const { return e_[i]; }
  int& operator[](std::size_t i) { return e_[i]; }
  const std::vector<int>& entries() const { return e_; }

  /// Componentwise alpha <= beta.
  bool divides(const MultiIndex& other) const;

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
  /// Requires b <= a componentwise.
  friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b);
  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.e_ == b.e_; }
  friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return a.e_ != b.e_; }
  /// Graded-lex order: by |alpha|, then larger leading entries first.
  friend bool operator<(const MultiIndex& a, const MultiIndex& b);

 private:
  void check() const;
  std::vector<int> e_;
};

/// All multi-indices of dimension n with |alpha| <= degree, in graded-lex order.
const std::vector<MultiIndex>& graded_indices(std::size_t n, int degree);

/// Number of multi-indices of dimension n with |alpha| <= degree.
std::size_t graded_count(std::size_t n, int degree);

/// Position of alpha in graded-lex order. Throws InvalidInput if |alpha| > degree.
std::size_t graded_rank(const MultiIndex& alpha, int degree);

/// Truncated moment sequence (s_alpha)_{|alpha| <= degree} stored in graded-lex order.
class MomentSequence {
 public:
  MomentSequence() = default;
  MomentSequence(std::size_t dim, int degree);
  MomentSequence(std::size_t dim, int degree, std::vector<double> values);

  /// Convenience for one-dimensional sequences s_0..s_d.
  static MomentSequence univariate(std::vector<double> values);

  std::size_t dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(const MultiIndex& alpha) const;
  double& at(const MultiIndex& alpha);

  const std::vector<double>& values() const { return values_; }
  const std::vector<MultiIndex>& indices() const { return graded_indices(dim_, degree_); }
  Vector vector() const;

  MomentSequence truncated(int degree) const;
  /// The axis subsequence (s_{l e_i})_{l <= degree} as a univariate sequence.
  MomentSequence axis(std::size_t i) const;

  double norm() const;

 private:
  std::size_t dim_ = 1;
  int degree_ = 0;
  std::vector<double> values_;
};

MomentSequence operator+(const MomentSequence& a, const MomentSequence& b);
MomentSequence operator-(const MomentSequence& a, const MomentSequence& b);
MomentSequence operator*(double c, const MomentSequence& a);

/// Univariate polynomial, coefficients in ascending powers. The zero polynomial is empty.
class RealPolynomial {
 public:
  RealPolynomial() = default;
  RealPolynomial(std::initializer_list<double> c) : c_(c) { trim(); }
  explicit RealPolynomial(std::vector<double> c) : c_(std::move(c)) { trim(); }

  static RealPolynomial monomial(int power, double coef = 1.0);

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  double coef(int i) const { return i >= 0 && i < static_cast<int>(c_.size()) ? c_[i] : 0.0; }
  const std::vector<double>& coefficients() const { return c_; }

  double operator()(double x) const;
  Complex operator()(Complex x) const;
  RealPolynomial derivative() const;

  friend RealPolynomial operator+(const RealPolynomial& a, const RealPolynomial& b);
  friend RealPolynomial operator-(const RealPolynomial& a, const RealPolynomial& b);
  friend RealPolynomial operator*(const RealPolynomial& a, const RealPolynomial& b);
  friend RealPolynomial operator*(double s, const RealPolynomial& a);
  friend bool operator==(const RealPolynomial& a, const RealPolynomial& b) { return a.c_ == b.c_; }

  /// Exact-division quotient a / b, remainder discarded.
  static RealPolynomial divide(const RealPolynomial& a, const RealPolynomial& b);

 private:
  void trim();
  std::vector<double> c_;
};

/// Multivariate polynomial sum_alpha g_alpha x^alpha. Zero coefficients are never stored.
class MultiPolynomial {
 public:
  explicit MultiPolynomial(std::size_t dim = 1) : dim_(dim) {}

  static MultiPolynomial constant(std::size_t dim, double c);
  static MultiPolynomial variable(std::size_t dim, std::size_t i);

  std::size_t dim() const { return dim_; }
  int degree() const;
  void add_term(const MultiIndex& alpha, double coef);
  double coef(const MultiIndex& alpha) const;
  const std::map<MultiIndex, double>& terms() const { return terms_; }

  double operator()(const Vector& x) const;

  friend MultiPolynomial operator+(const MultiPolynomial& a, const MultiPolynomial& b);
  friend MultiPolynomial operator-(const MultiPolynomial& a, const MultiPolynomial& b);
  friend MultiPolynomial operator*(const MultiPolynomial& a, const MultiPolynomial& b);
  friend MultiPolynomial operator*(double s, const MultiPolynomial& a);

 private:
  std::size_t dim_;
  std::map<MultiIndex, double> terms_;
};

struct KernelResult {
  Matrix basis;            ///< Orthonormal columns spanning the numerical kernel.
  Vector singular_values;  ///< Descending.
  double tolerance_used = 0.0;
  int dimension() const { return static_cast<int>(basis.cols()); }
};

// ---- combinatorics -------------------------------------------------------

double factorial(int n);
double binomial(int n, int k);
/// prod_i binom(alpha_i, beta_i); zero unless beta <= alpha.
double binomial(const MultiIndex& alpha, const MultiIndex& beta);
/// prod_i alpha_i!
double factorial(const MultiIndex& alpha);

// ---- operators on moment sequences ---------------------------------------

/// (M_beta s)_alpha = s_{alpha+beta}; degree drops by |beta|.
MomentSequence shift(const MomentSequence& s, const MultiIndex& beta);

/// Moments of the distributional derivative:
/// (d^beta s)_alpha = (-1)^{|beta|} alpha!/(alpha-beta)! s_{alpha-beta}, zero unless beta <= alpha.
MomentSequence monomial_derivative(const MomentSequence& s, const MultiIndex& beta);

/// Matrix D of d^beta acting on the monomial basis (column alpha holds the coefficients of
/// d^beta x^alpha). basis_derivative(s, D, |beta|) reproduces monomial_derivative.
Matrix monomial_derivative_matrix(std::size_t n, int degree, const MultiIndex& beta);

enum class DerivativeSign { Signed, Raw };

/// Derivative of a moment vector for an arbitrary finite basis whose derivative matrix D has
/// columns d(a_i) = sum_j D(j,i) a_j. Signed returns (-1)^order D^T s, Raw returns D^T s.
Vector basis_derivative(const Vector& s, const Matrix& D, int order,
                        DerivativeSign sign = DerivativeSign::Signed);

/// g(M) s = sum_alpha g_alpha M_alpha s, degree s.degree - deg g.
MomentSequence apply_poly_shift(const MomentSequence& s, const MultiPolynomial& g);

/// (Delta_a s)_i = s_{i+1} - (i/a) s_{i-1}; univariate, degree drops by one.
MomentSequence delta_a(const MomentSequence& s, double a);

/// Univariate Hankel matrix H_d(s)_{ij} = s_{i+j}, size (d+1)x(d+1).
Matrix hankel(const MomentSequence& s, int d);

/// Multivariate moment matrix (s_{alpha+beta}) for |alpha|,|beta| <= d.
Matrix hankel_nd(const MomentSequence& s, int d);

/// Matrix with one column per sequence, rows alpha with |alpha| <= l.
Matrix columns_matrix(const std::vector<MomentSequence>& seqs, int l);

// ---- linear algebra ------------------------------------------------------

/// max(rows, cols) * 2^-52 * 1e4
double default_kernel_tolerance(const Matrix& m);

/// Right singular vectors with sigma_i <= tol * sigma_max (all of them if sigma_max == 0).
KernelResult numerical_kernel(const Matrix& m, std::optional<double> tol = std::nullopt);

/// Kernel of the row/column equilibrated matrix, mapped back to original coordinates.
/// Columns of `basis` are unit-norm but not orthogonal in general.
KernelResult equilibrated_kernel(const Matrix& m, std::optional<double> tol = std::nullopt);

/// Polynomial x^k + v_{k-1} x^{k-1} + ... whose ascending coefficients are v / v_last.
RealPolynomial vieta_from_kernel(const Vector& v, double zero_tol = 1e-12);

/// (sigma_1, ..., sigma_k) of the given values.
std::vector<double> elementary_symmetric(const std::vector<double>& b);

/// Companion-matrix roots followed by at most 20 Newton steps.
std::vector<Complex> poly_roots(const RealPolynomial& p);

/// |Im z| <= 1e-7 (1 + |Re z|)
bool is_numerically_real(Complex z);

/// Real roots of p sorted ascending.
std::vector<double> real_roots(const RealPolynomial& p);

/// Physicists' Hermite polynomial by three-term recurrence.
RealPolynomial hermite(int l);

}  // namespace momentsieve
