#include <algorithm>
#include <cmath>

#include "momentsieve/core.hpp"

namespace momentsieve {

void RealPolynomial::trim() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

RealPolynomial RealPolynomial::monomial(int power, double coef) {
  if (power < 0) throw InvalidInput("negative monomial power");
  std::vector<double> c(power + 1, 0.0);
  c[power] = coef;
  return RealPolynomial(std::move(c));
}

double RealPolynomial::operator()(double x) const {
  double r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
  return r;
}

Complex RealPolynomial::operator()(Complex x) const {
  Complex r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
  return r;
}

RealPolynomial RealPolynomial::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
  return RealPolynomial(std::move(d));
}

RealPolynomial operator+(const RealPolynomial& a, const RealPolynomial& b) {
  std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
  return RealPolynomial(std::move(r));
}

RealPolynomial operator-(const RealPolynomial& a, const RealPolynomial& b) {
  return a + (-1.0) * b;
}

RealPolynomial operator*(const RealPolynomial& a, const RealPolynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  return RealPolynomial(std::move(r));
}

RealPolynomial operator*(double s, const RealPolynomial& a) {
  std::vector<double> r = a.c_;
  for (double& v : r) v *= s;
  return RealPolynomial(std::move(r));
}

RealPolynomial RealPolynomial::divide(const RealPolynomial& a, const RealPolynomial& b) {
  if (b.is_zero()) throw InvalidInput("polynomial division by zero");
  if (a.degree() < b.degree()) return {};
  std::vector<double> rem = a.c_;
  const int db = b.degree();
  std::vector<double> q(a.degree() - db + 1, 0.0);
  for (int i = a.degree() - db; i >= 0; --i) {
    const double t = rem[i + db] / b.c_[db];
    q[i] = t;
    for (int j = 0; j <= db; ++j) rem[i + j] -= t * b.c_[j];
  }
  return RealPolynomial(std::move(q));
}

MultiPolynomial MultiPolynomial::constant(std::size_t dim, double c) {
  MultiPolynomial p(dim);
  p.add_term(MultiIndex(dim), c);
  return p;
}

MultiPolynomial MultiPolynomial::variable(std::size_t dim, std::size_t i) {
  MultiPolynomial p(dim);
  p.add_term(MultiIndex::unit(dim, i), 1.0);
  return p;
}

int MultiPolynomial::degree() const {
  int d = -1;
  for (const auto& [a, c] : terms_) d = std::max(d, a.order());
  return d;
}

void MultiPolynomial::add_term(const MultiIndex& alpha, double coef) {
  if (alpha.dim() != dim_) throw InvalidInput("term dimension mismatch");
  if (coef == 0.0) return;
  auto it = terms_.find(alpha);
  if (it == terms_.end()) {
    terms_.emplace(alpha, coef);
    return;
  }
  it->second += coef;
  if (it->second == 0.0) terms_.erase(it);
}

double MultiPolynomial::coef(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

double MultiPolynomial::operator()(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw InvalidInput("point dimension mismatch");
  double r = 0.0;
  for (const auto& [a, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < dim_; ++i) t *= std::pow(x[i], a[i]);
    r += t;
  }
  return r;
}

MultiPolynomial operator+(const MultiPolynomial& a, const MultiPolynomial& b) {
  if (a.dim_ != b.dim_) throw InvalidInput("polynomial dimension mismatch");
  MultiPolynomial r = a;
  for (const auto& [al, c] : b.terms_) r.add_term(al, c);
  return r;
}

MultiPolynomial operator-(const MultiPolynomial& a, const MultiPolynomial& b) {
  return a + (-1.0) * b;
}

MultiPolynomial operator*(const MultiPolynomial& a, const MultiPolynomial& b) {
  if (a.dim_ != b.dim_) throw InvalidInput("polynomial dimension mismatch");
  MultiPolynomial r(a.dim_);
  for (const auto& [x, cx] : a.terms_)
    for (const auto& [y, cy] : b.terms_) r.add_term(x + y, cx * cy);
  return r;
}

MultiPolynomial operator*(double s, const MultiPolynomial& a) {
  MultiPolynomial r(a.dim_);
  if (s == 0.0) return r;
  for (const auto& [al, c] : a.terms_) r.add_term(al, s * c);
  return r;
}

}  // namespace momentsieve
