#include <cmath>
#include <string>

#include "momentsieve/core.hpp"

namespace momentsieve {

MomentSequence::MomentSequence(std::size_t dim, int degree)
    : dim_(dim), degree_(degree), values_(graded_count(dim, degree), 0.0) {
  if (dim == 0) throw InvalidInput("dimension must be positive");
  if (degree < 0) throw InvalidInput("degree must be non-negative");
}

MomentSequence::MomentSequence(std::size_t dim, int degree, std::vector<double> values)
    : dim_(dim), degree_(degree), values_(std::move(values)) {
  if (dim == 0) throw InvalidInput("dimension must be positive");
  if (degree < 0) throw InvalidInput("degree must be non-negative");
  if (values_.size() != graded_count(dim, degree))
    throw InvalidInput("moment sequence of dimension " + std::to_string(dim) + " and degree " +
                       std::to_string(degree) + " needs " +
                       std::to_string(graded_count(dim, degree)) + " values, got " +
                       std::to_string(values_.size()));
}

MomentSequence MomentSequence::univariate(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("empty moment sequence");
  const int d = static_cast<int>(values.size()) - 1;
  return MomentSequence(1, d, std::move(values));
}

double MomentSequence::at(const MultiIndex& alpha) const {
  if (alpha.dim() != dim_) throw InvalidInput("multi-index dimension mismatch");
  return values_[graded_rank(alpha, degree_)];
}

double& MomentSequence::at(const MultiIndex& alpha) {
  if (alpha.dim() != dim_) throw InvalidInput("multi-index dimension mismatch");
  return values_[graded_rank(alpha, degree_)];
}

Vector MomentSequence::vector() const {
  return Eigen::Map<const Vector>(values_.data(), static_cast<Eigen::Index>(values_.size()));
}

MomentSequence MomentSequence::truncated(int degree) const {
  if (degree > degree_) throw InvalidInput("cannot truncate to a higher degree");
  std::vector<double> v(values_.begin(), values_.begin() + graded_count(dim_, degree));
  return MomentSequence(dim_, degree, std::move(v));
}

MomentSequence MomentSequence::axis(std::size_t i) const {
  if (i >= dim_) throw InvalidInput("axis out of range");
  std::vector<double> v(degree_ + 1);
  MultiIndex a(dim_);
  for (int l = 0; l <= degree_; ++l) {
    a[i] = l;
    v[l] = at(a);
  }
  return univariate(std::move(v));
}

double MomentSequence::norm() const {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return std::sqrt(acc);
}

namespace {
void same_shape(const MomentSequence& a, const MomentSequence& b) {
  if (a.dim() != b.dim() || a.degree() != b.degree())
    throw InvalidInput("moment sequences differ in dimension or degree");
}
}  // namespace

MomentSequence operator+(const MomentSequence& a, const MomentSequence& b) {
  same_shape(a, b);
  MomentSequence r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

MomentSequence operator-(const MomentSequence& a, const MomentSequence& b) {
  same_shape(a, b);
  MomentSequence r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

MomentSequence operator*(double c, const MomentSequence& a) {
  MomentSequence r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= c;
  return r;
}

}  // namespace momentsieve
