#pragma once

#include "momentsieve/core.hpp"

namespace momentsieve {
namespace gauss {
namespace detail {

/// Moments of (x - mu) / sigma.
MomentSequence affine_moments(const MomentSequence& s, double mu, double sigma);

struct Standardised {
  MomentSequence t;
  double mu = 0.0;
  double sigma = 1.0;
};

/// Zero mean, unit variance when s_0 > 0 and the variance is positive; identity otherwise.
Standardised standardise(const MomentSequence& s);

/// max_i |<row_i, v>| / (|row_i| |v|)
double row_residual(const Matrix& M, const Vector& v);

/// Relative Euclidean distance between two sequences.
double relative_residual(const MomentSequence& fitted, const MomentSequence& s);

}  // namespace detail
}  // namespace gauss
}  // namespace momentsieve
