#pragma once

#include <optional>
#include <string>
#include <vector>

#include "momentsieve/core.hpp"

// Every density in this header is c * exp(-(a/2) (x - b)^2), or its multivariate analogue
// c * exp(-(1/2) (x - b)^T A (x - b)).

namespace momentsieve {
namespace gauss {

inline constexpr const char* kConvention = "half-precision-exponent";

struct Gaussian1D {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
};

struct GaussianND {
  Matrix A;
  Vector b;
  double c = 1.0;
};

/// c exp(-(a/(2d)) (x - b)^{2d})
struct PowerGaussian {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
  int d = 1;
};

struct FitOptions {
  double membership_tol = 1e-9;  ///< Max row-normalised residual of kernel relations.
  double sym_tol = 1e-8;         ///< Relative asymmetry allowed in a recovered precision matrix.
  double fit_tol = 1e-9;         ///< Relative moment reproduction residual.
  double kernel_tol = 1e-9;      ///< Relative singular-value threshold for kernels.
};

/// s_0 = c sqrt(2 pi / a), s_{i+1} = b s_i + (i/a) s_{i-1}.
MomentSequence gaussian1d_moments(double a, double b, double c, int degree);
MomentSequence gaussian1d_mixture_moments(const std::vector<Gaussian1D>& comps, int degree);
/// Closed form through Gamma functions.
MomentSequence power_gaussian_moments(const PowerGaussian& g, int degree);

struct Gaussian1DFit {
  Gaussian1D g;
  double membership_residual = 0.0;
};
Gaussian1DFit fit_single_gaussian_1d(const MomentSequence& s, const FitOptions& opts = {});

struct GaussianNDFit {
  GaussianND g;
  double membership_residual = 0.0;
  double asymmetry = 0.0;
};
GaussianNDFit fit_single_gaussian_nd(const MomentSequence& s, const FitOptions& opts = {});

struct PowerGaussianFit {
  PowerGaussian g;
  double membership_residual = 0.0;
  double pattern_residual = 0.0;
  double low_order_residual = 0.0;
};
PowerGaussianFit fit_power_gaussian_1d(const MomentSequence& s, int d, const FitOptions& opts = {});

/// T(a)_{ij} = binom(i, j) m_{i-j}, m_l the central moments of exp(-(a/2) x^2).
Matrix transform_matrix_inverse(double a, int degree);
/// The inverse of T(a), also a binomial convolution matrix (closed form).
Matrix transform_matrix(double a, int degree);
/// Matrix of Delta_a from degree `degree` to degree `degree - 1`.
Matrix delta_a_matrix(double a, int degree);

/// det(s, Delta_a s, ..., Delta_a^k s)_k scaled by a^{k(k+1)/2}, a polynomial in a.
RealPolynomial variance_polynomial(const MomentSequence& s, int k);

struct MixtureCandidate {
  double a = 0.0;
  bool accepted = false;
  std::string verdict;
  double residual = 0.0;
  std::vector<double> b;
  std::vector<double> c;
};

struct MixtureOptions {
  double fit_tol = 1e-9;
  double kernel_tol = 1e-8;
  /// Among valid candidates prefer the first one with all weights positive.
  bool prefer_positive_weights = true;
};

struct EqualVarianceMixture {
  double a = 0.0;
  std::vector<double> b;
  std::vector<double> c;
  double residual = 0.0;
  RealPolynomial variance_poly;          ///< In standardised coordinates.
  double standardise_shift = 0.0;
  double standardise_scale = 1.0;
  std::vector<MixtureCandidate> candidates;  ///< In original coordinates.
};

EqualVarianceMixture fit_mixture_equal_variance(const MomentSequence& s, int k,
                                                const MixtureOptions& opts = {});

struct TwoMixtureOptions {
  double fit_tol = 1e-9;
  double kernel_tol = 1e-8;
  double collapse_tol = 1e-6;
};

struct TwoMixture {
  std::vector<Gaussian1D> components;  ///< One entry when the fit collapsed.
  bool degenerate = false;
  double residual = 0.0;
  std::string route;  ///< "single", "equal-precision" or "unequal-precision".
  std::vector<std::string> diagnostics;
};

/// Two-component mixture with possibly unequal precisions. Requires degree >= 9.
TwoMixture fit_two_mixture_1d(const MomentSequence& s, const TwoMixtureOptions& opts = {});

}  // namespace gauss
}  // namespace momentsieve
