#pragma once

#include <optional>
#include <vector>

#include "momentsieve/core.hpp"

namespace momentsieve {
namespace atomic {

struct Atom {
  Complex position;
  Complex weight;
};

/// sum_i w_i delta_{x_i}; positions and weights may be complex (conjugate pairs).
struct SignedAtomicMeasure {
  std::vector<Atom> atoms;

  bool is_real(double tol = 1e-9) const;
  std::vector<double> real_positions() const;
  std::vector<double> real_weights() const;
  std::size_t size() const { return atoms.size(); }
};

struct GevOptions {
  /// Relative threshold on Hankel eigenvalues for the numerical rank.
  double rank_tol = 1e-11;
};

struct GevResult {
  std::vector<Complex> positions;
  int rank = 0;
  double scale = 1.0;                 ///< Variable scaling used internally.
  Vector hankel_eigenvalue_moduli;    ///< |eigenvalues| of the scaled H_k(s), descending.
};

/// Generalised eigenvalues of (H_k(M_1 s), H_k(s)) restricted to the numerical range of H_k(s).
/// Requires s.degree >= 2k+1. Returns rank(H_k(s)) positions.
GevResult recover_atoms_gev(const MomentSequence& s, int k, const GevOptions& opts = {});

/// Roots of the polynomial whose coefficients span ker H_k(s).
/// Throws Rejection if the kernel is empty or has dimension >= 2.
std::vector<Complex> recover_atoms_kernel(const MomentSequence& s, int k,
                                          std::optional<double> tol = std::nullopt);

struct WeightFit {
  std::vector<Complex> weights;
  double residual = 0.0;   ///< Relative residual of the scaled Vandermonde system.
  double condition = 0.0;  ///< 2-norm condition number of the scaled Vandermonde matrix.
};

/// Least-squares weights against every available moment.
WeightFit recover_weights(const MomentSequence& s, const std::vector<Complex>& positions);

struct AtomicFitOptions {
  double fit_tol = 1e-9;
  double rank_tol = 1e-11;
  double merge_tol = 1e-8;
  bool polish = true;
};

struct AtomicFit {
  SignedAtomicMeasure measure;
  int k = 0;
  double residual = 0.0;
  double condition = 0.0;
};

/// Smallest k <= k_max whose recovered atoms reproduce s within fit_tol.
AtomicFit recover_signed_atomic(const MomentSequence& s, int k_max,
                                const AtomicFitOptions& opts = {});

/// Moments of a (real-valued) signed atomic measure; conjugate pairs are allowed.
MomentSequence atomic_measure_moments(const SignedAtomicMeasure& m, int degree);

}  // namespace atomic
}  // namespace momentsieve
