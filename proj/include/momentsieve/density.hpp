#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "momentsieve/core.hpp"

namespace momentsieve {
namespace density {

/// Support G with boundary inside Z(g). Either a box or an indicator with a bounding box.
struct SemiAlgebraicSpec {
  MultiPolynomial g;
  std::optional<Vector> box_lower, box_upper;     ///< G itself when no indicator is given.
  std::function<bool(const Vector&)> indicator;   ///< Optional; box_* is then a bounding box.
  bool g_nonnegative = false;                     ///< Caller asserts g >= 0 on G.
};

struct ExponentOptions {
  double kernel_tol = 1e-9;
  double cons_tol = 1e-7;  ///< Cross-axis agreement, scaled by 1 + |c|.
};

struct ExponentFit {
  MultiPolynomial p;  ///< No constant term.
  std::vector<int> kernel_dims;            ///< Per axis.
  std::vector<double> singular_gaps;       ///< Per axis, sigma_{last-1} / sigma_last of the equilibrated matrix.
  double max_axis_disagreement = 0.0;
  std::vector<std::string> diagnostics;
};

/// Columns g(M) d_i s, then g(M) M_{alpha - e_i} s for |alpha| <= d, alpha_i >= 1 in graded-lex order,
/// rows |beta| <= k - deg g - d + 1.
Matrix exponent_matrix(const MomentSequence& s, const MultiPolynomial& g, int d, std::size_t axis);

/// Required sequence degree: 2d + 2 deg g - 2, or 2d + deg g - 2 when g >= 0 on G.
int exponent_degree_bound(int d, int gamma, bool g_nonnegative);

ExponentFit recover_exponent(const MomentSequence& s, const SemiAlgebraicSpec& spec, int d,
                             const ExponentOptions& opts = {});

struct NormalizeOptions {
  int nodes_per_axis = 64;
  double target_stderr = 1e-3;  ///< Monte Carlo only, relative to the integral.
  std::uint64_t seed = 1;
  long max_samples = 4'000'000;
};

struct Normalization {
  double c0 = 0.0;
  double integral = 0.0;
  double stderr_rel = 0.0;  ///< Zero for tensor quadrature.
  long samples = 0;
  std::string method;       ///< "gauss-legendre" or "monte-carlo".
};

/// c_0 = log(s_0 / int_G exp(p_tail)).
Normalization normalize_constant(const MultiPolynomial& p_tail, const SemiAlgebraicSpec& spec,
                                 double s0, const NormalizeOptions& opts = {});

}  // namespace density
}  // namespace momentsieve
