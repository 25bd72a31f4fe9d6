#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "common.hpp"
#include "momentsieve/gaussian.hpp"

namespace momentsieve {
namespace gauss {

namespace {

const char* kNoMixture = "no k-Gaussian mixture with equal variance";

// Least-squares weights for fixed (a, b_j) against every moment of t.
std::vector<double> solve_weights(const MomentSequence& t, double a, const std::vector<double>& b,
                                  double& residual) {
  const int d = t.degree();
  Matrix T(d + 1, static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j)
    T.col(static_cast<Eigen::Index>(j)) = gaussian1d_moments(a, b[j], 1.0, d).vector();
  const Vector rhs = t.vector();
  Vector c = T.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  residual = (T * c - rhs).norm() / rhs.norm();
  return std::vector<double>(c.data(), c.data() + c.size());
}

MixtureCandidate evaluate(const MomentSequence& t, int k, double a, const MixtureOptions& opts) {
  MixtureCandidate cand;
  cand.a = a;
  const int d = t.degree();
  std::vector<MomentSequence> cols{t};
  for (int j = 1; j <= k; ++j) cols.push_back(delta_a(cols.back(), a));
  Matrix M = columns_matrix(cols, d - k);
  KernelResult ker = equilibrated_kernel(M, opts.kernel_tol);
  if (ker.dimension() != 1) {
    cand.verdict = "kernel dimension " + std::to_string(ker.dimension());
    return cand;
  }
  RealPolynomial p;
  try {
    p = vieta_from_kernel(ker.basis.col(0), 1e-10);
  } catch (const InvalidInput&) {
    cand.verdict = "kernel vector not monic";
    return cand;
  }
  std::vector<Complex> roots = poly_roots(p);
  std::vector<double> b;
  for (const auto& z : roots) {
    if (!is_numerically_real(z)) {
      cand.verdict = "complex location";
      return cand;
    }
    b.push_back(z.real());
  }
  std::sort(b.begin(), b.end());
  double span = 0.0;
  for (double v : b) span = std::max(span, std::abs(v));
  for (std::size_t i = 1; i < b.size(); ++i)
    if (b[i] - b[i - 1] <= 1e-6 * (1.0 + span)) {
      cand.verdict = "repeated location";
      return cand;
    }
  cand.b = b;
  cand.c = solve_weights(t, a, b, cand.residual);
  if (cand.residual > opts.fit_tol) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "residual %.3e > fit_tol %.3e", cand.residual, opts.fit_tol);
    cand.verdict = buf;
    return cand;
  }
  cand.accepted = true;
  cand.verdict = "valid";
  return cand;
}

}  // namespace

EqualVarianceMixture fit_mixture_equal_variance(const MomentSequence& s, int k,
                                                const MixtureOptions& opts) {
  if (s.dim() != 1) throw Rejection("dimension mismatch", {"univariate moments required"});
  if (k < 1) throw InvalidInput("fit_mixture_equal_variance: k must be >= 1");
  if (s.degree() < 2 * k)
    throw InvalidInput("fit_mixture_equal_variance: need degree >= " + std::to_string(2 * k));

  const auto st = detail::standardise(s);
  EqualVarianceMixture out;
  out.standardise_shift = st.mu;
  out.standardise_scale = st.sigma;
  out.variance_poly = variance_polynomial(st.t, k);

  std::vector<double> roots;
  for (double r : real_roots(out.variance_poly))
    if (r > 0.0) roots.push_back(r);
  if (roots.empty()) throw Rejection(kNoMixture, {"variance polynomial has no positive real root"});

  const double sig = st.sigma;
  auto to_original = [&](MixtureCandidate c) {
    c.a /= sig * sig;
    for (double& v : c.b) v = st.mu + sig * v;
    for (double& v : c.c) v /= sig;
    return c;
  };

  int chosen = -1;
  for (double a : roots) {
    MixtureCandidate c = evaluate(st.t, k, a, opts);
    out.candidates.push_back(to_original(c));
    if (!c.accepted) continue;
    const bool positive = std::all_of(c.c.begin(), c.c.end(), [](double v) { return v > 0.0; });
    const int idx = static_cast<int>(out.candidates.size()) - 1;
    if (!opts.prefer_positive_weights) {
      chosen = idx;
      break;
    }
    if (positive) {
      chosen = idx;
      break;
    }
    if (chosen < 0) chosen = idx;
  }
  for (std::size_t i = 0; i < out.candidates.size(); ++i)
    out.candidates[i].accepted = static_cast<int>(i) == chosen;

  if (chosen < 0) {
    std::vector<std::string> diag;
    for (const auto& c : out.candidates) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "a = %.10g: ", c.a);
      diag.push_back(buf + c.verdict);
    }
    throw Rejection(kNoMixture, diag);
  }
  const auto& best = out.candidates[chosen];
  out.a = best.a;
  out.b = best.b;
  out.c = best.c;
  out.residual = best.residual;
  return out;
}

}  // namespace gauss
}  // namespace momentsieve
