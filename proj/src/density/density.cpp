#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>

#include "momentsieve/density.hpp"
#include "momentsieve/momentgen.hpp"

namespace momentsieve {
namespace density {

namespace {

std::string fmt(const char* label, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s = %.6e", label, v);
  return buf;
}

std::string index_str(const MultiIndex& a) {
  std::string out = "(";
  for (std::size_t i = 0; i < a.dim(); ++i) out += (i ? "," : "") + std::to_string(a[i]);
  return out + ")";
}

std::vector<MultiIndex> exponent_columns(std::size_t n, int d, std::size_t axis) {
  std::vector<MultiIndex> out;
  for (const auto& a : graded_indices(n, d))
    if (a[axis] >= 1) out.push_back(a);
  return out;
}

}  // namespace

int exponent_degree_bound(int d, int gamma, bool g_nonnegative) {
  return g_nonnegative ? 2 * d + gamma - 2 : 2 * d + 2 * gamma - 2;
}

Matrix exponent_matrix(const MomentSequence& s, const MultiPolynomial& g, int d, std::size_t axis) {
  const std::size_t n = s.dim();
  if (g.dim() != n) throw InvalidInput("exponent_matrix: g has the wrong dimension");
  if (axis >= n) throw InvalidInput("exponent_matrix: axis out of range");
  const int L = s.degree() - g.degree() - d + 1;
  if (L < 0) throw InvalidInput("exponent_matrix: sequence degree too small for any row");
  std::vector<MomentSequence> cols;
  cols.push_back(apply_poly_shift(monomial_derivative(s, MultiIndex::unit(n, axis)), g));
  for (const auto& a : exponent_columns(n, d, axis))
    cols.push_back(apply_poly_shift(shift(s, a - MultiIndex::unit(n, axis)), g));
  return columns_matrix(cols, L);
}

ExponentFit recover_exponent(const MomentSequence& s, const SemiAlgebraicSpec& spec, int d,
                             const ExponentOptions& opts) {
  if (d < 1) throw InvalidInput("recover_exponent: d >= 1 required");
  const std::size_t n = s.dim();
  if (spec.g.dim() != n) throw Rejection("dimension mismatch", {"g and the moments differ in dimension"});
  if (spec.g.terms().empty()) throw InvalidInput("recover_exponent: g must be nonzero");
  const int gamma = spec.g.degree();
  const int bound = exponent_degree_bound(d, gamma, spec.g_nonnegative);
  if (s.degree() < bound) {
    std::vector<std::string> diag{"degree " + std::to_string(s.degree()) + " below required " +
                                  std::to_string(bound)};
    if (spec.g_nonnegative)
      diag.push_back("g >= 0 bounds: 2d+deg g-2 = " + std::to_string(2 * d + gamma - 2) +
                     ", 2d+deg g-1 = " + std::to_string(2 * d + gamma - 1));
    throw Rejection("k too small or density not of this form", diag);
  }

  ExponentFit out;
  if (spec.g_nonnegative && s.degree() < 2 * d + gamma - 1)
    out.diagnostics.push_back("degree meets 2d+deg g-2 but not the stricter 2d+deg g-1");

  std::map<MultiIndex, std::vector<std::pair<std::size_t, double>>> found;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix M = exponent_matrix(s, spec.g, d, i);
    const KernelResult ker = equilibrated_kernel(M, opts.kernel_tol);
    out.kernel_dims.push_back(ker.dimension());
    const auto& sv = ker.singular_values;
    const Eigen::Index m = sv.size();
    out.singular_gaps.push_back(m >= 2 && M.rows() >= M.cols() ? sv(m - 2) / std::max(sv(m - 1), 1e-300)
                                                               : 0.0);
    const std::string ax = "axis " + std::to_string(i);
    if (ker.dimension() == 0)
      throw Rejection("k too small or density not of this form",
                      {ax + ": kernel is empty", fmt("kernel_tol", ker.tolerance_used)});
    if (ker.dimension() >= 2)
      throw Rejection("degenerate g or G",
                      {ax + ": kernel dimension " + std::to_string(ker.dimension())});
    Vector v = ker.basis.col(0);
    if (std::abs(v(0)) <= 1e-12 * v.norm())
      throw Rejection("k too small or density not of this form",
                      {ax + ": kernel vector does not involve the derivative column"});
    v /= v(0);
    const auto cols = exponent_columns(n, d, i);
    for (std::size_t j = 0; j < cols.size(); ++j)
      found[cols[j]].push_back({i, -v(static_cast<Eigen::Index>(j + 1)) / cols[j][i]});
  }

  out.p = MultiPolynomial(n);
  std::vector<std::string> disagreements;
  for (const auto& [alpha, vals] : found) {
    double mean = 0.0;
    for (const auto& pv : vals) mean += pv.second;
    mean /= static_cast<double>(vals.size());
    double spread = 0.0;
    for (const auto& pv : vals) spread = std::max(spread, std::abs(pv.second - mean));
    out.max_axis_disagreement = std::max(out.max_axis_disagreement, spread / (1.0 + std::abs(mean)));
    if (spread > opts.cons_tol * (1.0 + std::abs(mean))) {
      std::string line = "c" + index_str(alpha) + ":";
      for (const auto& pv : vals) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " axis %zu -> %.10g", pv.first, pv.second);
        line += buf;
      }
      disagreements.push_back(line);
    }
    out.p.add_term(alpha, mean);
  }
  if (!disagreements.empty()) throw Rejection("cross-axis disagreement", disagreements);
  return out;
}

Normalization normalize_constant(const MultiPolynomial& p_tail, const SemiAlgebraicSpec& spec,
                                 double s0, const NormalizeOptions& opts) {
  if (!(s0 > 0.0)) throw Rejection("non-positive mass", {fmt("s0", s0)});
  if (!spec.box_lower || !spec.box_upper)
    throw InvalidInput("normalize_constant: a box (or bounding box) is required");
  const Vector& lo = *spec.box_lower;
  const Vector& hi = *spec.box_upper;
  const auto n = static_cast<std::size_t>(lo.size());
  if (p_tail.dim() != n || static_cast<std::size_t>(hi.size()) != n)
    throw InvalidInput("normalize_constant: dimension mismatch");

  Normalization out;
  if (!spec.indicator) {
    out.method = "gauss-legendre";
    out.integral = gen::density_moments(p_tail, lo, hi, 0, opts.nodes_per_axis)[0];
  } else {
    out.method = "monte-carlo";
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double vol = 1.0;
    for (std::size_t i = 0; i < n; ++i) vol *= hi(static_cast<Eigen::Index>(i)) - lo(static_cast<Eigen::Index>(i));
    double sum = 0.0, sumsq = 0.0;
    long count = 0;
    Vector x(static_cast<Eigen::Index>(n));
    const long batch = 10000;
    while (count < opts.max_samples) {
      for (long b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          x(ii) = lo(ii) + (hi(ii) - lo(ii)) * u(rng);
        }
        const double f = spec.indicator(x) ? std::exp(p_tail(x)) : 0.0;
        sum += f;
        sumsq += f * f;
      }
      count += batch;
      const double mean = sum / count;
      const double var = std::max(0.0, sumsq / count - mean * mean);
      out.stderr_rel = mean > 0.0 ? std::sqrt(var / count) / mean : INFINITY;
      if (out.stderr_rel <= opts.target_stderr) break;
    }
    out.samples = count;
    out.integral = vol * sum / count;
  }
  if (!std::isfinite(out.integral) || !(out.integral > 0.0))
    throw Rejection("non-finite normalising integral", {fmt("integral", out.integral)});
  out.c0 = std::log(s0 / out.integral);
  return out;
}

}  // namespace density
}  // namespace momentsieve
