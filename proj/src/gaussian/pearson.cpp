#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "common.hpp"
#include "momentsieve/gaussian.hpp"

// Two-component fits through polynomial-coefficient differential relations
//     sum_{p,q} v_{pq} x^p d^q F = 0
// evaluated on moments as columns M_p d^q s.

namespace momentsieve {
namespace gauss {

namespace {

struct Term {
  int p, q;
};
// 1, x, d, x^2, x d, d^2, x^3, x^2 d, x d^2
constexpr std::array<Term, 9> kTerms{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2},
                                      {3, 0}, {2, 1}, {1, 2}}};
enum : int { T00, T10, T01, T20, T11, T02, T30, T21, T12 };

std::string fmt(const char* label, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s = %.6e", label, v);
  return buf;
}

Matrix relation_matrix(const MomentSequence& t, int nterms) {
  int maxp = 0;
  for (int i = 0; i < nterms; ++i) maxp = std::max(maxp, kTerms[i].p);
  std::vector<MomentSequence> cols;
  for (int i = 0; i < nterms; ++i)
    cols.push_back(shift(monomial_derivative(t, MultiIndex{kTerms[i].q}), MultiIndex{kTerms[i].p}));
  return columns_matrix(cols, t.degree() - maxp);
}

// Right singular vectors of the equilibrated matrix, mapped back, smallest first.
Matrix smallest_directions(const Matrix& M, int count, Vector& sv) {
  Vector r = M.rowwise().norm();
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = r(i) > 0 ? 1.0 / r(i) : 1.0;
  Matrix S = r.asDiagonal() * M;
  Vector c = S.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = c(i) > 0 ? 1.0 / c(i) : 1.0;
  S = S * c.asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeFullV);
  sv = svd.singularValues();
  const Eigen::Index n = M.cols();
  Matrix out(n, count);
  for (int i = 0; i < count; ++i) {
    out.col(i) = c.asDiagonal() * svd.matrixV().col(n - 1 - i);
    out.col(i).normalize();
  }
  return out;
}

struct Candidate {
  std::vector<Gaussian1D> comps;  // standardised coordinates
  double residual = 1e300;
  std::string note;
  bool ok = false;
};

void finish(const MomentSequence& t, Candidate& cand, const TwoMixtureOptions& opts) {
  const int d = t.degree();
  Matrix T(d + 1, static_cast<Eigen::Index>(cand.comps.size()));
  for (std::size_t j = 0; j < cand.comps.size(); ++j)
    T.col(static_cast<Eigen::Index>(j)) =
        gaussian1d_moments(cand.comps[j].a, cand.comps[j].b, 1.0, d).vector();
  const Vector rhs = t.vector();
  Vector c = T.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  for (std::size_t j = 0; j < cand.comps.size(); ++j) cand.comps[j].c = c(static_cast<Eigen::Index>(j));
  cand.residual = (T * c - rhs).norm() / rhs.norm();
  cand.ok = cand.residual <= opts.fit_tol;
  if (!cand.ok) cand.note = fmt("residual", cand.residual);
}

Candidate equal_precision_route(const MomentSequence& t, const TwoMixtureOptions& opts) {
  Candidate cand;
  Matrix M = relation_matrix(t, 6);
  KernelResult ker = equilibrated_kernel(M, opts.kernel_tol);
  if (ker.dimension() != 1) {
    cand.note = "six-term kernel dimension " + std::to_string(ker.dimension());
    return cand;
  }
  Vector v = ker.basis.col(0);
  if (std::abs(v(T02)) <= 1e-12) {
    cand.note = "six-term kernel has no second-derivative term";
    return cand;
  }
  v /= v(T02);
  const double a = v(T11) / 2.0;
  if (!(a > 0.0)) {
    cand.note = fmt("six-term precision", a);
    return cand;
  }
  const double s1 = -v(T01) / a;
  const double s2 = (v(T00) - a) / (a * a);
  const double disc = s1 * s1 - 4.0 * s2;
  if (!(disc > 0.0)) {
    cand.note = "six-term locations not real and distinct";
    return cand;
  }
  const double q = std::sqrt(disc);
  cand.comps = {{a, 0.5 * (s1 - q), 1.0}, {a, 0.5 * (s1 + q), 1.0}};
  finish(t, cand, opts);
  return cand;
}

// Per-component consistency of a nine-term relation. For each root a of
// v12 a^2 - v21 a + v30 the y^2 coefficient fixes b; the y^1 and y^0 coefficients must vanish.
double nine_term_defect(const Vector& v, std::array<Complex, 2>& a, std::array<Complex, 2>& b) {
  const Complex A = v(T12), B = -v(T21), C = v(T30);
  if (std::abs(A) < 1e-300) return 1e300;
  const Complex disc = std::sqrt(B * B - 4.0 * A * C);
  a = {(-B - disc) / (2.0 * A), (-B + disc) / (2.0 * A)};
  double acc = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Complex x = a[i];
    const Complex den = v(T12) * x * x - 2.0 * x * v(T21) + 3.0 * v(T30);
    if (std::abs(den) < 1e-300) return 1e300;
    const Complex y = -(v(T02) * x * x - x * v(T11) + v(T20)) / den;
    b[i] = y;
    const Complex e1 = -x * v(T12) - x * (v(T01) + v(T11) * y + v(T21) * y * y) + v(T10) +
                       2.0 * v(T20) * y + 3.0 * v(T30) * y * y;
    const Complex e0 = -x * (v(T02) + v(T12) * y) + v(T00) + v(T10) * y + v(T20) * y * y +
                       v(T30) * y * y * y;
    acc += std::norm(e1) + std::norm(e0);
  }
  return std::sqrt(acc) / v.norm();
}

Candidate unequal_precision_route(const MomentSequence& t, const TwoMixtureOptions& opts) {
  Candidate cand;
  Matrix M = relation_matrix(t, 9);
  Vector sv;
  Matrix U = smallest_directions(M, 2, sv);
  const Vector u = U.col(0), w = U.col(1);
  auto direction = [&](double th) -> Vector { return std::cos(th) * u + std::sin(th) * w; };
  std::array<Complex, 2> a, b;
  auto f = [&](double th) {
    Vector v = direction(th);
    return nine_term_defect(v, a, b);
  };

  // The relation lies in the span of the two weakest directions; scan the pencil, then refine.
  const int N = 1440;
  std::vector<double> vals(N);
  for (int i = 0; i < N; ++i) vals[i] = f(M_PI * i / N);
  std::vector<int> minima;
  for (int i = 0; i < N; ++i)
    if (vals[i] <= vals[(i + N - 1) % N] && vals[i] <= vals[(i + 1) % N]) minima.push_back(i);
  std::sort(minima.begin(), minima.end(), [&](int x, int y) { return vals[x] < vals[y]; });
  if (minima.size() > 8) minima.resize(8);

  double best_th = 0.0, best_val = 1e300;
  const double h = M_PI / N;
  for (int i : minima) {
    double lo = M_PI * i / N - h, hi = M_PI * i / N + h;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 120; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = f(x2);
      }
    }
    const double th = 0.5 * (lo + hi);
    const double val = f(th);
    if (val < best_val) {
      best_val = val;
      best_th = th;
    }
  }
  f(best_th);
  for (int i = 0; i < 2; ++i) {
    if (!is_numerically_real(a[i]) || !is_numerically_real(b[i]) || !(a[i].real() > 0.0)) {
      cand.note = "nine-term relation gives non-real or non-positive parameters";
      return cand;
    }
  }
  cand.comps = {{a[0].real(), b[0].real(), 1.0}, {a[1].real(), b[1].real(), 1.0}};
  if (cand.comps[0].b > cand.comps[1].b) std::swap(cand.comps[0], cand.comps[1]);
  finish(t, cand, opts);
  if (!cand.ok) cand.note += "; " + fmt("relation defect", best_val);
  return cand;
}

}  // namespace

TwoMixture fit_two_mixture_1d(const MomentSequence& s, const TwoMixtureOptions& opts) {
  if (s.dim() != 1) throw Rejection("dimension mismatch", {"univariate moments required"});
  if (s.degree() < 9) throw InvalidInput("fit_two_mixture_1d: need degree >= 9");

  TwoMixture out;
  try {
    auto single = fit_single_gaussian_1d(s);
    out.components = {single.g};
    out.degenerate = true;
    out.route = "single";
    out.residual = single.membership_residual;
    return out;
  } catch (const Rejection& r) {
    out.diagnostics.push_back("single: " + r.reason());
  }

  const auto st = detail::standardise(s);
  Candidate eq = equal_precision_route(st.t, opts);
  Candidate uq = unequal_precision_route(st.t, opts);
  out.diagnostics.push_back("equal-precision: " + (eq.ok ? fmt("residual", eq.residual) : eq.note));
  out.diagnostics.push_back("unequal-precision: " + (uq.ok ? fmt("residual", uq.residual) : uq.note));
  const Candidate* best = nullptr;
  if (eq.ok) best = &eq;
  if (uq.ok && (!best || uq.residual < best->residual)) best = &uq;
  if (!best) throw Rejection("not a two-component Gaussian mixture", out.diagnostics);

  out.route = best == &eq ? "equal-precision" : "unequal-precision";
  out.residual = best->residual;
  const double sig = st.sigma;
  for (auto g : best->comps) {
    g.a /= sig * sig;
    g.b = st.mu + sig * g.b;
    g.c /= sig;
    out.components.push_back(g);
  }
  const auto& g0 = out.components[0];
  const auto& g1 = out.components[1];
  if (std::abs(g0.a - g1.a) <= opts.collapse_tol * (1.0 + std::abs(g0.a)) &&
      std::abs(g0.b - g1.b) <= opts.collapse_tol * (1.0 + std::abs(g0.b))) {
    out.components = {{g0.a, g0.b, g0.c + g1.c}};
    out.degenerate = true;
  }
  return out;
}

}  // namespace gauss
}  // namespace momentsieve
