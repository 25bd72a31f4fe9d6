// Acceptance suite: one PASS/FAIL line per criterion, tolerances and budgets pinned below.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "momentsieve/atomic.hpp"
#include "momentsieve/core.hpp"
#include "momentsieve/density.hpp"
#include "momentsieve/gaussian.hpp"
#include "momentsieve/momentgen.hpp"
#include "momentsieve/shape.hpp"

using namespace momentsieve;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok    " : "FAILED") + "  " + what);
  }
  void note(const std::string& what) { notes.push_back("        " + what); }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::vector<double> separated(std::mt19937_64& rng, int k, double lo, double hi, double gap) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (;;) {
    std::vector<double> b(k);
    for (auto& v : b) v = u(rng);
    std::sort(b.begin(), b.end());
    bool ok = true;
    for (int i = 1; i < k; ++i) ok = ok && b[i] - b[i - 1] >= gap;
    if (ok) return b;
  }
}

// ---------------------------------------------------------------- 1

Outcome operator_identity() {
  Outcome out;
  const int d = 10;
  Matrix M1 = Matrix::Zero(d, d + 1);
  for (int i = 0; i < d; ++i) M1(i, i + 1) = 1.0;
  for (double a : {0.5, 1.0, 4.0}) {
    const Matrix C = gauss::transform_matrix(a, d - 1) * gauss::delta_a_matrix(a, d) *
                     gauss::transform_matrix_inverse(a, d);
    const double err = (C - M1).cwiseAbs().maxCoeff();
    out.check(err <= 1e-9, fmt("a=%g  |M(a) Delta_a M(a)^-1 - M_1|_inf = %.2e (tol 1e-9)", a, err));
  }
  return out;
}

// ---------------------------------------------------------------- 2

Outcome variance_polynomial_match() {
  Outcome out;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double e1[2] = {0, 0}, e2[4] = {0, 0, 0, 0};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(5);
    for (auto& v : s) v = u(rng);
    const double s0 = s[0], s1 = s[1], s2 = s[2], s3 = s[3], s4 = s[4];
    const auto seq = MomentSequence::univariate(s);
    const auto p1 = gauss::variance_polynomial(seq.truncated(2), 1);
    const double w1[2] = {-s0 * s0, s0 * s2 - s1 * s1};
    for (int i = 0; i < 2; ++i) e1[i] = std::max(e1[i], rel(p1.coef(i), w1[i]));
    const auto p2 = gauss::variance_polynomial(seq, 2);
    // Coefficients exactly as printed for k = 2.
    const double w2[4] = {-2 * s0 * s0 * s0, 6 * s0 * s0 * s2 - 4 * s0 * s1 * s1,
                          -s0 * s0 * s4 + 3 * s0 * s1 * s3 - 3 * s0 * s2 * s2 + s1 * s1 * s2,
                          s0 * s2 * s4 - s0 * s3 * s3 + 2 * s1 * s2 * s3 - s1 * s1 * s4 - s2 * s2 * s2};
    for (int i = 0; i < 4; ++i) e2[i] = std::max(e2[i], rel(p2.coef(i), w2[i]));
  }
  for (int i = 0; i < 2; ++i) out.check(e1[i] <= 1e-10, fmt("k=1 coefficient of a^%d: max rel error %.2e", i, e1[i]));
  for (int i = 0; i < 4; ++i) out.check(e2[i] <= 1e-10, fmt("k=2 coefficient of a^%d: max rel error %.2e", i, e2[i]));
  if (!out.pass)
    out.note("the printed k=2 a^2 and a^1 coefficients do not expand the printed determinant; "
             "the expansion of that determinant is -s0^2 s4 + 4 s0 s1 s3 - 3 s0 s2^2 and 6 s0^2 s2 - 6 s0 s1^2");
  return out;
}

// ---------------------------------------------------------------- 3

Outcome single_gaussian() {
  Outcome out;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ua(0.2, 5.0), ub(-3.0, 3.0), uc(0.1, 10.0);
  double ea = 0, eb = 0, ec = 0;
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    const double a = ua(rng), b = ub(rng), c = uc(rng);
    try {
      const auto f = gauss::fit_single_gaussian_1d(gauss::gaussian1d_moments(a, b, c, 6));
      ea = std::max(ea, rel(f.g.a, a));
      eb = std::max(eb, rel(f.g.b, b));
      ec = std::max(ec, rel(f.g.c, c));
    } catch (const Rejection&) {
      ++failures;
    }
  }
  out.check(failures == 0, fmt("1D: %d of 100 rejected", failures));
  out.check(ea <= 1e-8, fmt("1D: max rel error a %.2e (tol 1e-8)", ea));
  out.check(eb <= 1e-8, fmt("1D: max rel error b %.2e (tol 1e-8)", eb));
  out.check(ec <= 1e-8, fmt("1D: max rel error c %.2e (tol 1e-8)", ec));

  std::normal_distribution<double> nrm;
  std::uniform_real_distribution<double> ubn(-1.5, 1.5), ucn(0.5, 3.0);
  for (int n : {2, 3}) {
    double eA = 0, ebn = 0, ecn = 0;
    for (int t = 0; t < 20; ++t) {
      Matrix B(n, n);
      for (int i = 0; i < n * n; ++i) B(i) = nrm(rng);
      gauss::GaussianND g{B * B.transpose() / n + 0.5 * Matrix::Identity(n, n), Vector(n), ucn(rng)};
      for (int i = 0; i < n; ++i) g.b(i) = ubn(rng);
      try {
        const auto f = gauss::fit_single_gaussian_nd(gen::gaussian_nd_moments({g}, 4));
        eA = std::max(eA, (f.g.A - g.A).cwiseAbs().maxCoeff() / g.A.cwiseAbs().maxCoeff());
        ebn = std::max(ebn, (f.g.b - g.b).cwiseAbs().maxCoeff() / std::max(1.0, g.b.cwiseAbs().maxCoeff()));
        ecn = std::max(ecn, rel(f.g.c, g.c));
      } catch (const Rejection& r) {
        eA = INFINITY;
        out.note("n=" + std::to_string(n) + " rejected: " + r.reason());
      }
    }
    out.check(std::max({eA, ebn, ecn}) <= 1e-6,
              fmt("n=%d: 20 instances, max rel error A %.2e, b %.2e, c %.2e (tol 1e-6)", n, eA, ebn, ecn));
  }
  return out;
}

// ---------------------------------------------------------------- 4

Outcome equal_variance_mixtures() {
  Outcome out;
  for (int k : {2, 3, 4}) {
    std::mt19937_64 rng(400 + k);
    std::uniform_real_distribution<double> ua(0.5, 4.0), uc(0.5, 2.0);
    int success = 0, silent = 0, root_ok = 0;
    for (int t = 0; t < 50; ++t) {
      const double a = ua(rng);
      const auto b = separated(rng, k, -3.0, 3.0, 0.8);
      std::vector<gauss::Gaussian1D> comps;
      for (double v : b) comps.push_back({a, v, uc(rng)});
      const auto s = gauss::gaussian1d_mixture_moments(comps, 2 * k);

      // The variance polynomial of the raw moments must have a positive root near a.
      bool has_root = false;
      for (double r : real_roots(gauss::variance_polynomial(s, k)))
        has_root = has_root || (r > 0.0 && std::abs(r - a) <= 1e-6);
      root_ok += has_root;
      try {
        const auto f = gauss::fit_mixture_equal_variance(s, k);
        bool ok = has_root && f.b.size() == b.size();
        for (int j = 0; ok && j < k; ++j)
          ok = std::abs(f.b[j] - b[j]) <= 1e-5 && std::abs(f.c[j] - comps[j].c) <= 1e-4;
        success += ok;
        if (!ok) {
          ++silent;
          out.note(fmt("k=%d trial %d: accepted fit outside tolerance (a=%.6g, residual %.2e)", k, t, f.a, f.residual));
        }
      } catch (const Rejection& r) {
        if (r.diagnostics().empty()) ++silent;
        out.note(fmt("k=%d trial %d: rejected (%s), %zu diagnostic lines", k, t, r.reason().c_str(),
                     r.diagnostics().size()));
      }
    }
    out.check(success >= 48 && silent == 0,
              fmt("k=%d: %d/50 recovered (need >= 48), %d/50 with a root within 1e-6, %d failures without diagnostics",
                  k, success, root_ok, silent));
  }
  return out;
}

// ---------------------------------------------------------------- 5

Outcome pearson() {
  Outcome out;
  const auto s = gauss::gaussian1d_mixture_moments({{1.0, 0.0, 1.0}, {4.0, 1.0, 1.0}}, 9);
  try {
    const auto f = gauss::fit_two_mixture_1d(s);
    auto c = f.components;
    out.check(c.size() == 2, fmt("%zu components via route %s", c.size(), f.route.c_str()));
    if (c.size() != 2) return out;
    std::sort(c.begin(), c.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    const double err = std::max({std::abs(c[0].a - 1), std::abs(c[1].a - 4), std::abs(c[0].b), std::abs(c[1].b - 1),
                                 std::abs(c[0].c - 1), std::abs(c[1].c - 1)});
    out.check(err <= 1e-5, fmt("max abs parameter error %.2e (tol 1e-5)", err));
  } catch (const Rejection& r) {
    out.check(false, "rejected: " + r.reason());
  }
  return out;
}

// ---------------------------------------------------------------- 6

Outcome polytope() {
  Outcome out;
  std::vector<Vector> P;
  for (int i = 0; i < 5; ++i) {
    const double t = 2.0 * M_PI * i / 5.0 + 0.3;
    Vector v(2);
    v << std::cos(t), std::sin(t);
    P.push_back(v);
  }
  const auto tri = gen::fan_triangulation(P);
  const auto s = gen::simplex_moments(tri, std::vector<double>(tri.size(), 1.0), 13);
  try {
    const auto m = shape::recover_polytope_vertices(s, 5, shape::random_directions(2, 3, 42));
    out.check(m.vertices.size() == 5, fmt("%zu vertices recovered", m.vertices.size()));
    double e = 0.0;
    for (const auto& v : P) {
      double best = INFINITY;
      for (const auto& w : m.vertices) best = std::min(best, (v - w).norm());
      e = std::max(e, best);
    }
    out.check(e <= 1e-6, fmt("max vertex error %.2e (tol 1e-6)", e));
    double defect = 0.0;
    for (const auto& p : m.per_direction) defect = std::max(defect, shape::low_order_defect(p, 2));
    out.check(defect <= 1e-7, fmt("low-order vanishing, orders 0..1: max relative %.2e (tol 1e-7)", defect));
  } catch (const Rejection& r) {
    out.check(false, "rejected: " + r.reason());
  }
  return out;
}

// ---------------------------------------------------------------- 7

Outcome boxes() {
  Outcome out;
  double ecoord = 0, evert = 0, ecoef = 0;
  int failed = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 2);
    const int k = 1 + (i / 2) % 3;
    const auto truth = gen::random_box_arrangement(n, k, -3.0, 3.0, 0.2, 700 + static_cast<std::uint64_t>(i));
    const auto s = gen::box_moments(truth, 4 * k + 1);
    try {
      const auto f = shape::recover_box_arrangement(s, k);
      if (f.boxes.size() != truth.size()) {
        ++failed;
        out.note(fmt("instance %d (n=%zu, k=%d): %zu boxes", i, n, k, f.boxes.size()));
        continue;
      }
      for (std::size_t ax = 0; ax < n; ++ax) {
        std::vector<double> c;
        for (const auto& b : truth) {
          c.push_back(b.lower(static_cast<Eigen::Index>(ax)));
          c.push_back(b.upper(static_cast<Eigen::Index>(ax)));
        }
        std::sort(c.begin(), c.end());
        const auto& g = f.grid.coords[ax];
        if (g.size() != c.size()) {
          ecoord = INFINITY;
          continue;
        }
        for (std::size_t j = 0; j < c.size(); ++j) ecoord = std::max(ecoord, std::abs(g[j] - c[j]));
      }
      for (const auto& b : truth) {
        double best = INFINITY, coef = INFINITY;
        for (const auto& r : f.boxes) {
          const double e = std::max((b.lower - r.lower).cwiseAbs().maxCoeff(), (b.upper - r.upper).cwiseAbs().maxCoeff());
          if (e < best) {
            best = e;
            coef = std::abs(r.coef - b.coef);
          }
        }
        evert = std::max(evert, best);
        ecoef = std::max(ecoef, coef);
      }
    } catch (const Rejection& r) {
      ++failed;
      out.note(fmt("instance %d (n=%zu, k=%d): rejected (%s)", i, n, k, r.reason().c_str()));
    }
  }
  out.check(failed == 0, fmt("%d of 50 instances failed", failed));
  out.check(ecoord <= 1e-8, fmt("per-axis coordinates: max error %.2e (tol 1e-8)", ecoord));
  out.check(evert <= 1e-7, fmt("assembled vertices: max error %.2e (tol 1e-7)", evert));
  out.check(ecoef <= 1e-6, fmt("coefficients: max error %.2e (tol 1e-6)", ecoef));
  return out;
}

// ---------------------------------------------------------------- 8

Outcome density_examples() {
  Outcome out;
  {
    density::SemiAlgebraicSpec spec;
    spec.g = MultiPolynomial(1);
    spec.g.add_term(MultiIndex{0}, 1.0);
    spec.g.add_term(MultiIndex{2}, -1.0);
    spec.box_lower = Vector::Constant(1, -1.0);
    spec.box_upper = Vector::Constant(1, 1.0);
    MultiPolynomial p(1);
    p.add_term(MultiIndex{2}, -1.0);
    const auto s = gen::density_moments(p, *spec.box_lower, *spec.box_upper, 6, 64);
    const auto f = density::recover_exponent(s, spec, 2);
    const double e = std::max(std::abs(f.p.coef(MultiIndex{2}) + 1.0), std::abs(f.p.coef(MultiIndex{1})));
    out.check(e <= 1e-6, fmt("interval, p = -x^2: max coefficient error %.2e (tol 1e-6)", e));

    // Below the degree threshold 2d + 2 deg g - 2 = 6.
    for (int k = 3; k < 6; ++k) {
      const Matrix M = density::exponent_matrix(s.truncated(k), spec.g, 2, 0);
      const auto ker = equilibrated_kernel(M, 1e-9);
      bool rejected = false;
      try {
        density::recover_exponent(s.truncated(k), spec, 2);
      } catch (const Rejection&) {
        rejected = true;
      }
      out.check(ker.dimension() == 0,
                fmt("k=%d: %ldx%ld matrix, kernel dimension %d, recover_exponent %s", k, static_cast<long>(M.rows()),
                    static_cast<long>(M.cols()), ker.dimension(), rejected ? "rejects" : "accepts"));
    }
    if (!out.pass)
      out.note("exact moments always put the true coefficient vector in the kernel, so it cannot be empty; "
               "the matrix has full row rank while rows < columns, and recover_exponent rejects every k below 6");
  }
  {
    const auto x = MultiPolynomial::variable(2, 0), y = MultiPolynomial::variable(2, 1);
    const auto one = MultiPolynomial::constant(2, 1.0);
    density::SemiAlgebraicSpec spec;
    spec.g = (one - x * x) * (one - y * y);
    spec.box_lower = Vector::Constant(2, -1.0);
    spec.box_upper = Vector::Constant(2, 1.0);
    MultiPolynomial p(2);
    p.add_term(MultiIndex{2, 0}, -0.5);
    p.add_term(MultiIndex{0, 2}, -0.5);
    p.add_term(MultiIndex{1, 0}, 0.3);
    const auto s = gen::density_moments(p, *spec.box_lower, *spec.box_upper, 10, 48);
    const auto f = density::recover_exponent(s, spec, 2);
    double e = 0.0;
    for (const auto& a : graded_indices(2, 2))
      if (a.order() > 0) e = std::max(e, std::abs(f.p.coef(a) - p.coef(a)));
    out.check(e <= 1e-6, fmt("square, p = -(x^2+y^2)/2 + 0.3x: max coefficient error %.2e (tol 1e-6)", e));
  }
  return out;
}

// ---------------------------------------------------------------- 9

MomentSequence random_sequence(std::size_t n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MomentSequence s(n, d);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = u(rng);
  return s;
}

Outcome derivative_calculus() {
  Outcome out;
  // binom(alpha+gamma, beta) (M_alpha d^beta s)_gamma = binom(gamma, beta) (d^beta M_alpha s)_gamma
  double literal = 0.0, exchanged = 0.0;
  long triples = 0, literal_bad = 0;
  std::string first_bad;
  for (std::size_t n = 1; n <= 2; ++n)
    for (int d = 0; d <= 4; ++d) {
      const auto s = random_sequence(n, d, 900 + 10 * n + static_cast<std::uint64_t>(d));
      for (const auto& alpha : graded_indices(n, d))
        for (const auto& beta : graded_indices(n, d)) {
          const auto l = shift(monomial_derivative(s, beta), alpha);
          const auto r = monomial_derivative(shift(s, alpha), beta);
          for (const auto& gamma : graded_indices(n, d - alpha.order())) {
            ++triples;
            const double e1 = std::abs(binomial(alpha + gamma, beta) * l.at(gamma) - binomial(gamma, beta) * r.at(gamma));
            const double e2 = std::abs(binomial(gamma, beta) * l.at(gamma) - binomial(alpha + gamma, beta) * r.at(gamma));
            if (e1 > 1e-10 && literal_bad++ == 0)
              first_bad = fmt("n=%zu alpha=%d beta=%d gamma=%d", n, alpha[0], beta[0], gamma[0]);
            literal = std::max(literal, e1);
            exchanged = std::max(exchanged, e2);
          }
        }
    }
  out.check(literal <= 1e-10, fmt("commutation as stated: %ld of %ld triples violate it, max error %.2e (first: %s)",
                                  literal_bad, triples, literal, first_bad.c_str()));
  if (literal > 1e-10)
    out.note(fmt("with the two binomials exchanged the identity holds on all %ld triples, max error %.2e", triples,
                 exchanged));

  // Full mixed derivative of a box: signed vertex atoms, checked on monomials up to degree 3.
  double rect = 0.0;
  for (int n : {1, 2, 3}) {
    Vector lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo(i) = -0.4 + 0.1 * i;
      hi(i) = 0.7 + 0.3 * i;
    }
    const auto s = gen::box_moments({gen::Box{lo, hi, 1.0}}, 3 + n);
    MultiIndex ones(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ones[i] = 1;
    const auto ds = monomial_derivative(s, ones);
    std::vector<Vector> pts;
    std::vector<double> w;
    for (int e = 0; e < (1 << n); ++e) {
      Vector p(n);
      int uppers = 0;
      for (int i = 0; i < n; ++i) {
        const bool up = (e >> i) & 1;
        p(i) = up ? hi(i) : lo(i);
        uppers += up;
      }
      pts.push_back(p);
      w.push_back(uppers % 2 ? -1.0 : 1.0);
    }
    const auto ref = gen::atomic_moments_nd(pts, w, 3 + n);
    for (std::size_t k = 0; k < ref.size(); ++k)
      if (ref.indices()[k].order() <= 3) rect = std::max(rect, std::abs(ds[k] - ref[k]));
  }
  out.check(rect <= 1e-10, fmt("box mixed derivative = signed vertex atoms (n=1..3, degree <= 3): max error %.2e", rect));

  double herm = 0.0;
  for (int l = 0; l <= 8; ++l) {
    std::vector<double> c(l + 1, 0.0);
    for (int l2 = 0; 2 * l2 <= l; ++l2) {
      const int l1 = l - 2 * l2;
      c[l1] += ((l1 + l2) % 2 ? -1.0 : 1.0) / (factorial(l1) * factorial(l2)) * std::pow(2.0, l1);
    }
    const RealPolynomial h = hermite(l);
    for (int i = 0; i <= l; ++i) {
      const double want = (l % 2 ? -1.0 : 1.0) * factorial(l) * c[i];
      herm = std::max(herm, std::abs(h.coef(i) - want) / std::max(1.0, std::abs(want)));
    }
  }
  out.check(herm <= 1e-10, fmt("Hermite recurrence vs explicit formula, l <= 8: max rel error %.2e", herm));
  return out;
}

// ---------------------------------------------------------------- 10

const std::vector<std::string> kFamilies = {"atoms",          "gaussian1d",        "gaussian-nd",
                                            "power-gaussian", "mixture-equal-var", "mixture-two",
                                            "polytope",       "boxes",             "density-exponent"};

const std::set<std::string> kDocumentedReasons = {
    "dimension mismatch",
    "not k_max-atomic within tolerance",
    "non-real atoms",
    "more data or atoms needed",
    "degenerate, reduce k",
    "kernel membership failed",
    "zero total mass",
    "non-positive variance",
    "non-positive mass",
    "non-positive precision",
    "precision matrix not symmetric",
    "precision matrix not positive definite",
    "kernel vector lacks the binomial pattern",
    "low-order moments mismatch",
    "no k-Gaussian mixture with equal variance",
    "not a two-component Gaussian mixture",
    "complex projections",
    "directions not in general position, resample",
    "not a convex polygon",
    "not a k-box arrangement within tolerance",
    "k too small or density not of this form",
    "degenerate g or G",
    "cross-axis disagreement",
    "non-finite normalising integral",
    "fitted model does not reproduce the moments"};

json canonical_model(const std::string& f) {
  const int d = 13;
  const char* conv = gauss::kConvention;
  if (f == "atoms") return {{"degree", d}, {"positions", {-1.2, 0.4, 1.5}}, {"weights", {1.0, -0.7, 1.6}}};
  if (f == "gaussian1d") return {{"convention", conv}, {"degree", d}, {"a", 1.7}, {"b", 0.4}, {"c", 2.0}};
  if (f == "gaussian-nd")
    return {{"convention", conv}, {"degree", d}, {"A", {{2.0, 0.3}, {0.3, 1.0}}}, {"b", {0.2, -0.4}}, {"c", 1.5}};
  if (f == "power-gaussian")
    return {{"convention", conv}, {"degree", d}, {"a", 1.3}, {"b", 0.2}, {"c", 1.0}, {"d", 2}};
  if (f == "mixture-equal-var")
    return {{"convention", conv}, {"degree", d}, {"a", 2.0}, {"components", {{{"b", -0.8}, {"c", 1.0}}, {{"b", 0.9}, {"c", 0.6}}}}};
  if (f == "mixture-two")
    return {{"convention", conv},
            {"degree", d},
            {"components", {{{"a", 1.0}, {"b", 0.0}, {"c", 1.0}}, {{"a", 4.0}, {"b", 1.0}, {"c", 1.0}}}}};
  if (f == "polytope") {
    json v = json::array();
    for (int i = 0; i < 5; ++i) {
      const double t = 2.0 * M_PI * i / 5.0 + 0.3;
      v.push_back({std::cos(t), std::sin(t)});
    }
    return {{"degree", d}, {"vertices", v}, {"coef", 1.0}};
  }
  if (f == "boxes")
    return {{"degree", d},
            {"boxes", {{{"lower", {-1.0, -0.5}}, {"upper", {0.6, 1.1}}, {"coef", 1.0}},
                       {{"lower", {0.2, -1.3}}, {"upper", {1.4, 0.3}}, {"coef", -0.8}}}}};
  return {{"degree", d},
          {"p", {{{"alpha", {2, 0}}, {"coef", -0.5}}, {{"alpha", {0, 2}}, {"coef", -0.5}}, {{"alpha", {1, 0}}, {"coef", 0.3}}}},
          {"lower", {-1.0, -1.0}},
          {"upper", {1.0, 1.0}}};
}

std::vector<std::string> fit_flags(const std::string& f, const std::string& support) {
  if (f == "power-gaussian") return {"--shape-d", "2"};
  if (f == "mixture-equal-var") return {"--k", "2"};
  if (f == "polytope") return {"--k", "5"};
  if (f == "boxes") return {"--k", "2"};
  if (f == "density-exponent") return {"--shape-d", "2", "--support", support};
  return {};
}

json slurp(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

/// Off-diagonal acceptance is allowed only where the fitted family contains the true one,
/// and the parameters must then equal the truth.
bool nested_model_matches(const std::string& fit, const std::string& truth, const json& m, std::string& why) {
  auto near = [](double x, double y) { return std::abs(x - y) <= 1e-6 * std::max(1.0, std::abs(y)); };
  const json t = canonical_model(truth);
  if (fit == "gaussian-nd" && truth == "gaussian1d") {
    why = "1D Gaussian as a 1-variate gaussian-nd";
    return near(m["A"][0][0], t["a"]) && near(m["b"][0], t["b"]) && near(m["c"], t["c"]);
  }
  if (fit == "mixture-two" && truth == "gaussian1d") {
    why = "single Gaussian as a collapsed two-component mixture";
    const json& c = m["components"];
    return c.size() == 1 && near(c[0]["a"], t["a"]) && near(c[0]["b"], t["b"]) && near(c[0]["c"], t["c"]);
  }
  if (fit == "mixture-two" && truth == "mixture-equal-var") {
    why = "equal-variance pair as a two-component mixture";
    json c = m["components"];
    if (c.size() != 2) return false;
    if (c[0]["b"].get<double>() > c[1]["b"].get<double>()) std::swap(c[0], c[1]);
    for (int i = 0; i < 2; ++i)
      if (!near(c[i]["a"], t["a"]) || !near(c[i]["b"], t["components"][i]["b"]) || !near(c[i]["c"], t["components"][i]["c"]))
        return false;
    return true;
  }
  return false;
}

Outcome cross_grid() {
  Outcome out;
  const auto dir = std::filesystem::temp_directory_path() / "momentsieve_acceptance";
  std::filesystem::create_directories(dir);
  const std::string support = (dir / "support.json").string();
  std::ofstream(support) << R"({"g":[{"alpha":[0,0],"coef":1},{"alpha":[2,0],"coef":-1},{"alpha":[0,2],"coef":-1},)"
                            R"({"alpha":[2,2],"coef":1}],"lower":[-1,-1],"upper":[1,1]})";
  for (const auto& g : kFamilies) {
    const std::string model = (dir / ("model_" + g + ".json")).string();
    std::ofstream(model) << canonical_model(g).dump();
    if (cli::run({"generate", "--family", g, "--in", model, "--out", (dir / ("mom_" + g + ".json")).string()}) != 0) {
      out.check(false, "generate failed for " + g);
      return out;
    }
  }
  int rejected = 0, diagonal = 0, nested = 0, bad = 0;
  for (const auto& fit : kFamilies)
    for (const auto& truth : kFamilies) {
      const std::string report = (dir / "report.json").string();
      std::vector<std::string> args = {"fit", "--family", fit, "--in", (dir / ("mom_" + truth + ".json")).string(),
                                       "--out", report};
      for (const auto& a : fit_flags(fit, support)) args.push_back(a);
      const int code = cli::run(args);
      const std::string cell = "fit " + fit + " on " + truth + ": ";
      if (code == 1) {
        ++bad;
        out.note(cell + "exit 1");
        continue;
      }
      const json r = slurp(report);
      if (fit == truth) {
        diagonal += code == 0;
        if (code != 0) {
          ++bad;
          out.note(cell + "rejected its own family (" + r.value("reason", "") + ")");
        }
      } else if (code == 2) {
        const std::string reason = r.value("reason", "");
        if (kDocumentedReasons.count(reason)) {
          ++rejected;
        } else {
          ++bad;
          out.note(cell + "undocumented reason '" + reason + "'");
        }
      } else {
        std::string why;
        if (nested_model_matches(fit, truth, r["model"], why)) {
          ++nested;
          out.note(cell + "accepted, nested family (" + why + "), parameters match");
        } else {
          ++bad;
          out.note(cell + "accepted a model outside the nested cases");
        }
      }
    }
  out.check(bad == 0, fmt("81 cells: %d diagonal fits accepted, %d documented rejections, %d nested acceptances, "
                          "%d violations",
                          diagonal, rejected, nested, bad));
  return out;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  // Runtime budgets in seconds; criterion 10 has none stated and gets a desk-scale minute.
  const std::vector<Criterion> criteria = {
      {1, "operator identity M(a) Delta_a M(a)^-1 = M_1", 1.0, operator_identity},
      {2, "variance polynomial matches the printed k=1 and k=2 formulas", 1.0, variance_polynomial_match},
      {3, "single-Gaussian round trip, 1D and nD", 5.0, single_gaussian},
      {4, "equal-variance mixtures k = 2, 3, 4", 30.0, equal_variance_mixtures},
      {5, "two-component mixture a=(1,4), b=(0,1), c=(1,1)", 1.0, pearson},
      {6, "polytope vertices from projections (pentagon)", 5.0, polytope},
      {7, "box arrangements, 50 seeded instances", 30.0, boxes},
      {8, "density exponent examples and truncated degree", 10.0, density_examples},
      {9, "derivative calculus", 5.0, derivative_calculus},
      {10, "9x9 family cross grid", 60.0, cross_grid},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::printf("%s  criterion %2d  %s  (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.title, secs,
                c.budget_s, in_budget ? "" : ", exceeded");
    for (const auto& line : o.notes) std::printf("      %s\n", line.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
