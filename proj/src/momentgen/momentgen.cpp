#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "momentsieve/momentgen.hpp"

namespace momentsieve {
namespace gen {

namespace {

// Golub-Welsch for a symmetric Jacobi matrix with zero diagonal.
QuadratureRule golub_welsch(int m, const std::vector<double>& offdiag_sq, double mu0) {
  Matrix J = Matrix::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) J(i, i + 1) = J(i + 1, i) = std::sqrt(offdiag_sq[i]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  QuadratureRule q;
  q.exact_degree = 2 * m - 1;
  for (int i = 0; i < m; ++i) {
    q.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    q.weights.push_back(mu0 * v * v);
  }
  // Both weight functions are even; symmetrise to remove eigensolver noise.
  for (int i = 0, j = m - 1; i <= j; ++i, --j) {
    const double x = 0.5 * (q.nodes[j] - q.nodes[i]), w = 0.5 * (q.weights[i] + q.weights[j]);
    q.nodes[i] = -x;
    q.nodes[j] = x;
    q.weights[i] = q.weights[j] = w;
  }
  return q;
}

// Accumulate w * x^alpha into s for every alpha in graded order.
void accumulate_point(MomentSequence& s, const Vector& x, double w) {
  const std::size_t n = s.dim();
  const int d = s.degree();
  std::vector<std::vector<double>> pw(n, std::vector<double>(d + 1, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (int p = 1; p <= d; ++p) pw[i][p] = pw[i][p - 1] * x(static_cast<Eigen::Index>(i));
  const auto& idx = s.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    double t = w;
    for (std::size_t i = 0; i < n; ++i) t *= pw[i][idx[k][i]];
    s[k] += t;
  }
}

// Calls f(point, weight) for every node of the tensor rule built from `rule` on each axis.
template <class F>
void tensor_loop(std::size_t n, const QuadratureRule& rule, F&& f) {
  const std::size_t m = rule.nodes.size();
  std::vector<std::size_t> ctr(n, 0);
  Vector y(static_cast<Eigen::Index>(n));
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      y(static_cast<Eigen::Index>(i)) = rule.nodes[ctr[i]];
      w *= rule.weights[ctr[i]];
    }
    f(y, w);
    std::size_t i = 0;
    while (i < n && ++ctr[i] == m) ctr[i++] = 0;
    if (i == n) break;
  }
}

double simplex_volume_factor(const Simplex& s, Matrix& E) {
  const auto n = static_cast<Eigen::Index>(s.vertices.size()) - 1;
  if (n < 1 || s.vertices.front().size() != n)
    throw InvalidInput("simplex needs n+1 vertices in R^n");
  E.resize(n, n);
  for (Eigen::Index l = 0; l < n; ++l) E.col(l) = s.vertices[l + 1] - s.vertices[0];
  return std::abs(E.determinant());
}

}  // namespace

QuadratureRule gauss_legendre(int m, double lo, double hi) {
  if (m < 1) throw InvalidInput("gauss_legendre: need at least one node");
  std::vector<double> b(m);
  for (int j = 1; j < m; ++j) b[j - 1] = static_cast<double>(j) * j / (4.0 * j * j - 1.0);
  QuadratureRule q = golub_welsch(m, b, 2.0);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (int i = 0; i < m; ++i) {
    q.nodes[i] = mid + half * q.nodes[i];
    q.weights[i] *= half;
  }
  return q;
}

QuadratureRule gauss_hermite(int m) {
  if (m < 1) throw InvalidInput("gauss_hermite: need at least one node");
  std::vector<double> b(m);
  for (int j = 1; j < m; ++j) b[j - 1] = j;
  return golub_welsch(m, b, std::sqrt(2.0 * M_PI));
}

MomentSequence atomic_moments(const std::vector<double>& x, const std::vector<double>& w,
                              int degree) {
  if (x.size() != w.size()) throw InvalidInput("atomic_moments: size mismatch");
  std::vector<double> s(degree + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = w[i];
    for (int j = 0; j <= degree; ++j, p *= x[i]) s[j] += p;
  }
  return MomentSequence::univariate(std::move(s));
}

MomentSequence atomic_moments_nd(const std::vector<Vector>& points, const std::vector<double>& w,
                                 int degree) {
  if (points.empty() || points.size() != w.size()) throw InvalidInput("atomic_moments_nd: bad input");
  MomentSequence s(static_cast<std::size_t>(points.front().size()), degree);
  for (std::size_t i = 0; i < points.size(); ++i) accumulate_point(s, points[i], w[i]);
  return s;
}

MomentSequence box_moments(const std::vector<Box>& boxes, int degree) {
  if (boxes.empty()) throw InvalidInput("box_moments: no boxes");
  const auto n = static_cast<std::size_t>(boxes.front().lower.size());
  MomentSequence s(n, degree);
  const auto& idx = s.indices();
  for (const auto& b : boxes) {
    if (static_cast<std::size_t>(b.lower.size()) != n || b.upper.size() != b.lower.size())
      throw InvalidInput("box_moments: dimension mismatch");
    std::vector<std::vector<double>> axis(n, std::vector<double>(degree + 1));
    for (std::size_t i = 0; i < n; ++i) {
      const double l = b.lower(static_cast<Eigen::Index>(i)), u = b.upper(static_cast<Eigen::Index>(i));
      double pl = l, pu = u;
      for (int p = 0; p <= degree; ++p, pl *= l, pu *= u) axis[i][p] = (pu - pl) / (p + 1);
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      double t = b.coef;
      for (std::size_t i = 0; i < n; ++i) t *= axis[i][idx[k][i]];
      s[k] += t;
    }
  }
  return s;
}

std::vector<Simplex> fan_triangulation(const std::vector<Vector>& polygon) {
  if (polygon.size() < 3) throw InvalidInput("fan_triangulation: need at least three vertices");
  std::vector<Simplex> out;
  for (std::size_t i = 1; i + 1 < polygon.size(); ++i)
    out.push_back(Simplex{{polygon[0], polygon[i], polygon[i + 1]}});
  return out;
}

MomentSequence simplex_moments(const std::vector<Simplex>& simplices,
                               const std::vector<double>& coefs, int degree) {
  if (simplices.empty() || simplices.size() != coefs.size())
    throw InvalidInput("simplex_moments: bad input");
  const auto n = simplices.front().vertices.size() - 1;
  MomentSequence s(n, degree);
  const auto& idx = s.indices();
  // int over the standard simplex of lambda^gamma = gamma! / (|gamma| + n)!
  auto std_integral = [&](const MultiIndex& g) { return factorial(g) / factorial(g.order() + static_cast<int>(n)); };
  for (std::size_t si = 0; si < simplices.size(); ++si) {
    Matrix E;
    const double vol = simplex_volume_factor(simplices[si], E);
    const Vector& v0 = simplices[si].vertices[0];
    // powers[i][p] = (v0_i + sum_l E_il lambda_l)^p
    std::vector<std::vector<MultiPolynomial>> powers(n);
    for (std::size_t i = 0; i < n; ++i) {
      MultiPolynomial L = MultiPolynomial::constant(n, v0(static_cast<Eigen::Index>(i)));
      for (std::size_t l = 0; l < n; ++l)
        L.add_term(MultiIndex::unit(n, l), E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)));
      powers[i].push_back(MultiPolynomial::constant(n, 1.0));
      for (int p = 1; p <= degree; ++p) powers[i].push_back(powers[i].back() * L);
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      MultiPolynomial prod = powers[0][idx[k][0]];
      for (std::size_t i = 1; i < n; ++i) prod = prod * powers[i][idx[k][i]];
      double acc = 0.0;
      for (const auto& [g, c] : prod.terms()) acc += c * std_integral(g);
      s[k] += coefs[si] * vol * acc;
    }
  }
  return s;
}

MomentSequence polytope_directional_moments(const std::vector<Simplex>& simplices,
                                            const std::vector<double>& coefs, const Vector& r,
                                            int jmax) {
  if (simplices.empty() || simplices.size() != coefs.size())
    throw InvalidInput("polytope_directional_moments: bad input");
  std::vector<double> s(jmax + 1, 0.0);
  for (std::size_t si = 0; si < simplices.size(); ++si) {
    Matrix E;
    const double vol = simplex_volume_factor(simplices[si], E);
    const int n = static_cast<int>(E.rows());
    // complete homogeneous symmetric polynomials of the projected vertices
    std::vector<double> h(jmax + 1, 0.0);
    h[0] = 1.0;
    for (const auto& v : simplices[si].vertices) {
      const double l = v.dot(r);
      for (int j = 1; j <= jmax; ++j) h[j] += l * h[j - 1];
    }
    for (int j = 0; j <= jmax; ++j) s[j] += coefs[si] * vol * factorial(j) / factorial(j + n) * h[j];
  }
  return MomentSequence::univariate(std::move(s));
}

std::vector<Box> random_box_arrangement(std::size_t n, int k, double lo, double hi, double min_gap,
                                        std::uint64_t seed) {
  if (n < 1 || k < 1 || !(hi > lo)) throw InvalidInput("random_box_arrangement: bad parameters");
  const int ilo = static_cast<int>(std::ceil(lo * 100.0)), ihi = static_cast<int>(std::floor(hi * 100.0));
  const int gap = static_cast<int>(std::ceil(min_gap * 100.0 - 1e-9));
  if ((2 * k - 1) * gap > ihi - ilo) throw InvalidInput("random_box_arrangement: gaps do not fit");
  std::mt19937_64 rng(seed);
  std::vector<Box> boxes(k, Box{Vector(static_cast<Eigen::Index>(n)), Vector(static_cast<Eigen::Index>(n)), 1.0});
  for (std::size_t i = 0; i < n; ++i) {
    // Place 2k sorted integers with gaps >= gap: sample the slack, then add the gaps back.
    const int slack = ihi - ilo - (2 * k - 1) * gap;
    std::uniform_int_distribution<int> u(0, slack);
    std::vector<int> c(2 * k);
    for (auto& v : c) v = u(rng);
    std::sort(c.begin(), c.end());
    for (int j = 0; j < 2 * k; ++j) c[j] += ilo + j * gap;
    std::vector<int> perm(2 * k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int j = 0; j < k; ++j) {
      const int a = std::min(perm[2 * j], perm[2 * j + 1]), b = std::max(perm[2 * j], perm[2 * j + 1]);
      boxes[j].lower(static_cast<Eigen::Index>(i)) = c[a] / 100.0;
      boxes[j].upper(static_cast<Eigen::Index>(i)) = c[b] / 100.0;
    }
  }
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::bernoulli_distribution sign(0.5);
  for (auto& b : boxes) b.coef = (sign(rng) ? -1.0 : 1.0) * std::round(mag(rng) * 100.0) / 100.0;
  return boxes;
}

std::vector<Vector> random_convex_polygon(int k, std::uint64_t seed) {
  if (k < 3) throw InvalidInput("random_convex_polygon: need k >= 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> axis(0.8, 1.5), ctr(-0.5, 0.5), rot(0.0, M_PI);
  const double ax = axis(rng), ay = axis(rng), cx = ctr(rng), cy = ctr(rng), phi = rot(rng);
  // Angles: equal spacing jittered by at most a third of the spacing.
  const double step = 2.0 * M_PI / k;
  std::uniform_real_distribution<double> jit(-step / 3.0, step / 3.0);
  std::vector<Vector> out;
  for (int i = 0; i < k; ++i) {
    const double t = i * step + jit(rng);
    const double x = ax * std::cos(t), y = ay * std::sin(t);
    Vector v(2);
    v << cx + std::cos(phi) * x - std::sin(phi) * y, cy + std::sin(phi) * x + std::cos(phi) * y;
    out.push_back(v);
  }
  return out;
}

MomentSequence gaussian_mixture_moments(const std::vector<gauss::Gaussian1D>& comps, int degree) {
  return gauss::gaussian1d_mixture_moments(comps, degree);
}

MomentSequence gaussian_nd_moments(const std::vector<gauss::GaussianND>& comps, int degree) {
  if (comps.empty()) throw InvalidInput("gaussian_nd_moments: no components");
  const auto n = static_cast<std::size_t>(comps.front().b.size());
  MomentSequence s(n, degree);
  const QuadratureRule rule = gauss_hermite(degree / 2 + 2);
  for (const auto& g : comps) {
    Eigen::LLT<Matrix> llt(g.A);
    if (llt.info() != Eigen::Success) throw InvalidInput("gaussian_nd_moments: A not SPD");
    const Matrix L = llt.matrixL();
    const double jac = 1.0 / L.diagonal().prod();
    const Matrix Lt = L.transpose();
    tensor_loop(n, rule, [&](const Vector& y, double w) {
      const Vector x = g.b + Lt.triangularView<Eigen::Upper>().solve(y);
      accumulate_point(s, x, g.c * jac * w);
    });
  }
  return s;
}

MomentSequence density_moments(const MultiPolynomial& p, const Vector& lower, const Vector& upper,
                               int degree, int nodes_per_axis) {
  const auto n = static_cast<std::size_t>(lower.size());
  if (p.dim() != n || upper.size() != lower.size()) throw InvalidInput("density_moments: dimension mismatch");
  MomentSequence s(n, degree);
  const QuadratureRule ref = gauss_legendre(nodes_per_axis);
  tensor_loop(n, ref, [&](const Vector& y, double w) {
    Vector x(static_cast<Eigen::Index>(n));
    double jw = w;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double half = 0.5 * (upper(ii) - lower(ii));
      x(ii) = lower(ii) + half * (y(ii) + 1.0);
      jw *= half;
    }
    accumulate_point(s, x, jw * std::exp(p(x)));
  });
  return s;
}

DerivativeCheck interval_derivative_check(double lo, double hi, int degree) {
  Box b{Vector::Constant(1, lo), Vector::Constant(1, hi), 1.0};
  const MomentSequence ds = monomial_derivative(box_moments({b}, degree), MultiIndex{1});
  const MomentSequence ref = atomic_moments({lo, hi}, {1.0, -1.0}, degree);
  DerivativeCheck out;
  for (int j = 0; j <= degree; ++j) {
    const double e = std::abs(ds[j] - ref[j]);
    out.max_abs_error = std::max(out.max_abs_error, e);
    out.max_rel_error = std::max(out.max_rel_error, e / std::max(1.0, std::abs(ref[j])));
  }
  return out;
}

DerivativeCheck gaussian_derivative_check(double alpha, double beta, int l, int degree) {
  if (!(alpha > 0.0) || l < 0) throw InvalidInput("gaussian_derivative_check: need alpha > 0, l >= 0");
  const QuadratureRule q = gauss_hermite((degree + l) / 2 + 2);
  const RealPolynomial H = hermite(l);
  const double sign = l % 2 == 0 ? 1.0 : -1.0;
  std::vector<double> f(degree + 1, 0.0), hf(degree + 1, 0.0);
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double u = q.nodes[i] / std::sqrt(2.0);
    const double x = (u + beta) / alpha;
    const double w = q.weights[i] / (std::sqrt(2.0) * alpha);
    const double h = sign * std::pow(alpha, l) * H(u);
    double p = 1.0;
    for (int j = 0; j <= degree; ++j, p *= x) {
      f[j] += w * p;
      hf[j] += w * h * p;
    }
  }
  MultiIndex order{l};
  const MomentSequence d = monomial_derivative(MomentSequence::univariate(f), order);
  DerivativeCheck out;
  for (int j = 0; j <= degree; ++j) {
    const double e = std::abs(d[j] - hf[j]);
    out.max_abs_error = std::max(out.max_abs_error, e);
    out.max_rel_error = std::max(out.max_rel_error, e / std::max(1.0, std::abs(hf[j])));
  }
  return out;
}

}  // namespace gen
}  // namespace momentsieve
