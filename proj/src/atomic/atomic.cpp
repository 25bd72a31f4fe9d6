#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include "momentsieve/atomic.hpp"

namespace momentsieve {
namespace atomic {

namespace {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

void require_univariate(const MomentSequence& s) {
  if (s.dim() != 1) throw InvalidInput("atomic recovery requires a univariate sequence");
}

// Initial guess for the support radius from the growth of |s_j|.
double growth_scale(const MomentSequence& s) {
  int j0 = 0;
  while (j0 <= s.degree() && s[j0] == 0.0) ++j0;
  double rho = 0.0;
  for (int j = j0 + 1; j <= s.degree(); ++j)
    rho = std::max(rho, std::pow(std::abs(s[j] / s[j0]), 1.0 / (j - j0)));
  return std::isfinite(rho) && rho > 0.0 ? rho : 1.0;
}

std::vector<double> scaled_values(const MomentSequence& s, double rho) {
  std::vector<double> u(s.degree() + 1);
  double f = 1.0;
  for (int j = 0; j <= s.degree(); ++j, f /= rho) u[j] = s[j] * f;
  return u;
}

GevResult gev_at_scale(const MomentSequence& s, int k, double rho, double rank_tol) {
  const auto u = scaled_values(s, rho);
  Matrix H0(k + 1, k + 1), H1(k + 1, k + 1);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) {
      H0(i, j) = u[i + j];
      H1(i, j) = u[i + j + 1];
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es(H0);
  const Vector lam = es.eigenvalues();
  std::vector<int> order(k + 1);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(lam(a)) > std::abs(lam(b)); });
  GevResult out;
  out.scale = rho;
  out.hankel_eigenvalue_moduli.resize(k + 1);
  for (int i = 0; i <= k; ++i) out.hankel_eigenvalue_moduli(i) = std::abs(lam(order[i]));
  const double top = out.hankel_eigenvalue_moduli(0);
  int r = 0;
  if (top > 0.0)
    while (r <= k && out.hankel_eigenvalue_moduli(r) > rank_tol * top) ++r;
  out.rank = r;
  if (r == 0) return out;
  Matrix Ur(k + 1, r);
  Vector inv(r);
  for (int i = 0; i < r; ++i) {
    Ur.col(i) = es.eigenvectors().col(order[i]);
    inv(i) = 1.0 / lam(order[i]);
  }
  Matrix P = inv.asDiagonal() * (Ur.transpose() * H1 * Ur);
  Eigen::EigenSolver<Matrix> ev(P, false);
  for (int i = 0; i < r; ++i) out.positions.push_back(ev.eigenvalues()(i) * rho);
  return out;
}

double positions_radius(const std::vector<Complex>& z) {
  double r = 0.0;
  for (const auto& x : z) r = std::max(r, std::abs(x));
  return r;
}

// Scaled Vandermonde rows j = 0..d: (x_i / rho)^j.
CMatrix vandermonde(const std::vector<Complex>& x, int d, double rho) {
  CMatrix V(d + 1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    Complex p = 1.0;
    const Complex y = x[i] / rho;
    for (int j = 0; j <= d; ++j, p *= y) V(j, static_cast<Eigen::Index>(i)) = p;
  }
  return V;
}

// Radius of the positions, floored against the growth of s so that a spurious atom near
// the origin cannot blow up the scaled system.
double vandermonde_scale(const MomentSequence& s, const std::vector<Complex>& x) {
  const double r = std::max(positions_radius(x), 1e-2 * growth_scale(s));
  return std::isfinite(r) && r > 0.0 ? r : 1.0;
}

// Gauss-Newton on real positions and weights against the scaled moments.
void polish_real(const MomentSequence& s, std::vector<double>& x, std::vector<double>& w) {
  const int d = s.degree();
  const int r = static_cast<int>(x.size());
  if (r == 0 || 2 * r > d + 1) return;
  const double rho = vandermonde_scale(s, std::vector<Complex>(x.begin(), x.end()));
  const auto u = scaled_values(s, rho);
  Vector target = Eigen::Map<const Vector>(u.data(), d + 1);
  auto residual = [&](const std::vector<double>& xx, const std::vector<double>& ww) {
    Vector res = -target;
    for (int i = 0; i < r; ++i) {
      double p = 1.0;
      const double y = xx[i] / rho;
      for (int j = 0; j <= d; ++j, p *= y) res(j) += ww[i] * p;
    }
    return res;
  };
  Vector res = residual(x, w);
  double best = res.norm();
  for (int it = 0; it < 30 && best > 0.0; ++it) {
    Matrix J(d + 1, 2 * r);
    for (int i = 0; i < r; ++i) {
      const double y = x[i] / rho;
      double p = 1.0, dp = 0.0;
      for (int j = 0; j <= d; ++j) {
        J(j, i) = p;
        J(j, r + i) = w[i] * dp / rho;
        dp = dp * y + p;  // d/dy y^{j+1} = (j+1) y^j
        p *= y;
      }
    }
    Vector step = J.colPivHouseholderQr().solve(-res);
    double t = 1.0;
    bool improved = false;
    for (int tries = 0; tries < 8; ++tries, t *= 0.5) {
      std::vector<double> xn = x, wn = w;
      for (int i = 0; i < r; ++i) {
        wn[i] += t * step(i);
        xn[i] += t * step(r + i);
      }
      Vector rn = residual(xn, wn);
      if (rn.norm() < best) {
        x = xn;
        w = wn;
        res = rn;
        best = rn.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
}

}  // namespace

bool SignedAtomicMeasure::is_real(double tol) const {
  for (const auto& a : atoms) {
    if (std::abs(a.position.imag()) > tol * (1.0 + std::abs(a.position.real()))) return false;
    if (std::abs(a.weight.imag()) > tol * (1.0 + std::abs(a.weight.real()))) return false;
  }
  return true;
}

std::vector<double> SignedAtomicMeasure::real_positions() const {
  std::vector<double> out;
  for (const auto& a : atoms) out.push_back(a.position.real());
  return out;
}

std::vector<double> SignedAtomicMeasure::real_weights() const {
  std::vector<double> out;
  for (const auto& a : atoms) out.push_back(a.weight.real());
  return out;
}

GevResult recover_atoms_gev(const MomentSequence& s, int k, const GevOptions& opts) {
  require_univariate(s);
  if (k < 1) throw InvalidInput("recover_atoms_gev: k must be positive");
  if (s.degree() < 2 * k + 1)
    throw InvalidInput("recover_atoms_gev: need degree >= " + std::to_string(2 * k + 1) +
                       " for k = " + std::to_string(k));
  const double g = growth_scale(s);
  GevResult first = gev_at_scale(s, k, g, opts.rank_tol);
  const double rho = std::max(positions_radius(first.positions), 1e-2 * g);
  if (first.rank == 0 || !std::isfinite(rho) || rho == 0.0) return first;
  return gev_at_scale(s, k, rho, opts.rank_tol);
}

std::vector<Complex> recover_atoms_kernel(const MomentSequence& s, int k, std::optional<double> tol) {
  require_univariate(s);
  if (k < 1) throw InvalidInput("recover_atoms_kernel: k must be positive");
  if (s.degree() < 2 * k)
    throw InvalidInput("recover_atoms_kernel: need degree >= " + std::to_string(2 * k));
  const double rho = growth_scale(s);
  const auto u = scaled_values(s, rho);
  Matrix H(k + 1, k + 1);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j) H(i, j) = u[i + j];
  KernelResult ker = numerical_kernel(H, tol);
  if (ker.dimension() == 0) throw Rejection("more data or atoms needed");
  if (ker.dimension() >= 2)
    throw Rejection("degenerate, reduce k",
                    {"kernel dimension " + std::to_string(ker.dimension())});
  RealPolynomial p;
  try {
    p = vieta_from_kernel(ker.basis.col(0));
  } catch (const InvalidInput&) {
    throw Rejection("degenerate, reduce k", {"kernel vector has vanishing leading entry"});
  }
  std::vector<Complex> roots = poly_roots(p);
  for (auto& z : roots) z *= rho;
  return roots;
}

WeightFit recover_weights(const MomentSequence& s, const std::vector<Complex>& positions) {
  require_univariate(s);
  WeightFit out;
  if (positions.empty()) {
    out.residual = s.norm() > 0.0 ? 1.0 : 0.0;
    out.condition = 1.0;
    return out;
  }
  const double rho = vandermonde_scale(s, positions);
  CMatrix V = vandermonde(positions, s.degree(), rho);
  const auto u = scaled_values(s, rho);
  CVector rhs(s.degree() + 1);
  for (int j = 0; j <= s.degree(); ++j) rhs(j) = u[j];
  Eigen::JacobiSVD<CMatrix> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CVector w = svd.solve(rhs);
  const auto& sv = svd.singularValues();
  out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                          : std::numeric_limits<double>::infinity();
  const double scale = rhs.norm();
  out.residual = (V * w - rhs).norm() / (scale > 0.0 ? scale : 1.0);
  out.weights.assign(w.data(), w.data() + w.size());
  return out;
}

AtomicFit recover_signed_atomic(const MomentSequence& s, int k_max, const AtomicFitOptions& opts) {
  require_univariate(s);
  if (k_max < 1) throw InvalidInput("recover_signed_atomic: k_max must be positive");
  if (s.degree() < 2 * k_max + 1)
    throw InvalidInput("recover_signed_atomic: need degree >= " + std::to_string(2 * k_max + 1));
  if (s.norm() == 0.0) return AtomicFit{};

  std::vector<std::string> diag;
  for (int k = 1; k <= k_max; ++k) {
    GevResult g = recover_atoms_gev(s, k, GevOptions{opts.rank_tol});
    if (g.rank > k || g.positions.empty()) {
      diag.push_back("k=" + std::to_string(k) + ": Hankel rank " + std::to_string(g.rank));
      continue;
    }
    // Merge coalesced positions.
    std::vector<Complex> pos = g.positions;
    std::sort(pos.begin(), pos.end(), [](Complex a, Complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    const double mtol = opts.merge_tol * (1.0 + positions_radius(pos));
    std::vector<Complex> merged;
    std::vector<int> counts;
    for (const auto& z : pos) {
      if (!merged.empty() && std::abs(z - merged.back() / static_cast<double>(counts.back())) <= mtol) {
        merged.back() += z;
        ++counts.back();
      } else {
        merged.push_back(z);
        counts.push_back(1);
      }
    }
    for (std::size_t i = 0; i < merged.size(); ++i) merged[i] /= static_cast<double>(counts[i]);

    bool real = true;
    for (auto& z : merged) {
      if (is_numerically_real(z))
        z = Complex(z.real(), 0.0);
      else
        real = false;
    }
    WeightFit wf = recover_weights(s, merged);
    if (opts.polish && real) {
      std::vector<double> x, w;
      for (std::size_t i = 0; i < merged.size(); ++i) {
        x.push_back(merged[i].real());
        w.push_back(wf.weights[i].real());
      }
      polish_real(s, x, w);
      for (std::size_t i = 0; i < merged.size(); ++i) merged[i] = x[i];
      wf = recover_weights(s, merged);
    }
    if (!(wf.residual <= opts.fit_tol)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "k=%d: residual %.3e > fit_tol %.3e, condition %.3e", k,
                    wf.residual, opts.fit_tol, wf.condition);
      diag.push_back(buf);
      continue;
    }
    AtomicFit fit;
    fit.k = k;
    fit.residual = wf.residual;
    fit.condition = wf.condition;
    for (std::size_t i = 0; i < merged.size(); ++i) {
      Complex w = wf.weights[i];
      if (real) w = Complex(w.real(), 0.0);
      fit.measure.atoms.push_back({merged[i], w});
    }
    std::sort(fit.measure.atoms.begin(), fit.measure.atoms.end(), [](const Atom& a, const Atom& b) {
      return a.position.real() != b.position.real() ? a.position.real() < b.position.real()
                                                    : a.position.imag() < b.position.imag();
    });
    return fit;
  }
  throw Rejection("not k_max-atomic within tolerance", diag);
}

MomentSequence atomic_measure_moments(const SignedAtomicMeasure& m, int degree) {
  if (degree < 0) throw InvalidInput("negative degree");
  std::vector<double> v(degree + 1, 0.0);
  for (int j = 0; j <= degree; ++j) {
    Complex acc = 0.0;
    for (const auto& a : m.atoms) acc += a.weight * std::pow(a.position, j);
    if (std::abs(acc.imag()) > 1e-9 * (1.0 + std::abs(acc.real())))
      throw InvalidInput("atomic measure has non-real moments");
    v[j] = acc.real();
  }
  return MomentSequence::univariate(std::move(v));
}

}  // namespace atomic
}  // namespace momentsieve
