#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>

#include "momentsieve/shape.hpp"

namespace momentsieve {
namespace shape {

namespace {

std::string fmt(const char* label, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s = %.6e", label, v);
  return buf;
}

double radical_inverse(int i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * (i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return a(i) < b(i);
  return false;
}

atomic::AtomicFitOptions atomic_options(const ShapeOptions& o) {
  atomic::AtomicFitOptions a;
  a.fit_tol = o.fit_tol;
  a.rank_tol = o.rank_tol;
  return a;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Mixed-radix helpers over the per-axis grid.
std::vector<int> unrank(long idx, const std::vector<int>& dims) {
  std::vector<int> out(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    out[i] = static_cast<int>(idx % dims[i]);
    idx /= dims[i];
  }
  return out;
}

long rank_of(const std::vector<int>& v, const std::vector<int>& dims) {
  long idx = 0;
  for (std::size_t i = dims.size(); i-- > 0;) idx = idx * dims[i] + v[i];
  return idx;
}

}  // namespace

DirectionalMoments directionalize(const MomentSequence& s, const Vector& r, int jmax) {
  if (static_cast<std::size_t>(r.size()) != s.dim()) throw InvalidInput("directionalize: dimension mismatch");
  if (jmax > s.degree()) throw InvalidInput("directionalize: jmax exceeds the sequence degree");
  const double nr = r.norm();
  if (!(nr > 0.0)) throw InvalidInput("directionalize: zero direction");
  DirectionalMoments out;
  out.r = r / nr;
  std::vector<double> t(jmax + 1, 0.0);
  const auto& idx = s.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int j = idx[k].order();
    if (j > jmax) break;
    double c = factorial(j) / factorial(idx[k]);
    for (std::size_t i = 0; i < s.dim(); ++i) c *= std::pow(out.r(static_cast<Eigen::Index>(i)), idx[k][i]);
    t[j] += c * s[k];
  }
  out.t = MomentSequence::univariate(std::move(t));
  return out;
}

Projections projections_from_directional(const DirectionalMoments& t, int n, int k,
                                         const ShapeOptions& opts) {
  if (n < 1) throw InvalidInput("projections_from_directional: n must be positive");
  const MomentSequence d = monomial_derivative(t.t, MultiIndex{n});
  const atomic::AtomicFit fit = atomic::recover_signed_atomic(d, k, atomic_options(opts));
  if (!fit.measure.is_real())
    throw Rejection("complex projections", {"directions not in general position, resample"});
  Projections p;
  p.positions = fit.measure.real_positions();
  p.weights = fit.measure.real_weights();
  p.residual = fit.residual;
  p.condition = fit.condition;
  return p;
}

double low_order_defect(const Projections& p, int n) {
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    double sum = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.positions.size(); ++i) {
      const double t = p.weights[i] * std::pow(p.positions[i], j);
      sum += t;
      scale += std::abs(t);
    }
    if (scale > 0.0) worst = std::max(worst, std::abs(sum) / scale);
  }
  return worst;
}

PolytopeModel recover_polytope_vertices(const MomentSequence& s, int k,
                                        const std::vector<Vector>& directions,
                                        const ShapeOptions& opts) {
  const auto n = static_cast<int>(s.dim());
  if (static_cast<int>(directions.size()) < n + 1)
    throw InvalidInput("recover_polytope_vertices: need n+1 directions");
  PolytopeModel out;
  std::vector<Vector> dirs;
  for (const auto& r : directions) {
    DirectionalMoments t = directionalize(s, r, s.degree());
    dirs.push_back(t.r);
    out.per_direction.push_back(projections_from_directional(t, n, k, opts));
  }
  const std::size_t count = out.per_direction.front().positions.size();
  std::vector<std::string> diag;
  for (std::size_t m = 0; m < dirs.size(); ++m) {
    const std::size_t c = out.per_direction[m].positions.size();
    diag.push_back("direction " + std::to_string(m) + ": " + std::to_string(c) + " projections");
    if (c != count) throw Rejection("directions not in general position, resample", diag);
  }

  Matrix R(n, n);
  for (int i = 0; i < n; ++i) R.row(i) = dirs[i].transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(R);
  if (qr.rank() < n) throw Rejection("directions not in general position, resample", {"first n directions are dependent"});

  std::vector<int> dims(n, static_cast<int>(count));
  long total = 1;
  for (int i = 0; i < n; ++i) total *= dims[i];
  for (long c = 0; c < total; ++c) {
    const auto pick = unrank(c, dims);
    Vector xi(n);
    for (int i = 0; i < n; ++i) xi(i) = out.per_direction[i].positions[pick[i]];
    const Vector x = qr.solve(xi);
    double mismatch = 0.0;
    for (std::size_t m = n; m < dirs.size(); ++m) {
      const double p = x.dot(dirs[m]);
      double best = 1e300;
      for (double q : out.per_direction[m].positions) best = std::min(best, std::abs(p - q));
      mismatch = std::max(mismatch, best / (1.0 + std::abs(p)));
    }
    if (mismatch <= opts.match_tol) {
      out.vertices.push_back(x);
      out.max_match_error = std::max(out.max_match_error, mismatch);
    }
  }
  if (out.vertices.size() != count) {
    diag.push_back(std::to_string(out.vertices.size()) + " consistent candidates for " +
                   std::to_string(count) + " vertices");
    throw Rejection("directions not in general position, resample", diag);
  }
  std::sort(out.vertices.begin(), out.vertices.end(), lex_less);
  return out;
}

Projections recover_polytope_simple_function(const MomentSequence& s, int d_total, const Vector& r,
                                             const ShapeOptions& opts) {
  const DirectionalMoments t = directionalize(s, r, s.degree());
  return projections_from_directional(t, static_cast<int>(s.dim()), d_total, opts);
}

BoxGrid recover_box_grid(const MomentSequence& s, int k, const ShapeOptions& opts) {
  if (k < 1) throw InvalidInput("recover_box_grid: k must be positive");
  if (s.degree() < 4 * k + 1)
    throw InvalidInput("recover_box_grid: need degree >= " + std::to_string(4 * k + 1));
  BoxGrid g;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const MomentSequence d = monomial_derivative(s.axis(i), MultiIndex{1});
    const atomic::AtomicFit fit = atomic::recover_signed_atomic(d, 2 * k, atomic_options(opts));
    if (!fit.measure.is_real())
      throw Rejection("not a k-box arrangement within tolerance",
                      {"axis " + std::to_string(i) + ": complex facet coordinates"});
    g.coords.push_back(fit.measure.real_positions());
    if (static_cast<int>(g.coords.back().size()) < 2 * k)
      g.notes.push_back("axis " + std::to_string(i) + ": " + std::to_string(g.coords.back().size()) +
                        " coordinates, expected " + std::to_string(2 * k));
  }
  return g;
}

BoxArrangement recover_box_arrangement(const MomentSequence& s, int k, const BoxOptions& opts) {
  const int n = static_cast<int>(s.dim());
  if (n < 2) throw InvalidInput("recover_box_arrangement: n >= 2 required; use recover_box_grid in 1D");
  const char* kFail = "not a k-box arrangement within tolerance";
  BoxArrangement out;
  out.grid = recover_box_grid(s, k, opts.shape);
  const auto& coords = out.grid.coords;
  std::vector<std::string> diag = out.grid.notes;

  std::vector<int> dims(n), cells(n);
  int tensor_degree = 0;
  double rho = 1.0;
  for (int i = 0; i < n; ++i) {
    dims[i] = static_cast<int>(coords[i].size());
    if (dims[i] < 2) throw Rejection(kFail, {"axis " + std::to_string(i) + " has fewer than two coordinates"});
    cells[i] = dims[i] - 1;
    tensor_degree += cells[i] - 1;
    for (double c : coords[i]) rho = std::max(rho, std::abs(c));
  }
  if (s.degree() < tensor_degree)
    throw Rejection(kFail, {"grid needs degree " + std::to_string(tensor_degree) +
                                " to resolve its cells, have " + std::to_string(s.degree())});

  // Piecewise-constant values on the grid cells by least squares on all moments
  // in coordinates scaled by rho.
  const auto& idx = s.indices();
  long ncell = 1;
  for (int c : cells) ncell *= c;
  Matrix A(static_cast<Eigen::Index>(idx.size()), ncell);
  Vector rhs(static_cast<Eigen::Index>(idx.size()));
  std::vector<std::vector<double>> y(n);
  for (int i = 0; i < n; ++i)
    for (double c : coords[i]) y[i].push_back(c / rho);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (long c = 0; c < ncell; ++c) {
      const auto cell = unrank(c, cells);
      double v = 1.0;
      for (int i = 0; i < n; ++i) {
        const int p = idx[r][i] + 1;
        v *= (std::pow(y[i][cell[i] + 1], p) - std::pow(y[i][cell[i]], p)) / p;
      }
      A(static_cast<Eigen::Index>(r), c) = v;
    }
    rhs(static_cast<Eigen::Index>(r)) = s[r] * std::pow(rho, -idx[r].order() - n);
    const double rn = A.row(static_cast<Eigen::Index>(r)).norm();
    if (rn > 0.0) {
      A.row(static_cast<Eigen::Index>(r)) /= rn;
      rhs(static_cast<Eigen::Index>(r)) /= rn;
    }
  }
  const Vector h = A.colPivHouseholderQr().solve(rhs);

  // Corner weights: mixed differences of the cell values.
  long npts = 1;
  for (int d : dims) npts *= d;
  std::vector<double> w(npts, 0.0);
  double wmax = 0.0;
  for (long p = 0; p < npts; ++p) {
    const auto pt = unrank(p, dims);
    double acc = 0.0;
    for (int e = 0; e < (1 << n); ++e) {
      std::vector<int> cell(n);
      bool inside = true;
      int parity = 0;
      for (int i = 0; i < n; ++i) {
        const int bit = (e >> i) & 1;
        parity += bit;
        cell[i] = pt[i] - bit;
        inside = inside && cell[i] >= 0 && cell[i] < cells[i];
      }
      if (inside) acc += (parity % 2 ? -1.0 : 1.0) * h(rank_of(cell, cells));
    }
    w[p] = acc;
    wmax = std::max(wmax, std::abs(acc));
  }
  if (!(wmax > 0.0)) throw Rejection(kFail, {"all corner weights vanish"});

  std::vector<long> corners;
  for (long p = 0; p < npts; ++p)
    if (std::abs(w[p]) > opts.vertex_tol * wmax) corners.push_back(p);

  // Corners sharing a facet coordinate belong to the same box.
  UnionFind uf(static_cast<int>(corners.size()));
  for (int i = 0; i < n; ++i) {
    std::vector<int> first(dims[i], -1);
    for (std::size_t c = 0; c < corners.size(); ++c) {
      const int coord = unrank(corners[c], dims)[i];
      if (first[coord] < 0)
        first[coord] = static_cast<int>(c);
      else
        uf.unite(static_cast<int>(c), first[coord]);
    }
  }
  std::map<int, std::vector<long>> groups;
  for (std::size_t c = 0; c < corners.size(); ++c) groups[uf.find(static_cast<int>(c))].push_back(corners[c]);

  for (const auto& [root, members] : groups) {
    (void)root;
    std::vector<std::vector<int>> used(n);
    for (long p : members) {
      const auto pt = unrank(p, dims);
      for (int i = 0; i < n; ++i)
        if (std::find(used[i].begin(), used[i].end(), pt[i]) == used[i].end()) used[i].push_back(pt[i]);
    }
    bool ok = members.size() == (1u << n);
    for (int i = 0; ok && i < n; ++i) ok = used[i].size() == 2;
    if (!ok) {
      diag.push_back("corner group of size " + std::to_string(members.size()) + " is not a box");
      throw Rejection(kFail, diag);
    }
    gen::Box b{Vector(n), Vector(n), 0.0};
    std::vector<int> lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(used[i][0], used[i][1]);
      hi[i] = std::max(used[i][0], used[i][1]);
      b.lower(i) = coords[i][lo[i]];
      b.upper(i) = coords[i][hi[i]];
    }
    // Sign pattern (-1)^{#upper coordinates} times a common coefficient.
    const double ref = w[rank_of(lo, dims)];
    for (long p : members) {
      const auto pt = unrank(p, dims);
      int uppers = 0;
      for (int i = 0; i < n; ++i) uppers += pt[i] == hi[i];
      const double expect = (uppers % 2 ? -1.0 : 1.0) * ref;
      if (std::abs(w[p] - expect) > 1e-2 * std::abs(ref)) {
        diag.push_back("corner signs inconsistent with a single box");
        throw Rejection(kFail, diag);
      }
    }
    b.coef = ref;
    out.boxes.push_back(b);
  }
  if (static_cast<int>(out.boxes.size()) != k) {
    diag.push_back("assembled " + std::to_string(out.boxes.size()) + " boxes");
    throw Rejection(kFail, diag);
  }

  // Coefficients by least squares against the moments, same scaling as above.
  std::vector<gen::Box> scaled;
  for (const auto& b : out.boxes) scaled.push_back({b.lower / rho, b.upper / rho, 1.0});
  Matrix B(static_cast<Eigen::Index>(idx.size()), k);
  Vector t(static_cast<Eigen::Index>(idx.size()));
  for (int j = 0; j < k; ++j) B.col(j) = gen::box_moments({scaled[j]}, s.degree()).vector();
  for (std::size_t r = 0; r < idx.size(); ++r) t(static_cast<Eigen::Index>(r)) = s[r] * std::pow(rho, -idx[r].order() - n);
  const Vector c = B.colPivHouseholderQr().solve(t);
  out.residual = (B * c - t).norm() / t.norm();
  for (int j = 0; j < k; ++j) out.boxes[j].coef = c(j);
  if (out.residual > opts.fit_tol) {
    diag.push_back(fmt("moment residual", out.residual));
    throw Rejection(kFail, diag);
  }
  std::sort(out.boxes.begin(), out.boxes.end(),
            [](const gen::Box& a, const gen::Box& b) { return lex_less(a.lower, b.lower); });

  // Direction with well separated grid projections; optional vertex confirmation along it.
  std::vector<Vector> pts;
  for (long p = 0; p < npts; ++p) {
    const auto pt = unrank(p, dims);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = coords[i][pt[i]];
    pts.push_back(x);
  }
  out.direction = max_min_gap_direction(pts, opts.direction_candidates);
  const int atoms = k * (1 << n);
  if (opts.projection_check && s.degree() >= 2 * atoms + 1) {
    try {
      const Projections pr =
          projections_from_directional(directionalize(s, out.direction, s.degree()), n, atoms, opts.shape);
      double err = 0.0;
      for (const auto& b : out.boxes)
        for (int e = 0; e < (1 << n); ++e) {
          double proj = 0.0;
          for (int i = 0; i < n; ++i) proj += out.direction(i) * ((e >> i) & 1 ? b.upper(i) : b.lower(i));
          double best = 1e300;
          for (double q : pr.positions) best = std::min(best, std::abs(q - proj));
          err = std::max(err, best);
        }
      out.projection_checked = true;
      out.projection_error = err;
    } catch (const std::exception&) {
      out.projection_checked = false;
    }
  }
  return out;
}

std::vector<Vector> halton_directions(std::size_t n, int count) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (n < 1 || n > 12) throw InvalidInput("halton_directions: 1 <= n <= 12");
  std::vector<Vector> out;
  for (int i = 1; static_cast<int>(out.size()) < count; ++i) {
    Vector r(static_cast<Eigen::Index>(n));
    if (n == 1) {
      r(0) = 1.0;
    } else if (n == 2) {
      const double th = M_PI * radical_inverse(i, 2);
      r << std::cos(th), std::sin(th);
    } else if (n == 3) {
      const double z = 2.0 * radical_inverse(i, 2) - 1.0, ph = M_PI * radical_inverse(i, 3);
      const double q = std::sqrt(std::max(0.0, 1.0 - z * z));
      r << q * std::cos(ph), q * std::sin(ph), z;
    } else {
      for (std::size_t j = 0; j < n; ++j) r(static_cast<Eigen::Index>(j)) = 2.0 * radical_inverse(i, primes[j]) - 1.0;
    }
    if (r.norm() < 1e-3) continue;
    out.push_back(r.normalized());
  }
  return out;
}

Vector max_min_gap_direction(const std::vector<Vector>& points, int count) {
  if (points.empty()) throw InvalidInput("max_min_gap_direction: no points");
  const auto n = static_cast<std::size_t>(points.front().size());
  Vector best;
  double best_gap = -1.0;
  for (const auto& r : halton_directions(n, count)) {
    std::vector<double> p;
    for (const auto& x : points) p.push_back(x.dot(r));
    std::sort(p.begin(), p.end());
    double gap = 1e300;
    for (std::size_t i = 1; i < p.size(); ++i) gap = std::min(gap, p[i] - p[i - 1]);
    if (gap > best_gap) {
      best_gap = gap;
      best = r;
    }
  }
  return best;
}

std::vector<Vector> random_directions(std::size_t n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nrm;
  std::vector<Vector> out;
  while (static_cast<int>(out.size()) < count) {
    Vector r(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) r(static_cast<Eigen::Index>(i)) = nrm(rng);
    if (r.norm() < 1e-6) continue;
    out.push_back(r.normalized());
  }
  return out;
}

}  // namespace shape
}  // namespace momentsieve
