#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include "momentsieve/core.hpp"

namespace momentsieve {

void MultiIndex::check() const {
  for (int v : e_)
    if (v < 0) throw InvalidInput("multi-index entries must be non-negative");
}

MultiIndex MultiIndex::unit(std::size_t n, std::size_t i) {
  if (i >= n) throw InvalidInput("unit index out of range");
  MultiIndex u(n);
  u.e_[i] = 1;
  return u;
}

int MultiIndex::order() const { return std::accumulate(e_.begin(), e_.end(), 0); }

bool MultiIndex::divides(const MultiIndex& other) const {
  if (other.dim() != dim()) return false;
  for (std::size_t i = 0; i < e_.size(); ++i)
    if (e_[i] > other.e_[i]) return false;
  return true;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  if (a.dim() != b.dim()) throw InvalidInput("multi-index dimension mismatch");
  MultiIndex r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r.e_[i] = a.e_[i] + b.e_[i];
  return r;
}

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
  if (!b.divides(a)) throw InvalidInput("multi-index subtraction underflow");
  MultiIndex r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r.e_[i] = a.e_[i] - b.e_[i];
  return r;
}

bool operator<(const MultiIndex& a, const MultiIndex& b) {
  const int oa = a.order(), ob = b.order();
  if (oa != ob) return oa < ob;
  return a.e_ > b.e_;
}

namespace {

void compositions(int remaining, std::size_t pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (pos + 1 == cur.dim()) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    compositions(remaining - v, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

const std::vector<MultiIndex>& graded_indices(std::size_t n, int degree) {
  if (n == 0) throw InvalidInput("dimension must be positive");
  if (degree < 0) throw InvalidInput("degree must be non-negative");
  static std::mutex mu;
  static std::map<std::pair<std::size_t, int>, std::vector<MultiIndex>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, degree);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<MultiIndex> out;
  out.reserve(graded_count(n, degree));
  MultiIndex cur(n);
  for (int m = 0; m <= degree; ++m) compositions(m, 0, cur, out);
  return cache.emplace(key, std::move(out)).first->second;
}

std::size_t graded_count(std::size_t n, int degree) {
  if (degree < 0) return 0;
  return static_cast<std::size_t>(binomial(static_cast<int>(n) + degree, static_cast<int>(n)) + 0.5);
}

std::size_t graded_rank(const MultiIndex& alpha, int degree) {
  const int m = alpha.order();
  if (m > degree)
    throw InvalidInput("graded_rank: |alpha| = " + std::to_string(m) + " exceeds degree " +
                       std::to_string(degree));
  const std::size_t n = alpha.dim();
  std::size_t rank = graded_count(n, m - 1);
  int remaining = m;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const int parts = static_cast<int>(n - i - 1);
    for (int v = alpha[i] + 1; v <= remaining; ++v)
      rank += static_cast<std::size_t>(binomial(remaining - v + parts - 1, parts - 1) + 0.5);
    remaining -= alpha[i];
  }
  return rank;
}

double factorial(int n) {
  if (n < 0) throw InvalidInput("factorial of a negative number");
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double binomial(const MultiIndex& alpha, const MultiIndex& beta) {
  if (alpha.dim() != beta.dim()) throw InvalidInput("multi-index dimension mismatch");
  double r = 1.0;
  for (std::size_t i = 0; i < alpha.dim(); ++i) r *= binomial(alpha[i], beta[i]);
  return r;
}

double factorial(const MultiIndex& alpha) {
  double r = 1.0;
  for (std::size_t i = 0; i < alpha.dim(); ++i) r *= factorial(alpha[i]);
  return r;
}

}  // namespace momentsieve
