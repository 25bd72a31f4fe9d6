#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

#include "momentsieve/atomic.hpp"

using namespace momentsieve;
using namespace momentsieve::atomic;

namespace {

MomentSequence power_sums(const std::vector<double>& x, const std::vector<double>& w, int d) {
  std::vector<double> v(d + 1, 0.0);
  for (int j = 0; j <= d; ++j)
    for (std::size_t i = 0; i < x.size(); ++i) v[j] += w[i] * std::pow(x[i], j);
  return MomentSequence::univariate(v);
}

std::vector<double> sorted_real(const std::vector<Complex>& z) {
  std::vector<double> r;
  for (auto c : z) r.push_back(c.real());
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

TEST(Gev, OnePlusPowersOfTwo) {
  auto s = power_sums({1.0, 2.0}, {1.0, 1.0}, 5);
  auto g = recover_atoms_gev(s, 2);
  EXPECT_EQ(g.rank, 2);
  auto x = sorted_real(g.positions);
  ASSERT_EQ(x.size(), 2u);
  EXPECT_NEAR(x[0], 1.0, 1e-12);
  EXPECT_NEAR(x[1], 2.0, 1e-12);
}

TEST(Gev, SignedWeights) {
  auto s = power_sums({3.0, 5.0}, {1.0, -2.0}, 5);
  auto fit = recover_signed_atomic(s, 2);
  ASSERT_EQ(fit.measure.size(), 2u);
  EXPECT_NEAR(fit.measure.atoms[0].position.real(), 3.0, 1e-10);
  EXPECT_NEAR(fit.measure.atoms[1].position.real(), 5.0, 1e-10);
  EXPECT_NEAR(fit.measure.atoms[0].weight.real(), 1.0, 1e-9);
  EXPECT_NEAR(fit.measure.atoms[1].weight.real(), -2.0, 1e-9);
}

TEST(Gev, RankBelowBudget) {
  auto s = power_sums({0.5}, {2.0}, 7);
  auto g = recover_atoms_gev(s, 3);
  EXPECT_EQ(g.rank, 1);
  ASSERT_EQ(g.positions.size(), 1u);
  EXPECT_NEAR(g.positions[0].real(), 0.5, 1e-12);
  EXPECT_THROW(recover_atoms_gev(s, 4), InvalidInput);
}

TEST(KernelRoute, TwoAtoms) {
  auto s = power_sums({1.0, 2.0}, {1.0, 1.0}, 4);
  auto x = sorted_real(recover_atoms_kernel(s, 2));
  ASSERT_EQ(x.size(), 2u);
  EXPECT_NEAR(x[0], 1.0, 1e-10);
  EXPECT_NEAR(x[1], 2.0, 1e-10);
}

TEST(KernelRoute, EmptyAndDegenerateKernels) {
  auto three = power_sums({-1.0, 0.5, 2.0}, {1.0, 1.0, 1.0}, 4);
  try {
    recover_atoms_kernel(three, 2);
    FAIL();
  } catch (const Rejection& r) {
    EXPECT_EQ(r.reason(), "more data or atoms needed");
  }
  auto one = power_sums({0.7}, {1.0}, 4);
  try {
    recover_atoms_kernel(one, 2);
    FAIL();
  } catch (const Rejection& r) {
    EXPECT_EQ(r.reason(), "degenerate, reduce k");
  }
}

TEST(Weights, ConditionMatchesDirectSvd) {
  std::vector<double> x = {-0.8, 0.1, 1.5};
  auto s = power_sums(x, {1.0, 2.0, -0.5}, 7);
  std::vector<Complex> pos(x.begin(), x.end());
  auto wf = recover_weights(s, pos);
  // Direct: rows j scaled by rho^-j with rho = max |x|.
  const double rho = 1.5;
  Matrix V(8, 3);
  for (int j = 0; j <= 7; ++j)
    for (int i = 0; i < 3; ++i) V(j, i) = std::pow(x[i] / rho, j);
  Eigen::JacobiSVD<Matrix> svd(V);
  const double cond = svd.singularValues()(0) / svd.singularValues()(2);
  EXPECT_NEAR(wf.condition, cond, 1e-8 * cond);
  EXPECT_NEAR(wf.weights[1].real(), 2.0, 1e-10);
  EXPECT_LE(wf.residual, 1e-13);
}

TEST(Weights, CoalescingAtomsAreFlaggedByCondition) {
  auto near = recover_weights(power_sums({1.0, 1.001}, {1.0, 1.0}, 5), {1.0, 1.001});
  auto far = recover_weights(power_sums({-1.0, 1.0}, {1.0, 1.0}, 5), {-1.0, 1.0});
  EXPECT_GT(near.condition, 1e3);
  EXPECT_LT(far.condition, 1e2);
}

TEST(SignedAtomic, ConjugatePair) {
  SignedAtomicMeasure m;
  m.atoms = {{Complex(1.0, 1.0), Complex(0.5, -0.25)}, {Complex(1.0, -1.0), Complex(0.5, 0.25)}};
  auto s = atomic_measure_moments(m, 5);
  auto fit = recover_signed_atomic(s, 2);
  ASSERT_EQ(fit.measure.size(), 2u);
  EXPECT_FALSE(fit.measure.is_real());
  EXPECT_NEAR(fit.measure.atoms[0].position.imag(), -1.0, 1e-10);
  EXPECT_NEAR(fit.measure.atoms[0].weight.imag(), 0.25, 1e-10);
}

TEST(SignedAtomic, GaussianMomentsAreRejected) {
  // Moments of the standard normal are not 3-atomic.
  auto s = MomentSequence::univariate({1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0});
  try {
    recover_signed_atomic(s, 3);
    FAIL();
  } catch (const Rejection& r) {
    EXPECT_EQ(r.reason(), "not k_max-atomic within tolerance");
    EXPECT_FALSE(r.diagnostics().empty());
  }
}

TEST(SignedAtomic, RoundTripProperty) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> pos(-5.0, 5.0), mag(0.5, 2.0);
  std::uniform_int_distribution<int> kk(1, 5);
  double worst_x = 0.0, worst_w = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int k = kk(rng);
    std::vector<double> x;
    while (static_cast<int>(x.size()) < k) {
      double c = pos(rng);
      bool ok = true;
      for (double y : x) ok = ok && std::abs(y - c) >= 0.1;
      if (ok) x.push_back(c);
    }
    std::sort(x.begin(), x.end());
    std::vector<double> w;
    for (int i = 0; i < k; ++i) w.push_back(mag(rng) * (rng() % 2 ? 1.0 : -1.0));
    auto fit = recover_signed_atomic(power_sums(x, w, 2 * k + 1), k);
    ASSERT_EQ(static_cast<int>(fit.measure.size()), k) << "trial " << trial;
    for (int i = 0; i < k; ++i) {
      worst_x = std::max(worst_x, std::abs(fit.measure.atoms[i].position.real() - x[i]));
      worst_w = std::max(worst_w, std::abs(fit.measure.atoms[i].weight.real() - w[i]) / std::abs(w[i]));
    }
  }
  EXPECT_LE(worst_x, 1e-7);
  EXPECT_LE(worst_w, 1e-6);
}
