#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "helmstab/spectral.hpp"

using namespace helmstab;

namespace {

GeometryPtr cube(int n) {
  GeometrySpec s;
  s.subdivisions = n;
  s.omega0_lo = {0.375, 0.375, 0.375};
  s.omega0_hi = {0.625, 0.625, 0.625};
  return build_geometry(s);
}

// closed-form spectrum of the 7-point Dirichlet Laplacian, sorted by distance to lambda
std::vector<double> closed_form_near(int n, double lambda, int m) {
  const double h = 1.0 / n;
  std::vector<double> one;
  for (int k = 1; k < n; ++k) one.push_back(4 / (h * h) * std::pow(std::sin(k * kPi * h / 2), 2));
  std::vector<double> all;
  for (double a : one)
    for (double b : one)
      for (double c : one) all.push_back(a + b + c);
  std::sort(all.begin(), all.end(), [&](double x, double y) { return std::abs(x - lambda) < std::abs(y - lambda); });
  all.resize(static_cast<std::size_t>(m));
  return all;
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Eigenpairs, SeparableClosedForm) {
  const int n = 8;
  const auto g = cube(n);
  for (double lam : {10.0, 75.0, 200.0}) {
    const SpectralWindow w = eigenpairs_near(constant_potential(g, 0.0), lam, 5, 500, 1e-12);
    const auto want = sorted(closed_form_near(n, lam, 5));
    const auto got = sorted(w.eigenvalues);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-10 * want[i]);
  }
}

TEST(Eigenpairs, ConstantShift) {
  const auto g = cube(8);
  const double c = 2.5, lam = 60.0;
  const SpectralWindow w0 = eigenpairs_near(constant_potential(g, 0.0), lam, 4, 500, 1e-12);
  const SpectralWindow wc = eigenpairs_near(constant_potential(g, c), lam + c, 4, 500, 1e-12);
  const auto a = sorted(w0.eigenvalues), b = sorted(wc.eigenvalues);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], a[i] + c, 1e-9);
}

TEST(Eigenpairs, SingleNearest) {
  const auto g = cube(8);
  const SpectralWindow w = eigenpairs_near(constant_potential(g, 0.0), 33.0, 1, 500, 1e-12);
  ASSERT_EQ(w.eigenvalues.size(), 1u);
  EXPECT_NEAR(w.eigenvalues[0], closed_form_near(8, 33.0, 1)[0], 1e-9);
  EXPECT_NEAR(w.distance, std::abs(w.eigenvalues[0] - 33.0), 1e-12);
}

TEST(Weights, ELambda) {
  EXPECT_EQ(e_lambda_from_distance(2.0), 1.0);
  EXPECT_EQ(e_lambda_from_distance(0.25), 4.0);
  EXPECT_EQ(e_lambda_from_distance(1.0), 1.0);
}

TEST(Weights, BLambda) {
  EXPECT_NEAR(b_lambda(1e-14), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(b_lambda(4.0), 1.75674735509421, 1e-13);
  double prev = b_lambda(1e-14);
  for (double l = 0.5; l < 400; l *= 1.3) {
    const double b = b_lambda(l);
    EXPECT_GT(b, prev);
    prev = b;
  }
}

TEST(Weights, Prefactor) {
  EXPECT_NEAR(modulus_prefactor(1.0, 1.0, Variant::dirichlet), std::sqrt(2 * std::cosh(0.5)), 1e-14);
  const double p1 = modulus_prefactor(7.0, 1.5, Variant::dirichlet), p2 = modulus_prefactor(7.0, 3.0, Variant::dirichlet);
  EXPECT_NEAR(p2 / p1, 8.0, 1e-12);
  EXPECT_EQ(modulus_prefactor(7.0, 1.5, Variant::impedance), modulus_prefactor(7.0, 30.0, Variant::impedance));
  EXPECT_NEAR(modulus_prefactor(7.0, 1.0, Variant::impedance), std::pow(7.0, 6) * b_lambda(7.0), 1e-6);
}

TEST(Resolvent, EigenvectorInput) {
  const auto g = cube(8);
  const Potential q = constant_potential(g, 0.0);
  const double lam = 30.0;
  const DirichletSolver s(q, lam);
  const SpectralWindow w = eigenpairs_near(q, lam, 2, 500, 1e-13);
  for (int j = 0; j < 2; ++j) {
    const RealField f(g, Support::interior, w.vectors.col(j));
    const ResolventReport r = check_resolvent_bound(s, f);
    EXPECT_NEAR(r.l2_ratio, 1.0 / std::abs(w.eigenvalues[static_cast<std::size_t>(j)] - lam), 1e-8);
  }
}

TEST(Resolvent, RandomInputsBoundedByDistance) {
  const auto g = cube(8);
  BumpSpec b;
  b.half_width = {0.1, 0.1, 0.1};
  const Potential q(bump_field(g, b));
  const double lam = 45.0;
  const DirichletSolver s(q, lam);
  Eigen::SelfAdjointEigenSolver<RMat> es(RMat(s.matrix()), Eigen::EigenvaluesOnly);
  const double dist = es.eigenvalues().cwiseAbs().minCoeff();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int t = 0; t < 5; ++t) {
    RealField f(g, Support::interior);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = n(rng);
    EXPECT_LE(check_resolvent_bound(s, f).l2_ratio, 1.0 / dist + 1e-10);
  }
}

TEST(Resolvent, SupRatioAttainsInverseDistance) {
  const auto g = cube(8);
  const Potential q = constant_potential(g, 0.3);
  const double lam = 47.0;
  const DirichletSolver s(q, lam);
  Eigen::SelfAdjointEigenSolver<RMat> es(RMat(s.matrix()), Eigen::EigenvaluesOnly);
  const double dist = es.eigenvalues().cwiseAbs().minCoeff();
  const SupRatio r = resolvent_sup_ratio(s);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.0 / dist, 1e-8 / dist);
}

TEST(Admissible, RadiusFromDistanceAndKappa0) {
  const auto g = cube(8);
  const Potential q0 = constant_potential(g, 0.0);
  const Potential q = constant_potential(g, 0.4);
  EXPECT_TRUE(in_admissible_class(q, q0, 1.0, 1e300));
  EXPECT_FALSE(in_admissible_class(q, q0, 0.3, 1e300));
  EXPECT_FALSE(in_admissible_class(q, q0, 1.0, 0.2));
}
