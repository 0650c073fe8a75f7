#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "helmstab/cgo.hpp"
#include "helmstab/records.hpp"

using namespace helmstab;

namespace {

GeometryPtr cube(int n) {
  GeometrySpec s;
  s.subdivisions = n;
  return build_geometry(s);
}

Complex dot(const CVec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm2(const Vec3& a) { return a[0] * a[0] + a[1] * a[1] + a[2] * a[2]; }

Potential bump2(GeometryPtr g) {
  BumpSpec b;
  b.amplitude = 2.0;
  return Potential(bump_field(g, b));
}

}  // namespace

TEST(FrequencyPair, WorkedExample) {
  const FrequencyPair p = make_frequency_pair({2, 0, 0}, 3, 5);
  EXPECT_NEAR(p.eta1[1], std::sqrt(14.0), 1e-14);
  EXPECT_NEAR(p.eta2[2], std::sqrt(10.0), 1e-14);
  EXPECT_NEAR(std::abs(p.xi1[0] - Complex(1, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(p.xi1[1] - Complex(std::sqrt(14.0), 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(p.xi1[2] - Complex(0, std::sqrt(10.0))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(dot(p.xi1, p.xi1) - 5.0), 0.0, 1e-12);
}

TEST(FrequencyPair, ZeroEta) {
  const FrequencyPair p = make_frequency_pair({0, 0, 0}, 4, 7);
  EXPECT_NEAR(norm2(p.eta1), 16 + 7, 1e-12);
  EXPECT_NEAR(norm2(p.eta2), 16, 1e-12);
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(std::abs(p.xi1[d] - Complex(p.eta1[d], p.eta2[d])), 0.0, 1e-14);
}

TEST(FrequencyPair, RandomDrawsSatisfyInvariants) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-20, 20), t(1, 100), l(1, 200);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 eta{u(rng), u(rng), u(rng)};
    const FrequencyPair p = make_frequency_pair(eta, t(rng), l(rng));
    const double scale = std::max(1.0, norm2(eta) + p.tau * p.tau + p.lambda);
    EXPECT_LT(std::abs(dot(p.xi1, p.xi1) - p.lambda), 1e-12 * scale);
    EXPECT_LT(std::abs(dot(p.xi2, p.xi2) - p.lambda), 1e-12 * scale);
    for (int d = 0; d < 3; ++d) EXPECT_LT(std::abs(p.xi1[d] + p.xi2[d] - eta[d]), 1e-12 * std::sqrt(scale));
    EXPECT_LT(frequency_pair_defect(p), 1e-12 * scale);
  }
}

TEST(Faddeev, ZeroInZeroOut) {
  const auto g = cube(8);
  const ComplexField f(g, g->cgo_torus());
  const ComplexField u = faddeev_apply(make_frequency_pair({1, 0, 0}, 5, 10).xi1, 10, f);
  EXPECT_EQ(u.values.cwiseAbs().maxCoeff(), 0.0);
}

// a few shifted modes against the symbol evaluated by hand: (-Delta + 2i xi.grad)
// sends e^{ik.x} to (k.k - 2 xi.k) e^{ik.x}, its grid version to
// (sum 4/h^2 sin^2(h (k - xi)/2) - lambda) e^{ik.x}
TEST(Faddeev, ShiftedModesAgainstHandSymbol) {
  const auto g = cube(8);
  const TorusGrid t = g->cgo_torus();
  const double lam = 10.0, h = g->h();
  const CVec3 xi = make_frequency_pair({1.5, 0, 0}, 6, lam).xi1;
  for (SymbolKind kind : {SymbolKind::continuum, SymbolKind::grid}) {
    const FaddeevMultiplier m(t, xi, lam, kind);
    ComplexField f(g, t), want(g, t);
    const std::vector<std::pair<Idx3, Complex>> modes{{{0, 0, 0}, {1, 0}}, {{1, 2, 0}, {0.3, -0.5}}, {{5, 3, 7}, {0, 2}}};
    for (const auto& [bin, a] : modes) {
      const Vec3 k = m.frequency(bin);
      Complex P;
      if (kind == SymbolKind::continuum) {
        P = norm2(k);
        for (int d = 0; d < 3; ++d) P -= 2.0 * xi[d] * k[d];
      } else {
        P = -lam;
        for (int d = 0; d < 3; ++d) P += 4 / (h * h) * std::pow(std::sin(h * (k[d] - xi[d]) / 2.0), 2);
      }
      for (std::size_t i = 0; i < t.size(); ++i) {
        const Idx3 j = t.unravel(i);
        double ph = 0;
        for (int d = 0; d < 3; ++d) ph += k[d] * (t.offset[d] + j[d]) * h;
        f[i] += a * std::exp(Complex(0, ph));
        want[i] += a * std::exp(Complex(0, ph)) / P;
      }
    }
    const ComplexField u = m.apply(f);
    EXPECT_LT((u.values - want.values).cwiseAbs().maxCoeff(), 1e-10 * want.values.cwiseAbs().maxCoeff());
  }
}

// L^2 gain like 1/|Im xi|, H^2 gain at most of order lambda |Im xi|
TEST(Faddeev, OperatorNormScaling) {
  const auto g = cube(16);
  const double lam = 20.0;
  for (SymbolKind kind : {SymbolKind::continuum, SymbolKind::grid}) {
    double lo = INFINITY, hi = 0;
    for (double tau : {8.0, 16.0, 32.0, 64.0}) {
      const FrequencyPair p = make_frequency_pair({2, 0, 0}, tau, lam);
      const CVec3 xi = kind == SymbolKind::grid ? adapt_to_grid(p, g->h()).xi1 : p.xi1;
      const double im = std::sqrt(xi[0].imag() * xi[0].imag() + xi[1].imag() * xi[1].imag() + xi[2].imag() * xi[2].imag());
      const FaddeevMultiplier m(g->cgo_torus(), xi, lam, kind);
      lo = std::min(lo, m.norm() * im);
      hi = std::max(hi, m.norm() * im);
      EXPECT_LE(m.h2_norm(), 0.1 * lam * im);
    }
    EXPECT_LT(hi, 0.5);
    EXPECT_LT(hi / lo, 2.0);
  }
}

TEST(Cgo, ZeroPotentialIsPlaneWave) {
  const auto g = cube(8);
  const Potential z = constant_potential(g, 0.0);
  const CgoSolution s = solve_cgo_pair(z, z, make_frequency_pair({0, 0, 0}, 4, 10), {}).first;
  EXPECT_EQ(s.w.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(s.iterations, 1);
}

TEST(Cgo, RemainderDecayAndResidual) {
  const auto g = cube(12);
  const Potential q = bump2(g);
  ASSERT_NEAR(q.sup_norm(), 2.0, 1e-12);
  std::vector<double> im, w;
  for (double tau : {8.0, 16.0, 32.0}) {
    const auto [s1, s2] = solve_cgo_pair(q, q, make_frequency_pair({2, 0, 0}, tau, 20), {});
    EXPECT_LE(s1.iterations, 30);
    EXPECT_LE(s1.residual, 1e-6);
    im.push_back(s1.im_xi);
    w.push_back(s1.w_norm_X);
  }
  EXPECT_LE(fit_scaling(im, w).slope, -0.9);
}

TEST(ProductRemainder, ZeroWhenBothRemaindersVanish) {
  const auto g = cube(8);
  const Potential z = constant_potential(g, 0.0);
  const auto [s1, s2] = solve_cgo_pair(z, z, make_frequency_pair({1, 1, 0}, 5, 10), {});
  const ProductRemainder r = cgo_product_remainder(s1, s2);
  EXPECT_EQ(r.rho.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(r.identity_defect, 1e-12);
}

// the tau^-1 rate needs h tau small; coarser grids flatten the tail
TEST(ProductRemainder, IdentityAndDecay) {
  const auto g = cube(32);
  BumpSpec b;
  b.amplitude = -1.0;
  b.center = {0.45, 0.5, 0.55};
  const Potential q1 = bump2(g), q2(bump_field(g, b));
  std::vector<double> taus, l1;
  for (double tau : {8.0, 16.0, 32.0, 64.0}) {
    const auto [s1, s2] = solve_cgo_pair(q1, q2, make_frequency_pair({kPi, 0, 0}, tau, 15), {});
    const ProductRemainder r = cgo_product_remainder(s1, s2);
    EXPECT_LT(r.identity_defect, 1e-12);
    taus.push_back(tau);
    l1.push_back(r.l1_omega0);
  }
  const double slope = fit_scaling(taus, l1).slope;
  EXPECT_LT(slope, -0.8);
  EXPECT_GT(slope, -1.2);
}

TEST(Varkappa, FitRecoversExponent) {
  std::vector<double> im{2, 4, 8, 16}, un;
  for (double x : im) un.push_back(3.0 * std::exp(0.7 * x));
  EXPECT_NEAR(fit_varkappa(im, un), 0.7, 1e-12);
}
