#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "helmstab/fieldio.hpp"
#include "helmstab/sobolev.hpp"

using namespace helmstab;

namespace {

GeometryPtr cube(int n, double lo = 0.25, double hi = 0.75) {
  GeometrySpec s;
  s.subdivisions = n;
  s.omega0_lo = {lo, lo, lo};
  s.omega0_hi = {hi, hi, hi};
  return build_geometry(s);
}

BumpSpec bump(double amp = 0.5) {
  BumpSpec b;
  b.amplitude = amp;
  b.half_width = {0.2, 0.2, 0.2};
  return b;
}

}  // namespace

TEST(Geometry, CountsOnSmallGrid) {
  const auto g = cube(4, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(g->h(), 0.25);
  EXPECT_EQ(g->interior_count(), 27u);
  EXPECT_EQ(g->boundary_count(), 6u * 9u);
}

TEST(Geometry, Omega0KeepsTwoCellMargin) {
  const auto g = cube(16);
  ASSERT_FALSE(g->omega0_nodes().empty());
  for (std::size_t id : g->omega0_nodes()) {
    const Idx3 p = g->interior_ijk(id);
    for (int d = 0; d < 3; ++d) {
      EXPECT_GE(p[d], 2);
      EXPECT_LE(p[d], g->N() - 2);
    }
  }
  // Omega1 is the complement
  EXPECT_EQ(g->omega0_nodes().size() + g->omega1_nodes().size(), g->interior_count());
}

TEST(Geometry, MarginViolationRejected) {
  EXPECT_THROW(cube(16, 0.0, 1.0), GeometryError);
  EXPECT_THROW(cube(3), GeometryError);
}

TEST(Geometry, DisjointFacePatches) {
  GeometrySpec s;
  s.subdivisions = 8;
  s.gamma = Patch::face(parse_face("x0"));
  s.sigma = Patch::face(parse_face("x1"));
  const auto g = build_geometry(s);
  EXPECT_EQ(g->gamma_nodes().size(), 49u);
  EXPECT_EQ(g->sigma_nodes().size(), 49u);
  for (std::size_t i = 0; i < g->boundary_count(); ++i) EXPECT_FALSE(g->gamma_mask()[i] && g->sigma_mask()[i]);
  EXPECT_THROW(parse_face("w0"), GeometryError);
}

TEST(Sobolev, ZeroFieldHasZeroNorm) {
  const auto g = cube(8);
  const RealField f(g, Support::interior);
  for (int s : {-1, 0, 1, 2}) EXPECT_EQ(sobolev_interior_norm(f, s), 0.0);
}

TEST(Sobolev, ConstantOnTorusIsRootVolume) {
  const auto g = cube(8);
  const TorusGrid t = g->hminus1_torus();
  ComplexField f(g, t);
  f.values.setOnes();
  EXPECT_NEAR(sobolev_interior_norm(f, 0), std::sqrt(t.volume()), 1e-12);
}

TEST(Sobolev, SingleModeHminus1) {
  const auto g = cube(8);
  const TorusGrid t = g->hminus1_torus();
  const Vec3 eta{2 * t.dual_step(0), -t.dual_step(1), 3 * t.dual_step(2)};
  const Complex amp(0.7, -0.2);
  ComplexField f(g, t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Idx3 j = t.unravel(i);
    double ph = 0.0;
    for (int d = 0; d < 3; ++d) ph += eta[d] * (t.offset[d] + j[d]) * t.h;
    f[i] = amp * std::exp(Complex(0, ph));
  }
  const double e2 = eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2];
  EXPECT_NEAR(sobolev_interior_norm(f, -1), std::abs(amp) * std::sqrt(t.volume() / (1 + e2)), 1e-12);
}

TEST(Fourier, ZeroAndMean) {
  const auto g = cube(8);
  const RealField zero(g, Support::interior);
  EXPECT_EQ(std::abs(fourier_coefficient(zero, {0, 0, 0})), 0.0);
  const RealField q = bump_field(g, bump());
  const double h3 = std::pow(g->h(), 3);
  EXPECT_NEAR(fourier_coefficient(q, {0, 0, 0}).real(), h3 * q.values.sum(), 1e-15);
}

TEST(Fourier, MatchesNaiveSum) {
  const auto g = cube(12);
  const RealField q = bump_field(g, bump());
  const TorusGrid t = g->hminus1_torus();
  const CVec all = fourier_coefficients(q);
  const double h3 = std::pow(g->h(), 3);
  for (Idx3 k : {Idx3{0, 0, 0}, Idx3{1, 0, 0}, Idx3{-2, 3, 1}, Idx3{4, -4, 5}}) {
    const Vec3 eta{k[0] * t.dual_step(0), k[1] * t.dual_step(1), k[2] * t.dual_step(2)};
    Complex naive = 0;
    for (std::size_t i = 0; i < g->interior_count(); ++i) {
      const Vec3 x = g->coord(g->interior_ijk(i));
      naive += h3 * q[i] * std::exp(Complex(0, -(eta[0] * x[0] + eta[1] * x[1] + eta[2] * x[2])));
    }
    EXPECT_LT(std::abs(fourier_coefficient(q, eta) - naive), 1e-12);
    const std::size_t bin = t.index((k[0] + t.M[0]) % t.M[0], (k[1] + t.M[1]) % t.M[1], (k[2] + t.M[2]) % t.M[2]);
    EXPECT_LT(std::abs(all[static_cast<Eigen::Index>(bin)] - naive), 1e-12);
  }
  EXPECT_THROW(fourier_coefficient(q, {0.1, 0, 0}), DomainError);
}

TEST(BoundarySobolev, ZeroAndL2) {
  const auto g = cube(8);
  ComplexField phi(g, Support::boundary);
  EXPECT_EQ(boundary_sobolev_norm(phi, 1.5), 0.0);
  phi = boundary_from_function_c(g, [](const Vec3& x) { return Complex(x[0] + 2 * x[1], x[2]); });
  double l2 = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) l2 += std::norm(phi[i]);
  EXPECT_NEAR(boundary_sobolev_norm(phi, 0.0), std::sqrt(g->h() * g->h() * l2), 1e-13);
}

TEST(BoundarySobolev, EigenvectorScaling) {
  const auto g = cube(6, 0.4, 0.6);
  const BoundarySobolev bs(g);
  Eigen::SelfAdjointEigenSolver<RMat> es(bs.laplacian_dense());
  const double h = g->h();
  for (int j : {0, 7, 31, static_cast<int>(es.eigenvalues().size()) - 1}) {
    const double mu = es.eigenvalues()[j];
    const CVec v = es.eigenvectors().col(j).cast<Complex>();
    const double l2 = h * v.norm();
    for (double s : {-0.5, 0.5, 1.5})
      EXPECT_NEAR(bs.norm(v, s), std::pow(1 + mu, s / 2) * l2, 1e-10 * std::pow(1 + mu, s / 2) * l2);
  }
}

TEST(NormalDerivative, ExactCases) {
  const auto g = cube(8);
  auto tr = [&](const std::function<double(const Vec3&)>& fn) { return boundary_from_function(g, fn); };
  auto in = [&](const std::function<double(const Vec3&)>& fn) { return interior_from_function(g, fn); };
  const RealField c = normal_derivative(in([](const Vec3&) { return 3.0; }), tr([](const Vec3&) { return 3.0; }));
  EXPECT_LT(c.values.cwiseAbs().maxCoeff(), 1e-12);
  const auto x1 = [](const Vec3& x) { return x[0]; };
  const RealField d = normal_derivative(in(x1), tr(x1));
  for (std::size_t i = 0; i < g->boundary_count(); ++i) {
    const int f = g->boundary_node(i).face;
    const double want = f == 0 ? -1.0 : f == 1 ? 1.0 : 0.0;
    EXPECT_NEAR(d[i], want, 1e-12);
  }
}

TEST(NormalDerivative, SecondOrderForSine) {
  auto err = [](int n) {
    const auto g = cube(n);
    const auto fn = [](const Vec3& x) { return std::sin(kPi * x[0]); };
    const RealField d = normal_derivative(interior_from_function(g, fn), boundary_from_function(g, fn));
    double e = 0;
    for (std::size_t i = 0; i < g->boundary_count(); ++i)
      if (g->boundary_node(i).face == 0) e = std::max(e, std::abs(d[i] + kPi));
    return e;
  };
  const double e1 = err(8), e2 = err(16);
  EXPECT_LT(e2, 0.05);
  EXPECT_GT(std::log2(e1 / e2), 1.8);
}

TEST(FieldIo, RoundTrip) {
  const auto g = cube(6, 0.4, 0.6);
  const ComplexField f = interior_from_function_c(g, [](const Vec3& x) { return Complex(x[0], x[1] * x[2]); });
  const auto dir = std::filesystem::temp_directory_path() / "helmstab_fieldio";
  std::filesystem::create_directories(dir);
  const std::string stem = (dir / "f").string();
  write_field(stem, f, "f");
  const ComplexField back = read_field(stem, g);
  EXPECT_EQ(back.support, Support::interior);
  EXPECT_EQ((back.values - f.values).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(std::filesystem::exists(stem + ".json"));
}

TEST(Potential, AdmissiblePairNeedsOmega1Agreement) {
  const auto g = cube(16);
  const Potential q2 = constant_potential(g, 0.0);
  const Potential inside(bump_field(g, bump()));
  EXPECT_TRUE(admissible_pair(inside, q2));
  BumpSpec wide = bump();
  wide.half_width = {0.45, 0.45, 0.45};
  EXPECT_FALSE(admissible_pair(Potential(bump_field(g, wide)), q2));
}
