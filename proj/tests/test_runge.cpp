#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "helmstab/runge.hpp"

using namespace helmstab;

namespace {

struct Fixture {
  GeometryPtr g;
  Potential q;
  std::shared_ptr<DirichletSolver> solver;
  TraceBasisPtr basis;
  RungeOperator op;
};

Fixture make(int k, int n = 8) {
  GeometrySpec s;
  s.subdivisions = n;
  s.gamma = Patch::face(parse_face("x0"));
  Fixture f;
  f.g = build_geometry(s);
  BumpSpec b;
  b.half_width = {0.2, 0.2, 0.2};
  f.q = Potential(bump_field(f.g, b));
  f.solver = std::make_shared<DirichletSolver>(f.q, 10.0);
  f.basis = build_trace_basis(f.g, f.g->gamma_mask(), k, 1.5);
  f.op = assemble_runge_operator(*f.solver, f.basis);
  return f;
}

CVec random_u0(const Fixture& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  CVec u(f.op.T.rows());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = Complex(n(rng), n(rng));
  return u;
}

double l2(const Fixture& f, const CVec& v) { return std::pow(f.g->h(), 1.5) * v.norm(); }

}  // namespace

TEST(RungeOperator, SingleColumnIsOneSolve) {
  const Fixture f = make(1);
  ASSERT_EQ(f.op.T.cols(), 1);
  const CVec u = f.solver->solve(CVec(), f.basis->vectors.col(0).cast<Complex>());
  const auto& o0 = f.g->omega0_nodes();
  for (std::size_t i = 0; i < o0.size(); ++i)
    EXPECT_EQ(f.op.T(static_cast<Eigen::Index>(i), 0), u[static_cast<Eigen::Index>(o0[i])].real());
}

TEST(RungeOperator, LeftVectorsOrthonormal) {
  const Fixture f = make(12);
  const double h3 = std::pow(f.g->h(), 3);
  for (int i = 0; i < f.op.size(); ++i)
    for (int j = 0; j < f.op.size(); ++j)
      EXPECT_NEAR(h3 * f.op.left_vector(i).dot(f.op.left_vector(j)), i == j ? 1.0 : 0.0, 1e-10);
}

TEST(RungeOperator, InjectiveOnSmallGrid) {
  const Fixture f = make(12);
  Eigen::JacobiSVD<RMat> svd(f.op.T);
  EXPECT_GT(svd.singularValues()[svd.singularValues().size() - 1], 0.0);
  EXPECT_GT(f.op.sigma[f.op.size() - 1], 1e-14 * f.op.sigma[0]);
}

TEST(Runge, LargeThresholdKeepsNothing) {
  const Fixture f = make(12);
  const CVec u0 = random_u0(f, 1);
  const RungeResult r = runge_approximate(f.op, u0, 2 * f.op.sigma[0]);
  EXPECT_EQ(r.kept, 0);
  EXPECT_EQ(r.phi_norm, 0.0);
  EXPECT_EQ((r.defect - u0).cwiseAbs().maxCoeff(), 0.0);
  // the part of u0 inside span(u_j), by least squares against T directly
  const RMat& T = f.op.T;
  const CVec proj = T.cast<Complex>() * T.cast<Complex>().colPivHouseholderQr().solve(u0);
  EXPECT_LT((r.defect_in_span - proj).cwiseAbs().maxCoeff(), 1e-10 * u0.cwiseAbs().maxCoeff());
}

TEST(Runge, ZeroThresholdLeavesOrthogonalComplement) {
  const Fixture f = make(12);
  const CVec u0 = random_u0(f, 2);
  const RungeResult r = runge_approximate(f.op, u0, 0.0);
  EXPECT_EQ(r.kept, f.op.size());
  const CMat Tc = f.op.T.cast<Complex>();
  EXPECT_LT((Tc.adjoint() * r.defect).cwiseAbs().maxCoeff(), 1e-10 * (Tc.adjoint() * u0).cwiseAbs().maxCoeff());
  // u0 already in the range: nothing left over
  CVec c(f.op.size());
  for (int j = 0; j < c.size(); ++j) c[j] = Complex(std::cos(j), std::sin(2 * j));
  const CVec inrange = f.op.T.cast<Complex>() * c;
  const RungeResult z = runge_approximate(f.op, inrange, 0.0);
  EXPECT_LT(z.defect_norm, 1e-10 * z.u0_norm);
}

TEST(Runge, ExactInequalitiesOnRandomInputs) {
  const Fixture f = make(24);
  for (std::uint64_t seed = 3; seed < 8; ++seed) {
    const CVec u0 = random_u0(f, seed);
    for (int j : {0, 3, 10, 20}) {
      const double t = f.op.sigma[j] * 0.999;
      const RungeResult r = runge_approximate(f.op, u0, t);
      EXPECT_LE(r.phi_norm * t, r.u0_norm * (1 + 1e-10));
      // T phi_t against the approximant and v_t orthogonal to it
      const CVec Tphi = f.op.T.cast<Complex>() * r.coeffs;
      EXPECT_LT((Tphi - r.approximant).cwiseAbs().maxCoeff(), 1e-10 * u0.cwiseAbs().maxCoeff());
      const double h3 = std::pow(f.g->h(), 3);
      EXPECT_LT(std::abs(h3 * Tphi.dot(u0 - Tphi)), 1e-10 * l2(f, Tphi) * l2(f, u0 - Tphi));
    }
  }
}

TEST(Runge, TradeoffIsMonotone) {
  const Fixture f = make(24);
  const CVec u0 = random_u0(f, 9);
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(f.op.sigma[0] * std::pow(10.0, -0.8 * i));  // decreasing t
  const auto c = runge_tradeoff_curve(f.op, u0, grid);
  for (std::size_t i = 1; i < c.size(); ++i) {
    EXPECT_LE(c[i].defect_norm, c[i - 1].defect_norm * (1 + 1e-12));
    EXPECT_GE(c[i].phi_norm, c[i - 1].phi_norm * (1 - 1e-12));
  }
  // endpoints: t above sigma_0 keeps nothing, the last point keeps everything above its t
  EXPECT_EQ(c.front().kept, 0);
  EXPECT_NEAR(c.front().defect_norm, l2(f, u0), 1e-12 * l2(f, u0));
  ASSERT_EQ(c.back().kept, f.op.size());
  const CMat Tc = f.op.T.cast<Complex>();
  // plain Householder: no rank cut, whatever the conditioning of T
  const CMat Q = Tc.householderQr().householderQ() * CMat::Identity(Tc.rows(), Tc.cols());
  const CVec perp = u0 - Q * (Q.adjoint() * u0);
  EXPECT_NEAR(c.back().defect_norm, l2(f, perp), 1e-10 * l2(f, u0));
}

TEST(Runge, ThresholdLog) {
  EXPECT_NEAR(runge_threshold_log(0.5, 1.0), 0.5 * std::log(0.5) - 4 * std::exp(2.0), 1e-14);
  EXPECT_THROW(runge_threshold_log(0.0, 1.0), DomainError);
}
