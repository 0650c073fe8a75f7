#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "helmstab/reconstruct.hpp"
#include "helmstab/records.hpp"

using namespace helmstab;

namespace {

GeometryPtr cube(int n, double lo = 0.125, double hi = 0.875) {
  GeometrySpec s;
  s.subdivisions = n;
  s.omega0_lo = {lo, lo, lo};
  s.omega0_hi = {hi, hi, hi};
  return build_geometry(s);
}

BumpSpec smooth_bump(double amp = 0.5, double w = 0.3) {
  BumpSpec b;
  b.amplitude = amp;
  b.half_width = {w, w, w};
  return b;
}

std::shared_ptr<const BoundaryOperator> dtn_difference(const Potential& q1, const Potential& q2, double lam) {
  auto d1 = std::make_shared<const DirichletSolver>(q1, lam);
  auto d2 = std::make_shared<const DirichletSolver>(q2, lam);
  return std::make_shared<DifferenceOperator>(std::make_shared<DtnOperator>(d1), std::make_shared<DtnOperator>(d2));
}

}  // namespace

// ---- schedule, modulus, tau selection

TEST(Schedule, UnitTau) {
  ScheduleParams spec;
  spec.varkappa = 0.7;
  const ScheduleParams p = schedule(1.0, spec);
  EXPECT_DOUBLE_EQ(p.s, 1.0);
  EXPECT_NEAR(p.epsilon, std::exp(-4 * 0.7), 1e-15);
  EXPECT_NEAR(p.log_epsilon, -4 * 0.7, 1e-15);
  EXPECT_THROW(schedule(0.5, spec), DomainError);
}

TEST(Schedule, SBelowTauAndEpsDecreasing) {
  double prev = 2.0;
  for (double tau = 1.0; tau < 500; tau *= 1.17) {
    const ScheduleParams p = schedule(tau);
    EXPECT_LE(p.s, tau);
    EXPECT_NEAR(p.s, std::pow(tau, 0.4), 1e-12 * p.s);
    EXPECT_LT(p.log_epsilon, prev);
    prev = p.log_epsilon;
  }
}

TEST(Modulus, FirstBranchIsReciprocal) {
  const ModulusSpec m{1.0, 3};
  ASSERT_GE(std::exp(m.log_branch()), 2.0);
  EXPECT_DOUBLE_EQ(phi_c(2.0, m), 0.5);
}

TEST(Modulus, TripleLogAtBranchValue) {
  // log r = e^e -> logloglog r = 1
  const ModulusSpec m{0.5, 3};
  EXPECT_NEAR(phi_c_log(std::exp(std::exp(1.0)), m), 1.0, 1e-14);
  EXPECT_NEAR(triple_log_from_log(std::exp(std::exp(1.0))), 1.0, 1e-14);
}

TEST(Modulus, BranchesNonincreasing) {
  const ModulusSpec m{0.5, 3};
  const double lb = m.log_branch();
  double prev = phi_c_log(-3.0, m);
  for (double lr = -3.0; lr <= lb; lr += 0.01) {
    const double v = phi_c_log(lr, m);
    EXPECT_LE(v, prev);
    prev = v;
  }
  prev = phi_c_log(lb + 1e-9, m);
  for (double lr = lb + 1e-9; lr < 1e6; lr *= 1.5) {
    const double v = phi_c_log(lr, m);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(SelectTau, LargeCGivesOne) {
  const double kappa = 1.0;
  const double log_e = std::exp(std::exp(kappa));  // log e(varkappa)
  EXPECT_EQ(select_tau_log(-log_e + 1e-9, kappa), 1.0);
  EXPECT_EQ(select_tau(0.5, kappa), 1.0);
}

TEST(SelectTau, RootResidualAndMonotone) {
  double prev = 1.0;
  for (double log_c : {-20.0, -40.0, -100.0, -1e3, -1e5}) {
    const double tau = select_tau_log(log_c, 1.0);
    EXPECT_LT(std::abs(select_tau_residual_log(tau, log_c, 1.0)), 1e-10 * std::abs(log_c));
    EXPECT_GT(tau, prev);
    prev = tau;
  }
}

// ---- pairings

TEST(PairingInterior, TrivialCases) {
  const auto g = cube(12);
  const RealField dq = bump_field(g, smooth_bump());
  ComplexField one(g, Support::interior);
  one.values.setOnes();
  EXPECT_EQ(std::abs(pairing_interior(RealField(g, Support::interior), one, one)), 0.0);
  EXPECT_NEAR(pairing_interior(dq, one, one).real(), std::pow(g->h(), 3) * dq.values.sum(), 1e-15);
}

TEST(PairingInterior, NaiveLoop) {
  const auto g = cube(12);
  const RealField dq = bump_field(g, smooth_bump());
  const ComplexField u1 = interior_from_function_c(g, [](const Vec3& x) { return std::exp(Complex(x[1], 2 * x[0])); });
  const ComplexField u2 = interior_from_function_c(g, [](const Vec3& x) { return Complex(std::cos(x[2]), x[0] * x[1]); });
  Complex naive = 0;
  const double h = g->h();
  for (int i = 1; i < g->N(); ++i)
    for (int j = 1; j < g->N(); ++j)
      for (int k = 1; k < g->N(); ++k) {
        const std::size_t id = g->interior_index(i, j, k);
        naive += h * h * h * dq[id] * u1[id] * u2[id];
      }
  EXPECT_LT(std::abs(pairing_interior(dq, u1, u2) - naive), 1e-12 * std::abs(naive));
  BumpSpec wide = smooth_bump(0.5, 0.49);
  EXPECT_THROW(pairing_interior(bump_field(g, wide), u1, u2), SupportError);
}

TEST(PairingBoundary, ZeroDifferenceAndBilinearity) {
  const auto g = cube(8, 0.25, 0.75);
  BumpSpec b = smooth_bump(1.0, 0.2);
  const Potential q1(bump_field(g, b)), q2 = constant_potential(g, 0.0);
  const auto zero = dtn_difference(q1, q1, 10);
  const auto diff = dtn_difference(q1, q2, 10);
  const CVec a = boundary_from_function_c(g, [](const Vec3& x) { return Complex(x[0], x[1] * x[2]); }).values;
  const CVec c = boundary_from_function_c(g, [](const Vec3& x) { return Complex(std::sin(x[1]), 1 + x[2]); }).values;
  const CVec d = boundary_from_function_c(g, [](const Vec3& x) { return Complex(x[0] * x[0], -x[2]); }).values;
  EXPECT_EQ(std::abs(pairing_boundary(*zero, *g, a, c)), 0.0);
  const Complex al(0.3, -1.2), be(2.0, 0.5);
  const Complex lhs = pairing_boundary(*diff, *g, al * a + be * d, c);
  const Complex rhs = al * pairing_boundary(*diff, *g, a, c) + be * pairing_boundary(*diff, *g, d, c);
  EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::abs(rhs));
  const Complex lhs2 = pairing_boundary(*diff, *g, a, al * c + be * d);
  const Complex rhs2 = al * pairing_boundary(*diff, *g, a, c) + be * pairing_boundary(*diff, *g, a, d);
  EXPECT_LT(std::abs(lhs2 - rhs2), 1e-12 * std::abs(rhs2));
}

TEST(PairingBoundary, AlessandriniAtH24) {
  const auto g = cube(24, 0.25, 0.75);
  const double lam = 10.0;
  const Potential q1(bump_field(g, smooth_bump(1.0, 0.2))), q2 = constant_potential(g, 0.0);
  auto d1 = std::make_shared<const DirichletSolver>(q1, lam);
  auto d2 = std::make_shared<const DirichletSolver>(q2, lam);
  const DifferenceOperator diff(std::make_shared<DtnOperator>(d1), std::make_shared<DtnOperator>(d2));
  const ComplexField tr1 = boundary_from_function_c(g, [](const Vec3& x) { return std::exp(Complex(0, 2 * x[0] + x[1])); });
  const ComplexField tr2 = boundary_from_function_c(g, [](const Vec3& x) { return Complex(1 + x[2], x[0] - x[1]); });
  const ComplexField u1 = d1->solve(ComplexField(g, Support::interior), tr1);
  const ComplexField u2 = d2->solve(ComplexField(g, Support::interior), tr2);
  const Complex in = pairing_interior(difference(q1, q2), u1, u2);
  const Complex bd = pairing_boundary(diff, *g, tr1.values, tr2.values);
  EXPECT_LT(std::abs(bd - in), 1e-2 * std::abs(in));
}

// ---- q-hat

TEST(Qhat, EqualPotentialsGiveZero) {
  const auto g = cube(12);
  const Potential q(bump_field(g, smooth_bump()));
  QhatSetup in;
  in.mode = QhatMode::oracle;
  in.q1 = &q;
  in.q2 = &q;
  const QhatEstimate e = qhat_estimate({0, 0, 0}, 8, 10, in);
  EXPECT_EQ(std::abs(e.value), 0.0);
  EXPECT_EQ(std::abs(e.remainder), 0.0);
  EXPECT_EQ(e.remainder_bound, 0.0);
}

// The remainder budget ||dq||_inf ||rho||_L1 falls like tau^-1. For a real smooth
// dq the error itself falls faster, so it is held to the budget and to at
// least the same rate.
TEST(Qhat, OracleApproachesFourierCoefficient) {
  const auto g = cube(32);
  const Potential q1(bump_field(g, smooth_bump())), q2 = constant_potential(g, 0.0);
  QhatSetup in;
  in.mode = QhatMode::oracle;
  in.q1 = &q1;
  in.q2 = &q2;
  std::vector<double> taus, err, bnd;
  for (double tau : {8.0, 16.0, 32.0, 64.0}) {
    const QhatEstimate e = qhat_estimate({kPi, 0, 0}, tau, 10, in);
    EXPECT_LE(std::abs(e.value - e.exact), e.remainder_bound);
    EXPECT_LT(std::abs(e.value - e.remainder - e.exact), 1e-12 * std::abs(e.exact));
    taus.push_back(tau);
    err.push_back(std::abs(e.value - e.exact));
    bnd.push_back(e.remainder_bound);
  }
  const double sb = fit_scaling(taus, bnd).slope;
  EXPECT_GT(sb, -1.2);
  EXPECT_LT(sb, -0.8);
  EXPECT_LT(fit_scaling(taus, err).slope, -0.8);
}

TEST(Qhat, DataModeMatchesOracle) {
  const auto g = cube(16);
  const double lam = 10.0;
  const Potential q1(bump_field(g, smooth_bump())), q2 = constant_potential(g, 0.0);
  QhatSetup in;
  in.q1 = &q1;
  in.q2 = &q2;
  in.diff = dtn_difference(q1, q2, lam);
  for (const Vec3& eta : {Vec3{0, 0, 0}, Vec3{kPi, 0, 0}, Vec3{kPi, -kPi, 2 * kPi}}) {
    in.mode = QhatMode::oracle;
    const QhatEstimate o = qhat_estimate(eta, 8, lam, in);
    in.mode = QhatMode::data;
    const QhatEstimate d = qhat_estimate(eta, 8, lam, in);
    EXPECT_LT(std::abs(d.value - o.value), 1e-8 * std::abs(o.value) + 1e-12);
  }
}

// ---- low-pass inversion

TEST(Lowpass, LatticeHalvesPairUp) {
  const auto g = cube(16);
  const TorusGrid t = g->hminus1_torus();
  const auto full = lowpass_lattice(t, 8.0), half = lowpass_lattice(t, 8.0, true);
  EXPECT_EQ(full.size(), 2 * half.size() - 1);
  for (const auto& p : full) EXPECT_LE(std::sqrt(p.eta[0] * p.eta[0] + p.eta[1] * p.eta[1] + p.eta[2] * p.eta[2]), 8.0 + 1e-9);
}

TEST(Lowpass, ZeroSamplesGiveZeroField) {
  const auto g = cube(16);
  const auto pts = lowpass_lattice(g->hminus1_torus(), 6.0, true);
  const LowpassResult r = lowpass_invert(g, pts, std::vector<Complex>(pts.size()), 6.0, 1.0);
  EXPECT_EQ(r.interior.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lowpass, FullSpectrumRoundTrip) {
  const auto g = cube(16);
  const RealField dq = bump_field(g, smooth_bump());
  const TorusGrid t = g->hminus1_torus();
  const CVec ex = fourier_coefficients(dq);
  const auto pts = lowpass_lattice(t, 1e300, true);
  std::vector<Complex> v;
  for (const auto& p : pts) v.push_back(ex[static_cast<Eigen::Index>(p.bin)]);
  const LowpassResult r = lowpass_invert(g, pts, v, 1e300, 0.5);
  EXPECT_LT((r.interior.values - dq.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lowpass, TruncationWithinTailBound) {
  const auto g = cube(16);
  const TorusGrid t = g->hminus1_torus();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> amp(-1, 1), c(0.4, 0.6), w(0.15, 0.3);
  for (int trial = 0; trial < 6; ++trial) {
    BumpSpec b;
    b.amplitude = amp(rng);
    b.center = {c(rng), c(rng), c(rng)};
    b.half_width = {w(rng), w(rng), w(rng)};
    b.shape = trial % 2 ? BumpShape::cap : BumpShape::smooth;
    const RealField dq = bump_field(g, b);
    const double kappa = dq.values.cwiseAbs().maxCoeff();
    const CVec ex = fourier_coefficients(dq);
    for (double s : {3.0, 5.0, 8.0}) {
      const auto pts = lowpass_lattice(t, s, true);
      std::vector<Complex> v;
      for (const auto& p : pts) v.push_back(ex[static_cast<Eigen::Index>(p.bin)]);
      const double err = hminus1_error(t, ex, pts, v, s);
      EXPECT_NEAR(err, std::sqrt(hminus1_tail_sq(t, ex, s)), 1e-12);
      EXPECT_LE(err, lowpass_invert(g, pts, v, s, kappa).tail_bound);
    }
  }
}

TEST(QhatCsv, Columns) {
  const auto g = cube(12);
  const Potential q1(bump_field(g, smooth_bump())), q2 = constant_potential(g, 0.0);
  QhatSetup in;
  in.mode = QhatMode::oracle;
  in.q1 = &q1;
  in.q2 = &q2;
  const std::vector<QhatEstimate> est{qhat_estimate({0, 0, 0}, 8, 10, in)};
  const std::string path = ::testing::TempDir() + "qhat.csv";
  write_qhat_csv(path, est);
  const Table tab = read_csv_table(path);
  ASSERT_EQ(tab.rows.size(), 1u);
  for (const char* col : {"eta1", "eta2", "eta3", "re", "im", "remainder_re", "remainder_im"})
    EXPECT_FALSE(tab.column(col).empty()) << col;
}
