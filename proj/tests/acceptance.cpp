// Runs the acceptance checks in sequence; one PASS/FAIL line each, exit 0 only
// if all pass.
#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "helmstab/experiment.hpp"
#include "helmstab/runge.hpp"

using namespace helmstab;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

GeometryPtr cube(int n, double lo = 0.25, double hi = 0.75) {
  GeometrySpec s;
  s.subdivisions = n;
  s.omega0_lo = {lo, lo, lo};
  s.omega0_hi = {hi, hi, hi};
  return build_geometry(s);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---- 1

double sss(const Vec3& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]); }

double manufactured_error(int n) {
  const auto g = cube(n);
  const double lam = 10.0;
  const Potential q = constant_potential(g, 1.0);
  const ComplexField f = to_complex(interior_from_function(g, [&](const Vec3& x) { return (3 * kPi * kPi + 1 - lam) * sss(x); }));
  const ComplexField u = solve_dirichlet(q, lam, f, ComplexField(g, Support::boundary));
  ComplexField e = u;
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= sss(g->coord(g->interior_ijk(i)));
  return l2_norm(e);
}

Check ac1() {
  const double e16 = manufactured_error(16), e32 = manufactured_error(32);
  const double order = std::log2(e16 / e32);
  return {order >= 1.9, fmt("order %.4f (err %.3e -> %.3e)", order, e16, e32)};
}

// ---- 2

Check ac2() {
  const auto g = cube(8, 0.375, 0.625);
  BumpSpec b;
  b.half_width = {0.3, 0.3, 0.3};
  const Potential q(bump_field(g, b));
  const DirichletSolver s(q, 47.0);
  Eigen::SelfAdjointEigenSolver<RMat> es(RMat(s.matrix()), Eigen::EigenvaluesOnly);
  const double dist = es.eigenvalues().cwiseAbs().minCoeff();
  const SupRatio r = resolvent_sup_ratio(s);
  const double rel = std::abs(r.value * dist - 1.0);
  return {r.converged && rel <= 1e-8, fmt("sup ratio %.12g, 1/dist %.12g, rel diff %.2e", r.value, 1 / dist, rel)};
}

// ---- 3

Check ac3() {
  const auto g = cube(32);
  BumpSpec b;
  b.amplitude = 2.0;
  const Potential q(bump_field(g, b));
  std::vector<double> im, w;
  int worst_it = 0;
  for (double tau : {8.0, 16.0, 32.0, 64.0}) {
    const CgoSolution s = solve_cgo_pair(q, q, make_frequency_pair({2, 0, 0}, tau, 20), {}).first;
    worst_it = std::max(worst_it, s.iterations);
    im.push_back(s.im_xi);
    w.push_back(s.w_norm_X);
  }
  const double slope = fit_scaling(im, w).slope;
  return {std::abs(q.sup_norm() - 2.0) < 1e-12 && slope <= -0.9 && worst_it <= 30,
          fmt("slope %.4f, max iterations %d, |Im xi| %.2f..%.2f", slope, worst_it, im.front(), im.back())};
}

// ---- 4

Check ac4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-20, 20), t(1, 100), l(1, 200);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 eta{u(rng), u(rng), u(rng)};
    const FrequencyPair p = make_frequency_pair(eta, t(rng), l(rng));
    const double scale = std::max(1.0, eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2] + p.tau * p.tau + p.lambda);
    double d = 0;
    for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(p.xi1[k] + p.xi2[k] - eta[k]) / std::sqrt(scale));
    d = std::max(d, frequency_pair_defect(p) / scale);
    worst = std::max(worst, d);
  }
  return {worst <= 1e-12, fmt("worst scaled defect %.2e over 1000 draws", worst)};
}

// ---- 5

Check ac5() {
  const auto g = cube(24);
  const double lam = 10.0;
  BumpSpec b;
  b.amplitude = 1.0;
  b.half_width = {0.2, 0.2, 0.2};
  const Potential q1(bump_field(g, b)), q2 = constant_potential(g, 0.0);
  auto d1 = std::make_shared<const DirichletSolver>(q1, lam);
  auto d2 = std::make_shared<const DirichletSolver>(q2, lam);
  const DifferenceOperator diff(std::make_shared<DtnOperator>(d1), std::make_shared<DtnOperator>(d2));
  const ComplexField tr1 = boundary_from_function_c(g, [](const Vec3& x) { return std::exp(Complex(0, 2 * x[0] + x[1])); });
  const ComplexField tr2 = boundary_from_function_c(g, [](const Vec3& x) { return Complex(1 + x[2], x[0] - x[1]); });
  const ComplexField u1 = d1->solve(ComplexField(g, Support::interior), tr1);
  const ComplexField u2 = d2->solve(ComplexField(g, Support::interior), tr2);
  const Complex in = pairing_interior(difference(q1, q2), u1, u2);
  const Complex bd = pairing_boundary(diff, *g, tr1.values, tr2.values);
  const double rel = std::abs(bd - in) / std::abs(in);
  return {rel <= 1e-2, fmt("relative gap %.3e", rel)};
}

// ---- 6

Check ac6() {
  GeometrySpec gs;
  gs.subdivisions = 8;
  gs.gamma = Patch::face(parse_face("x0"));
  const auto g = build_geometry(gs);
  BumpSpec b;
  b.half_width = {0.2, 0.2, 0.2};
  const DirichletSolver solver(Potential(bump_field(g, b)), 10.0);
  const RungeOperator op = assemble_runge_operator(solver, build_trace_basis(g, g->gamma_mask(), 24, 1.5));
  const CMat T = op.T.cast<Complex>();
  const double h3 = std::pow(g->h(), 3);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  double worst_norm = -INFINITY, worst_orth = 0;
  bool monotone = true;
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(op.sigma[0] * std::pow(10.0, -0.8 * i));
  for (int trial = 0; trial < 5; ++trial) {
    CVec u0(T.rows());
    for (Eigen::Index i = 0; i < u0.size(); ++i) u0[i] = Complex(n(rng), n(rng));
    const auto curve = runge_tradeoff_curve(op, u0, grid);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const RungeResult r = runge_approximate(op, u0, grid[i]);
      worst_norm = std::max(worst_norm, r.phi_norm * grid[i] / r.u0_norm - 1.0);
      const CVec Tphi = T * r.coeffs;
      const CVec v = u0 - Tphi;
      const double scale = h3 * Tphi.norm() * v.norm();
      if (scale > 0) worst_orth = std::max(worst_orth, std::abs(h3 * Tphi.dot(v)) / scale);
      if (i > 0) {
        monotone &= curve[i].defect_norm <= curve[i - 1].defect_norm * (1 + 1e-12);
        monotone &= curve[i].phi_norm >= curve[i - 1].phi_norm * (1 - 1e-12);
      }
    }
  }
  return {worst_norm <= 1e-10 && worst_orth <= 1e-10 && monotone,
          fmt("max(t|phi|/|u0| - 1) %.2e, orthogonality %.2e, monotone %s", worst_norm, worst_orth, monotone ? "yes" : "no")};
}

// ---- 7..9: full pipeline

const char* kAc7 = R"({
  "name": "ac7",
  "geometry": {"subdivisions": 32, "omega0_lo": 0.0625, "omega0_hi": 0.9375},
  "potential": {"bump": {"amplitude": 0.5, "half_width": 0.4375, "shape": "cap"}},
  "lambdas": [10],
  "perturbation": {"levels": [0]},
  "schedule": {"tau": 16, "s": 8}
})";

const char* kAc8 = R"({
  "name": "ac8",
  "geometry": {"subdivisions": 16, "omega0_lo": 0.125, "omega0_hi": 0.875},
  "potential": {"bump": {"amplitude": 0.5, "half_width": 0.3, "shape": "smooth"}},
  "lambdas": [10],
  "perturbation": {"levels": [0, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3], "mode": "relative"},
  "schedule": {"c": 0.5, "theta": 0.5, "tau": 8, "s": 4}
})";

const char* kAc9 = R"({
  "name": "ac9",
  "geometry": {"subdivisions": 16, "omega0_lo": 0.125, "omega0_hi": 0.875},
  "potential": {"bump": {"amplitude": 0.5, "half_width": 0.3, "shape": "smooth"}},
  "lambdas": [10, 40, 160],
  "perturbation": {"levels": [1e-5], "mode": "absolute", "model": "aligned"},
  "schedule": {"c": 0.5, "theta": 0.5, "tau": 8, "s": 4}
})";

ExperimentResult run_and_write(const char* json, const fs::path& dir) {
  const ExperimentResult r = run_experiment(parse_config(json));
  write_experiment(dir.string(), r);
  return r;
}

Check ac7(const fs::path& wd) {
  const ExperimentResult r = run_and_write(kAc7, wd / "ac7");
  if (!r.all_ok()) return {false, "record failed: " + r.records[0].error_message};
  const StabilityRecord& rec = r.records[0];
  return {rec.herr_rel <= 0.2, fmt("relative H^-1 error %.4f (s=%g, tau=%g, %d modes)", rec.herr_rel, rec.s, rec.tau, rec.modes)};
}

Check ac8(const fs::path& wd) {
  const ExperimentResult r = run_and_write(kAc8, wd / "ac8");
  if (!r.all_ok()) return {false, "a record failed"};
  bool nondecreasing = true;
  double lo = INFINITY, hi = 0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const StabilityRecord& a = r.records[i];
    if (i > 0) nondecreasing &= a.herr >= r.records[i - 1].herr;
    if (a.delta_injected > 0) {
      lo = std::min(lo, a.delta_injected);
      hi = std::max(hi, a.delta_injected);
    }
    if (std::isfinite(a.triple_log_x)) {
      x.push_back(a.triple_log_x);
      y.push_back(a.herr);
    }
  }
  const double decades = std::log10(hi / lo);
  const FitResult f = fit_scaling(x, y, FitMode::linear);
  return {nondecreasing && decades >= 6 - 1e-9 && f.points >= 3 && f.slope >= 0,
          fmt("nondecreasing %s, %.2f decades, branch fit slope %.3e over %d points", nondecreasing ? "yes" : "no", decades,
              f.slope, f.points)};
}

Check ac9(const fs::path& wd) {
  const ExperimentResult r = run_and_write(kAc9, wd / "ac9");
  if (!r.all_ok()) return {false, "a record failed (resonance or solver)"};
  bool nondecreasing = true;
  std::string errs;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    if (i > 0) nondecreasing &= r.records[i].herr >= r.records[i - 1].herr;
    errs += fmt("%s%g:%.4f", i ? " " : "", r.records[i].lambda, r.records[i].herr);
  }
  return {nondecreasing, "herr by lambda " + errs};
}

// ---- 10

Check ac10() {
  const auto g = cube(12);
  BumpSpec b;
  b.half_width = {0.2, 0.2, 0.2};
  const Potential q(bump_field(g, b));
  const double l0 = 1.0;
  double lo = INFINITY, hi = 0;
  std::string vals;
  for (double f = 1.0; f <= 100.0 * (1 + 1e-12); f *= std::sqrt(10.0)) {
    const RobinSolver s(q, l0 * f, ImpedanceParams::constant(*g, 1.0, +1, l0));
    const double r = s.h1_bound().sup_ratio;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    vals += fmt("%s%.3g", vals.empty() ? "" : " ", r);
  }
  return {hi / lo < 3.0, fmt("max/min %.3f (ratios %s)", hi / lo, vals.c_str())};
}

// ---- 11

Check ac11(const fs::path& wd) {
  ExperimentConfig c = parse_config(kAc9);
  c.lambdas = {10.0, 40.0};
  c.levels = {0.0, 1e-5};
  c.noise_model = NoiseModel::random;
  c.seed = 11;
  c.threads = 2;
  write_experiment((wd / "ac11a").string(), run_experiment(c));
  write_experiment((wd / "ac11b").string(), run_experiment(c));
  const std::string a = slurp(wd / "ac11a" / "records.csv"), b = slurp(wd / "ac11b" / "records.csv");
  return {!a.empty() && a == b, fmt("%zu bytes, identical %s", a.size(), a == b ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string workdir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "directory for experiment outputs");
  app.add_option("--only", only, "run just these criteria");
  CLI11_PARSE(app, argc, argv);
  const fs::path wd(workdir);
  fs::create_directories(wd);

  const std::vector<std::function<Check()>> checks{
      ac1, ac2, ac3, ac4, ac5, ac6, [&] { return ac7(wd); }, [&] { return ac8(wd); }, [&] { return ac9(wd); }, ac10,
      [&] { return ac11(wd); }};
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = checks[i]();
    } catch (const std::exception& e) {
      c = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("AC%d %s %.1fs %s\n", id, c.pass ? "PASS" : "FAIL", dt, c.detail.c_str());
    std::fflush(stdout);
    failed += !c.pass;
  }
  return failed == 0 ? 0 : 1;
}
