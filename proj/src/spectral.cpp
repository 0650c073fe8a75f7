#include "helmstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace helmstab {

namespace {

std::unique_ptr<DirichletSolver> shift_solver(const Potential& q, double lambda) {
  SolverOptions opt;
  opt.check_spectrum = false;
  opt.proximity_iterations = 1;
  try {
    return std::make_unique<DirichletSolver>(q, lambda, opt);
  } catch (const SpectralProximityError&) {
    // shift sits exactly on an eigenvalue; nudge it, the window is the same
    return std::make_unique<DirichletSolver>(q, lambda + 1e-9 * std::max(1.0, std::abs(lambda)), opt);
  }
}

RMat orthonormalize(const RMat& W) {
  Eigen::HouseholderQR<RMat> qr(W);
  return qr.householderQ() * RMat::Identity(W.rows(), W.cols());
}

}  // namespace

SpectralWindow eigenpairs_near(const Potential& q, double lambda, int m, int max_iter, double tol) {
  if (m < 1) throw DomainError("window size must be at least 1");
  const auto solver = shift_solver(q, lambda);
  const double shift = solver->lambda();
  const SparseR& A = solver->matrix();  // -Delta_h + q - shift
  const Eigen::Index n = A.rows();
  if (m > n) throw DomainError("window larger than the number of interior nodes");
  const Eigen::Index p = std::min<Eigen::Index>(n, 2 * m + 6);

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  RMat V(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) V(i, j) = nd(rng);
  V = orthonormalize(V);

  SpectralWindow w;
  w.potential_id = q.id();
  w.lambda = lambda;
  RVec theta;
  std::vector<Eigen::Index> order;
  int it = 0;
  for (it = 1; it <= max_iter; ++it) {
    if (p < n) V = orthonormalize(solver->solve_raw(V));
    const RMat AV = A * V;
    RMat H = V.transpose() * AV;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RMat> es(H);
    V = V * es.eigenvectors();
    theta = es.eigenvalues();
    order.resize(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(theta[a]) < std::abs(theta[b]); });
    const RMat R = A * V - V * theta.asDiagonal();
    bool ok = true;
    w.residuals.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
      const Eigen::Index c = order[static_cast<std::size_t>(i)];
      const double mu = shift + theta[c];
      w.residuals[static_cast<std::size_t>(i)] = R.col(c).norm();
      if (R.col(c).norm() > tol * std::max(std::abs(mu), 1e-300)) ok = false;
    }
    if (ok) break;
    if (p == n) break;  // full space, Ritz pairs are exact up to rounding
  }
  if (it > max_iter) throw ConvergenceError("shift-invert iteration did not reach the residual tolerance");
  w.iterations = std::min(it, max_iter);
  w.vectors.resize(n, m);
  w.distance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const Eigen::Index c = order[static_cast<std::size_t>(i)];
    const double mu = shift + theta[c];
    w.eigenvalues.push_back(mu);
    w.vectors.col(i) = V.col(c);
    w.distance = std::min(w.distance, std::abs(lambda - mu));
  }
  return w;
}

double e_lambda_from_distance(double d, double guard) {
  if (!(d >= guard)) throw DivergenceError("lambda is within the guard distance of the spectrum");
  return std::max(1.0 / d, 1.0);
}

double e_lambda(double lambda, const std::vector<SpectralWindow>& spectra, double guard) {
  if (spectra.empty()) throw DomainError("e_lambda needs at least one spectral window");
  double d = std::numeric_limits<double>::infinity();
  for (const auto& w : spectra)
    for (double mu : w.eigenvalues) d = std::min(d, std::abs(lambda - mu));
  return e_lambda_from_distance(d, guard);
}

double b_lambda(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("b_lambda needs lambda > 0");
  return std::sqrt(2.0 * std::cosh(std::sqrt(lambda) / 2.0));
}

Variant parse_variant(const std::string& s) {
  if (s == "dirichlet") return Variant::dirichlet;
  if (s == "impedance") return Variant::impedance;
  throw ConfigError("unknown variant '" + s + "'");
}

std::string variant_name(Variant v) { return v == Variant::dirichlet ? "dirichlet" : "impedance"; }

double modulus_prefactor(double lambda, double e, Variant v, double lambda0) {
  if (v == Variant::dirichlet) {
    if (lambda < 1.0) throw DomainError("Dirichlet modulus needs lambda >= 1");
    return std::pow(lambda, 5) * e * e * e * b_lambda(lambda);
  }
  if (lambda < lambda0) throw DomainError("impedance modulus needs lambda >= lambda0");
  return std::pow(lambda, 6) * b_lambda(lambda);
}

ResolventReport check_resolvent_bound(const DirichletSolver& solver, const RealField& f, int j) {
  if (j < 0 || j > 2) throw DomainError("resolvent check supports j in {0, 1, 2}");
  f.check();
  if (f.support != Support::interior) throw SupportError("resolvent source must be interior");
  const RealField zero(solver.geometry(), Support::boundary);
  const RealField u = solver.solve(f, zero);
  const double fn = l2_norm(f);
  ResolventReport r;
  r.j = j;
  if (fn == 0.0) return r;
  r.l2_ratio = l2_norm(u) / fn;
  r.hj_ratio = sobolev_interior_norm(u, j) / (std::pow(solver.lambda(), 0.5 * j) * fn);
  return r;
}

ResolventReport check_resolvent_bound(const Potential& q, double lambda, const RealField& f, int j) {
  SolverOptions opt;
  opt.check_spectrum = false;
  DirichletSolver s(q, lambda, opt);
  return check_resolvent_bound(s, f, j);
}

SupRatio resolvent_sup_ratio(const DirichletSolver& solver, int max_iter, double tol) {
  const Eigen::Index n = solver.matrix().rows();
  std::mt19937_64 rng(solver.options().seed + 101);
  std::normal_distribution<double> nd;
  RVec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = nd(rng);
  x.normalize();
  SupRatio out;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    RVec y = solver.solve_raw(RMat(x)).col(0);
    const double v = y.norm();
    out.value = v;
    out.iterations = it;
    if (!(v > 0.0) || !std::isfinite(v)) break;
    x = y / v;
    // the sequence increases monotonically to the top singular value
    if (it > 1 && std::abs(v - prev) <= tol * v) {
      out.converged = true;
      break;
    }
    prev = v;
  }
  return out;
}

bool in_admissible_class(const Potential& q, const Potential& q0, double distance_q0, double kappa0) {
  if (q.values().size() != q0.values().size()) throw ShapeError("potentials on different grids");
  const double dev = (q.values() - q0.values()).cwiseAbs().maxCoeff();
  return dev < std::min(distance_q0, kappa0);
}

}  // namespace helmstab
