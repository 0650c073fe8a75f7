#include "helmstab/forward.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace helmstab {

FluxStencil parse_flux(const std::string& s) {
  if (s == "green") return FluxStencil::green;
  if (s == "one_sided") return FluxStencil::one_sided;
  throw ConfigError("unknown flux stencil '" + s + "'");
}

std::string flux_name(FluxStencil f) { return f == FluxStencil::green ? "green" : "one_sided"; }

CVec face_laplacian(const Geometry& g, const CVec& phi) {
  const int m = g.N() - 1;
  const double w = 1.0 / (g.h() * g.h());
  CVec out = CVec::Zero(phi.size());
  for (int f = 0; f < 6; ++f)
    for (int a = 1; a <= m; ++a)
      for (int b = 1; b <= m; ++b) {
        const auto i = static_cast<Eigen::Index>(g.boundary_index(f, a, b));
        Complex acc = 0.0;
        if (a > 1) acc += phi[i] - phi[static_cast<Eigen::Index>(g.boundary_index(f, a - 1, b))];
        if (a < m) acc += phi[i] - phi[static_cast<Eigen::Index>(g.boundary_index(f, a + 1, b))];
        if (b > 1) acc += phi[i] - phi[static_cast<Eigen::Index>(g.boundary_index(f, a, b - 1))];
        if (b < m) acc += phi[i] - phi[static_cast<Eigen::Index>(g.boundary_index(f, a, b + 1))];
        out[i] = w * acc;
      }
  return out;
}

DirichletSolver::DirichletSolver(Potential q, double lambda, SolverOptions opt)
    : q_(std::move(q)), lambda_(lambda), opt_(opt) {
  assemble();
  ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SparseR, Eigen::Lower, Eigen::AMDOrdering<int>>>();
  ldlt_->compute(A_);
  if (ldlt_->info() != Eigen::Success)
    throw SpectralProximityError("Dirichlet operator is singular at this lambda", lambda_);
  const RVec D = ldlt_->vectorD();
  if ((D.array().abs() < 1e-300).any() || !D.allFinite())
    throw SpectralProximityError("Dirichlet factorisation hit a zero pivot", lambda_);
  probe_spectrum();
}

void DirichletSolver::assemble() {
  const Geometry& g = *geometry();
  const double h = g.h();
  const double w = 1.0 / (h * h);
  const auto n = static_cast<Eigen::Index>(g.interior_count());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 7);
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Idx3 p = g.interior_ijk(id);
    const auto r = static_cast<Eigen::Index>(id);
    trip.emplace_back(r, r, 6.0 * w + q_.values()[r] - lambda_);
    for (int d = 0; d < 3; ++d)
      for (int s = -1; s <= 1; s += 2) {
        Idx3 nb = p;
        nb[d] += s;
        if (g.is_interior(nb))
          trip.emplace_back(r, static_cast<Eigen::Index>(g.interior_index(nb[0], nb[1], nb[2])), -w);
      }
  }
  A_.resize(n, n);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
}

void DirichletSolver::probe_spectrum() {
  const auto n = A_.rows();
  std::mt19937_64 rng(opt_.seed);
  std::normal_distribution<double> nd;
  RVec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = nd(rng);
  x.normalize();
  double est = 0.0;
  const int iters = std::max(1, opt_.proximity_iterations);
  for (int it = 0; it < iters; ++it) {
    RVec y = solve_raw(RMat(x)).col(0);
    est = y.norm();
    x = y / est;
  }
  probe_norm_ = est;
  const double rq = x.dot(A_ * x);
  probe_mu_ = lambda_ + rq;
  if (!opt_.check_spectrum) return;
  const double margin = opt_.spectral_margin * std::abs(lambda_);
  if (margin <= 0.0) return;
  if (!std::isfinite(est) || est * margin >= 1.0) {
    std::ostringstream os;
    os << "lambda=" << lambda_ << " is within " << margin << " of a discrete eigenvalue (~" << probe_mu_ << ")";
    throw SpectralProximityError(os.str(), probe_mu_);
  }
}

RMat DirichletSolver::solve_raw(const RMat& rhs) const {
  RMat x = ldlt_->solve(rhs);
  // one refinement step when the indefinite factorisation loses accuracy
  RMat r = rhs - A_ * x;
  const double rn = r.norm(), bn = rhs.norm();
  if (bn > 0 && rn > 1e-12 * bn) x += ldlt_->solve(r);
  return x;
}

CMat DirichletSolver::solve_raw(const CMat& rhs) const {
  const Eigen::Index k = rhs.cols();
  RMat both(rhs.rows(), 2 * k);
  both.leftCols(k) = rhs.real();
  both.rightCols(k) = rhs.imag();
  const RMat x = solve_raw(both);
  CMat out(rhs.rows(), k);
  out.real() = x.leftCols(k);
  out.imag() = x.rightCols(k);
  return out;
}

CVec DirichletSolver::solve(const CVec& f, const CVec& phi) const {
  const Geometry& g = *geometry();
  if (static_cast<std::size_t>(phi.size()) != g.boundary_count()) throw ShapeError("trace length");
  CVec rhs = f.size() ? f : CVec::Zero(static_cast<Eigen::Index>(g.interior_count()));
  if (static_cast<std::size_t>(rhs.size()) != g.interior_count()) throw ShapeError("source length");
  const double w = 1.0 / (g.h() * g.h());
  for (std::size_t b = 0; b < g.boundary_count(); ++b) {
    const auto& bn = g.boundary_node(b);
    rhs[static_cast<Eigen::Index>(g.interior_index(bn.inward1[0], bn.inward1[1], bn.inward1[2]))] +=
        w * phi[static_cast<Eigen::Index>(b)];
  }
  return solve_raw(CMat(rhs)).col(0);
}

ComplexField DirichletSolver::solve(const ComplexField& f, const ComplexField& phi) const {
  phi.check();
  if (phi.support != Support::boundary) throw SupportError("Dirichlet datum must be a boundary field");
  CVec fv;
  if (f.size()) {
    f.check();
    if (f.support != Support::interior) throw SupportError("source must be an interior field");
    fv = f.values;
  }
  return ComplexField(geometry(), Support::interior, solve(fv, phi.values));
}

RealField DirichletSolver::solve(const RealField& f, const RealField& phi) const {
  ComplexField fc;
  if (f.size()) fc = to_complex(f);
  return real_part(solve(fc, to_complex(phi)));
}

CVec DirichletSolver::residual(const CVec& u, const CVec& f, const CVec& phi) const {
  const Geometry& g = *geometry();
  CVec r = A_.cast<Complex>() * u;
  if (f.size()) r -= f;
  const double w = 1.0 / (g.h() * g.h());
  for (std::size_t b = 0; b < g.boundary_count(); ++b) {
    const auto& bn = g.boundary_node(b);
    r[static_cast<Eigen::Index>(g.interior_index(bn.inward1[0], bn.inward1[1], bn.inward1[2]))] -=
        w * phi[static_cast<Eigen::Index>(b)];
  }
  return r;
}

CVec DirichletSolver::flux(const CVec& u, const CVec& phi) const { return flux(u, phi, opt_.flux); }

CVec DirichletSolver::flux(const CVec& u, const CVec& phi, FluxStencil st) const {
  const Geometry& g = *geometry();
  const double h = g.h();
  CVec out(static_cast<Eigen::Index>(g.boundary_count()));
  if (st == FluxStencil::one_sided) {
    for (std::size_t b = 0; b < g.boundary_count(); ++b) {
      const auto& bn = g.boundary_node(b);
      const Complex u1 = u[static_cast<Eigen::Index>(g.interior_index(bn.inward1[0], bn.inward1[1], bn.inward1[2]))];
      const Complex u2 = u[static_cast<Eigen::Index>(g.interior_index(bn.inward2[0], bn.inward2[1], bn.inward2[2]))];
      out[static_cast<Eigen::Index>(b)] = (3.0 * phi[static_cast<Eigen::Index>(b)] - 4.0 * u1 + u2) / (2.0 * h);
    }
    return out;
  }
  const CVec LT = face_laplacian(g, phi);
  for (std::size_t b = 0; b < g.boundary_count(); ++b) {
    const auto& bn = g.boundary_node(b);
    const auto i1 = static_cast<Eigen::Index>(g.interior_index(bn.inward1[0], bn.inward1[1], bn.inward1[2]));
    const auto bi = static_cast<Eigen::Index>(b);
    out[bi] = (phi[bi] - u[i1]) / h + 0.5 * h * ((q_.values()[i1] - lambda_) * phi[bi] + LT[bi]);
  }
  return out;
}

ComplexField solve_dirichlet(const Potential& q, double lambda, const ComplexField& f, const ComplexField& phi,
                             SolverOptions opt) {
  DirichletSolver s(q, lambda, opt);
  return s.solve(f, phi);
}

}  // namespace helmstab
