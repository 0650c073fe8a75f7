#include <cmath>
#include <random>

#include "helmstab/forward.hpp"

namespace helmstab {

ImpedanceParams ImpedanceParams::constant(const Geometry& g, double a, int sign, double lambda0) {
  ImpedanceParams p;
  p.a = RVec::Constant(static_cast<Eigen::Index>(g.boundary_count()), a);
  p.sign = sign;
  p.lambda0 = lambda0;
  return p;
}

void ImpedanceParams::validate(const Geometry& g) const {
  if (static_cast<std::size_t>(a.size()) != g.boundary_count())
    throw ShapeError("impedance coefficient must live on every boundary node");
  if (!(a.array() > 0.0).all()) throw DomainError("impedance coefficient must be strictly positive");
  if (sign != 1 && sign != -1) throw DomainError("impedance sign must be +1 or -1");
  if (!(lambda0 > 0.0)) throw DomainError("lambda0 must be positive");
}

namespace {

Eigen::Index iidx(const Geometry& g, const Idx3& p) {
  return static_cast<Eigen::Index>(g.interior_index(p[0], p[1], p[2]));
}

}  // namespace

RobinSolver::RobinSolver(Potential q, double lambda, ImpedanceParams params, SolverOptions opt)
    : q_(std::move(q)), lambda_(lambda), params_(std::move(params)), opt_(opt) {
  params_.validate(*geometry());
  if (lambda_ < params_.lambda0)
    throw DomainError("impedance problem needs lambda >= lambda0 (" + std::to_string(params_.lambda0) + ")");
  assemble();
  lu_ = std::make_shared<Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(A_);
  lu_->factorize(A_);
  if (lu_->info() != Eigen::Success) throw SingularSystemError("impedance system is singular: " + lu_->lastErrorMessage());
}

void RobinSolver::assemble() {
  const Geometry& g = *geometry();
  const double h = g.h(), h3 = h * h * h;
  const auto ni = static_cast<Eigen::Index>(g.interior_count());
  const auto nb = static_cast<Eigen::Index>(g.boundary_count());
  const double sl = std::sqrt(lambda_);
  const Complex I(0.0, 1.0);
  const RVec& q = q_.values();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(ni + nb) * 7);

  // interior rows times h^3 so that the coupling to face unknowns is -h both ways
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Idx3 p = g.interior_ijk(id);
    const auto r = static_cast<Eigen::Index>(id);
    trip.emplace_back(r, r, 6.0 * h + h3 * (q[r] - lambda_));
    for (int d = 0; d < 3; ++d)
      for (int s = -1; s <= 1; s += 2) {
        Idx3 nbp = p;
        nbp[d] += s;
        if (g.is_interior(nbp)) {
          trip.emplace_back(r, iidx(g, nbp), -h);
        } else {
          const std::size_t b = g.boundary_id_of(nbp);
          trip.emplace_back(r, ni + static_cast<Eigen::Index>(b), -h);
        }
      }
  }

  const int m = g.N() - 1;
  for (std::size_t b = 0; b < g.boundary_count(); ++b) {
    const auto& bn = g.boundary_node(b);
    const auto r = ni + static_cast<Eigen::Index>(b);
    const Complex imp = -static_cast<double>(params_.sign) * I * params_.a[static_cast<Eigen::Index>(b)] * sl;
    const Eigen::Index i1 = iidx(g, bn.inward1);
    if (opt_.flux == FluxStencil::green) {
      int deg = 0;
      auto tang = [&](int a, int bb) {
        trip.emplace_back(r, ni + static_cast<Eigen::Index>(g.boundary_index(bn.face, a, bb)), -0.5 * h);
        ++deg;
      };
      if (bn.a > 1) tang(bn.a - 1, bn.b);
      if (bn.a < m) tang(bn.a + 1, bn.b);
      if (bn.b > 1) tang(bn.a, bn.b - 1);
      if (bn.b < m) tang(bn.a, bn.b + 1);
      trip.emplace_back(r, r, h + 0.5 * h3 * (q[i1] - lambda_) + 0.5 * h * deg + h * h * imp);
      trip.emplace_back(r, i1, -h);
    } else {
      trip.emplace_back(r, r, 3.0 / (2.0 * h) + imp);
      trip.emplace_back(r, i1, -2.0 / h);
      trip.emplace_back(r, iidx(g, bn.inward2), 0.5 / h);
    }
  }
  A_.resize(ni + nb, ni + nb);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();

  // H^1 Gram: h^3 mass on interior nodes (the face nodes carry no volume),
  // h per grid edge touching an interior node
  std::vector<Eigen::Triplet<double>> ht;
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Idx3 p = g.interior_ijk(id);
    const auto r = static_cast<Eigen::Index>(id);
    ht.emplace_back(r, r, h3);
    for (int d = 0; d < 3; ++d)
      for (int s = -1; s <= 1; s += 2) {
        Idx3 nbp = p;
        nbp[d] += s;
        Eigen::Index c;
        if (g.is_interior(nbp)) {
          if (s < 0) continue;  // count each interior edge once
          c = iidx(g, nbp);
        } else {
          c = ni + static_cast<Eigen::Index>(g.boundary_id_of(nbp));
        }
        ht.emplace_back(r, r, h);
        ht.emplace_back(c, c, h);
        ht.emplace_back(r, c, -h);
        ht.emplace_back(c, r, -h);
      }
  }
  H1_.resize(ni + nb, ni + nb);
  H1_.setFromTriplets(ht.begin(), ht.end());
}

CVec RobinSolver::rhs(const CVec& f, const CVec& phi) const {
  const Geometry& g = *geometry();
  const double h = g.h(), h3 = h * h * h;
  const auto ni = static_cast<Eigen::Index>(g.interior_count());
  const auto nb = static_cast<Eigen::Index>(g.boundary_count());
  CVec r = CVec::Zero(ni + nb);
  if (f.size()) {
    if (f.size() != ni) throw ShapeError("source length");
    r.head(ni) = h3 * f;
  }
  if (phi.size() && phi.size() != nb) throw ShapeError("Robin datum length");
  for (std::size_t b = 0; b < g.boundary_count(); ++b) {
    const auto bi = static_cast<Eigen::Index>(b);
    Complex v = phi.size() ? phi[bi] : Complex(0.0);
    if (opt_.flux == FluxStencil::green) {
      v *= h * h;
      if (f.size()) v += 0.5 * h3 * f[iidx(g, g.boundary_node(b).inward1)];
    }
    r[ni + bi] = v;
  }
  return r;
}

CVec RobinSolver::rhs_adjoint_f(const CVec& r) const {
  const Geometry& g = *geometry();
  const double h = g.h(), h3 = h * h * h;
  const auto ni = static_cast<Eigen::Index>(g.interior_count());
  CVec out = h3 * r.head(ni);
  if (opt_.flux == FluxStencil::green)
    for (std::size_t b = 0; b < g.boundary_count(); ++b)
      out[iidx(g, g.boundary_node(b).inward1)] += 0.5 * h3 * r[ni + static_cast<Eigen::Index>(b)];
  return out;
}

CVec RobinSolver::rhs_adjoint_phi(const CVec& r) const {
  const Geometry& g = *geometry();
  const double h = g.h();
  const auto ni = static_cast<Eigen::Index>(g.interior_count());
  const auto nb = static_cast<Eigen::Index>(g.boundary_count());
  const double sc = opt_.flux == FluxStencil::green ? h * h : 1.0;
  return sc * r.segment(ni, nb);
}

RobinSolution RobinSolver::solve(const CVec& f, const CVec& phi) const {
  const Geometry& g = *geometry();
  const auto ni = static_cast<Eigen::Index>(g.interior_count());
  const auto nb = static_cast<Eigen::Index>(g.boundary_count());
  const CVec b = rhs(f, phi);
  CVec x = lu_->solve(b);
  const CVec res = b - A_ * x;
  if (b.norm() > 0 && res.norm() > 1e-12 * b.norm()) x += lu_->solve(res);
  if (!x.allFinite()) throw SingularSystemError("impedance solve produced non-finite values");
  RobinSolution s;
  s.interior = ComplexField(geometry(), Support::interior, x.head(ni));
  s.trace = ComplexField(geometry(), Support::boundary, x.segment(ni, nb));
  return s;
}

RobinSolution RobinSolver::solve(const ComplexField& f, const ComplexField& phi) const {
  CVec fv, pv;
  if (f.size()) {
    f.check();
    if (f.support != Support::interior) throw SupportError("source must be an interior field");
    fv = f.values;
  }
  if (phi.size()) {
    phi.check();
    if (phi.support != Support::boundary) throw SupportError("Robin datum must be a boundary field");
    pv = phi.values;
  }
  return solve(fv, pv);
}

CVec RobinSolver::robin_datum(const CVec& u, const CVec& trace, const CVec& f) const {
  const Geometry& g = *geometry();
  const double h = g.h();
  const double sl = std::sqrt(lambda_);
  const Complex I(0.0, 1.0);
  CVec out(static_cast<Eigen::Index>(g.boundary_count()));
  const CVec LT = opt_.flux == FluxStencil::green ? face_laplacian(g, trace) : CVec();
  for (std::size_t b = 0; b < g.boundary_count(); ++b) {
    const auto& bn = g.boundary_node(b);
    const auto bi = static_cast<Eigen::Index>(b);
    const Eigen::Index i1 = iidx(g, bn.inward1);
    Complex dn;
    if (opt_.flux == FluxStencil::green) {
      dn = (trace[bi] - u[i1]) / h + 0.5 * h * ((q_.values()[i1] - lambda_) * trace[bi] + LT[bi]);
      if (f.size()) dn -= 0.5 * h * f[i1];
    } else {
      dn = (3.0 * trace[bi] - 4.0 * u[i1] + u[iidx(g, bn.inward2)]) / (2.0 * h);
    }
    out[bi] = dn - static_cast<double>(params_.sign) * I * params_.a[bi] * sl * trace[bi];
  }
  return out;
}

std::pair<double, double> RobinSolver::residuals(const RobinSolution& s, const CVec& f, const CVec& phi) const {
  const Geometry& g = *geometry();
  const double h = g.h();
  const double w = 1.0 / (h * h);
  const CVec& u = s.interior.values;
  const CVec& t = s.trace.values;
  CVec r(u.size());
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Idx3 p = g.interior_ijk(id);
    const auto i = static_cast<Eigen::Index>(id);
    Complex acc = (6.0 * w + q_.values()[i] - lambda_) * u[i];
    for (int d = 0; d < 3; ++d)
      for (int sg = -1; sg <= 1; sg += 2) {
        Idx3 nbp = p;
        nbp[d] += sg;
        acc -= w * (g.is_interior(nbp) ? u[iidx(g, nbp)] : t[static_cast<Eigen::Index>(g.boundary_id_of(nbp))]);
      }
    if (f.size()) acc -= f[i];
    r[i] = acc;
  }
  CVec rb = robin_datum(u, t, f);
  if (phi.size()) rb -= phi;
  return {std::sqrt(h * h * h) * r.norm(), h * rb.norm()};
}

RobinSolver::BoundReport RobinSolver::h1_bound(int max_iter, double tol) const {
  const Geometry& g = *geometry();
  const double h = g.h(), h3 = h * h * h;
  const auto ni = static_cast<Eigen::Index>(g.interior_count());
  const auto nb = static_cast<Eigen::Index>(g.boundary_count());
  BoundReport rep;
  // power iteration on S^* H S for S = A^{-1} B, in the data inner product
  auto gain = [&](bool source) {
    std::mt19937_64 rng(opt_.seed + (source ? 11 : 23));
    std::normal_distribution<double> nd;
    const Eigen::Index n = source ? ni : nb;
    const double wdat = source ? h3 : h * h;
    CVec z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = Complex(nd(rng), nd(rng));
    z /= std::sqrt(wdat) * z.norm();
    double prev = 0.0, val = 0.0;
    int stable = 0, it = 0;
    for (it = 1; it <= max_iter; ++it) {
      const CVec b = source ? rhs(z, CVec()) : rhs(CVec(), z);
      const CVec u = lu_->solve(b);
      const CVec Hu = H1_.cast<Complex>() * u;
      val = std::sqrt(std::max(0.0, u.dot(Hu).real()));  // ||u||_{H^1} for ||z|| = 1
      const CVec y = lu_->adjoint().solve(Hu);
      CVec zn = (source ? rhs_adjoint_f(y) : rhs_adjoint_phi(y)) / wdat;
      const double zl = std::sqrt(wdat) * zn.norm();
      if (!(zl > 0.0)) break;
      z = zn / zl;
      if (std::abs(val - prev) <= tol * val) {
        if (++stable >= 3) break;
      } else {
        stable = 0;
      }
      prev = val;
    }
    rep.iterations = std::max(rep.iterations, std::min(it, max_iter));
    return val;
  };
  rep.source_gain = gain(true);
  rep.boundary_gain = gain(false);
  rep.sup_ratio = std::max(rep.source_gain, rep.boundary_gain);
  return rep;
}

RobinSolution solve_robin(const Potential& q, double lambda, const ImpedanceParams& params, const ComplexField& f,
                          const ComplexField& phi, SolverOptions opt) {
  RobinSolver s(q, lambda, params, opt);
  return s.solve(f, phi);
}

}  // namespace helmstab
