#include "helmstab/runge.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace helmstab {

RVec RungeOperator::left_vector(int j) const {
  const double h = geometry->h();
  return U.col(j) / std::pow(h, 1.5);
}

RungeOperator assemble_runge_operator(const DirichletSolver& solver, TraceBasisPtr basis) {
  if (!basis) throw ShapeError("Runge operator needs a trace basis");
  const GeometryPtr g = solver.geometry();
  if (basis->geometry != g) throw ShapeError("basis and solver live on different geometries");
  const auto& o0 = g->omega0_nodes();
  RungeOperator op;
  op.geometry = g;
  op.lambda = solver.lambda();
  op.potential_id = solver.potential().id();
  op.T.resize(static_cast<Eigen::Index>(o0.size()), basis->size());
  for (int j = 0; j < basis->size(); ++j) {
    const CVec u = solver.solve(CVec(), basis->vectors.col(j).cast<Complex>());
    for (std::size_t i = 0; i < o0.size(); ++i) op.T(static_cast<Eigen::Index>(i), j) = u[static_cast<Eigen::Index>(o0[i])].real();
  }
  op.basis = std::move(basis);
  const double w = std::pow(g->h(), 1.5);
  Eigen::BDCSVD<RMat> svd(w * op.T, Eigen::ComputeThinU | Eigen::ComputeThinV);
  op.sigma = svd.singularValues();
  op.U = svd.matrixU();
  op.V = svd.matrixV();
  return op;
}

RungeOperator assemble_runge_operator(const Potential& q, double lambda, int basis_size, SolverOptions opt) {
  DirichletSolver s(q, lambda, opt);
  const GeometryPtr g = q.geometry();
  return assemble_runge_operator(s, build_trace_basis(g, g->gamma_mask(), basis_size, 1.5));
}

RungeResult runge_approximate(const RungeOperator& op, const CVec& u0, double t, const DirichletSolver* solver) {
  if (!(t >= 0.0)) throw DomainError("threshold must be nonnegative");
  const Geometry& g = *op.geometry;
  if (u0.size() != op.T.rows()) throw ShapeError("u0 must live on the Omega0 nodes");
  const double h3 = g.h() * g.h() * g.h();
  const double w = std::sqrt(h3);
  const Eigen::Index k = op.sigma.size();

  RungeResult r;
  r.t = t;
  // a_j = h^3 sum u_j u0 = h^{3/2} U_j^T u0
  r.a = w * (op.U.transpose().cast<Complex>() * u0);
  CVec c = CVec::Zero(k);  // coefficients along right vectors
  CVec kept_part = CVec::Zero(u0.size()), tail_part = CVec::Zero(u0.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    const CVec uj = (op.U.col(j) / w).cast<Complex>();
    if (op.sigma[j] > t) {
      c[j] = r.a[j] / op.sigma[j];
      kept_part += r.a[j] * uj;
      ++r.kept;
    } else {
      tail_part += r.a[j] * uj;
    }
  }
  r.coeffs = op.V.cast<Complex>() * c;
  r.phi = op.basis->synthesize(r.coeffs);
  r.approximant = kept_part;
  r.defect = u0 - kept_part;
  r.defect_in_span = tail_part;
  auto l2 = [&](const CVec& v) { return w * v.norm(); };
  r.u0_norm = l2(u0);
  r.defect_norm = l2(r.defect);
  r.defect_in_span_norm = l2(tail_part);
  r.phi_norm = r.coeffs.norm();
  r.approximant_norm = l2(kept_part);
  if (r.approximant_norm > 0 && r.defect_norm > 0)
    r.orthogonality = std::abs(h3 * kept_part.dot(r.defect)) / (r.approximant_norm * r.defect_norm);
  if (solver) {
    const CVec v = solver->solve(CVec(), r.phi);
    const ComplexField vf(solver->geometry(), Support::interior, v);
    const ComplexField tr(solver->geometry(), Support::boundary, r.phi);
    r.h2_proxy = sobolev_interior_norm(vf, 2, tr);
  }
  return r;
}

std::vector<TradeoffPoint> runge_tradeoff_curve(const RungeOperator& op, const CVec& u0,
                                                const std::vector<double>& t_grid) {
  std::vector<TradeoffPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const RungeResult r = runge_approximate(op, u0, t);
    out.push_back({t, r.defect_norm, r.defect_in_span_norm, r.phi_norm, r.kept});
  }
  return out;
}

void write_tradeoff_csv(const std::string& path, const std::vector<TradeoffPoint>& pts) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path);
  os << "t,defect_norm,defect_in_span_norm,phi_norm,kept\n";
  char buf[256];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", p.t, p.defect_norm, p.defect_in_span_norm,
                  p.phi_norm, p.kept);
    os << buf;
  }
}

double runge_threshold_log(double eps, double c) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  return 0.5 * std::log(eps) - 4.0 * std::exp(c / eps);
}

}  // namespace helmstab
