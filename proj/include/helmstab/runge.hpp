#pragma once

#include <string>
#include <vector>

#include "helmstab/forward.hpp"
#include "helmstab/trace_basis.hpp"

namespace helmstab {

// T: Gamma-supported traces (coefficients in an H^{3/2}-orthonormal basis)
// to Dirichlet solutions restricted to Omega0. The SVD is that of h^{3/2} T,
// so left vectors u_j = h^{-3/2} U_j are L2(Omega0)-orthonormal.
struct RungeOperator {
  GeometryPtr geometry;
  double lambda = 0.0;
  std::string potential_id;
  TraceBasisPtr basis;
  RMat T;      // |Omega0| x k, plain nodal values
  RVec sigma;  // nonincreasing
  RMat U;      // weighted left vectors (Euclidean-orthonormal)
  RMat V;      // right vectors in coefficient space

  int size() const { return static_cast<int>(T.cols()); }
  // u_j as nodal values on Omega0
  RVec left_vector(int j) const;
};

RungeOperator assemble_runge_operator(const DirichletSolver& solver, TraceBasisPtr basis);
RungeOperator assemble_runge_operator(const Potential& q, double lambda, int basis_size, SolverOptions opt = {});

struct RungeResult {
  double t = 0.0;
  CVec coeffs;          // phi_t in basis coefficients
  CVec phi;             // phi_t as a boundary vector
  CVec approximant;     // T phi_t on Omega0
  CVec defect;          // v_t = u0 - T phi_t on Omega0
  CVec defect_in_span;  // sum over tau_j <= t of a_j u_j
  CVec a;               // (u0, u_j)_{L2(Omega0)}
  int kept = 0;         // |{j : tau_j > t}|
  double u0_norm = 0.0;
  double defect_norm = 0.0;
  double defect_in_span_norm = 0.0;
  double phi_norm = 0.0;          // F-perp norm = coefficient norm
  double approximant_norm = 0.0;
  double orthogonality = 0.0;     // |(T phi_t, v_t)| / (||T phi_t|| ||v_t||) or 0
  double h2_proxy = -1.0;         // ||v||_{H^2(Omega)} of the global solution, if requested
};

// u0 lives on the Omega0 nodes (order of Geometry::omega0_nodes)
RungeResult runge_approximate(const RungeOperator& op, const CVec& u0, double t,
                              const DirichletSolver* solver = nullptr);

struct TradeoffPoint {
  double t;
  double defect_norm;
  double defect_in_span_norm;
  double phi_norm;
  int kept;
};
std::vector<TradeoffPoint> runge_tradeoff_curve(const RungeOperator& op, const CVec& u0,
                                                const std::vector<double>& t_grid);
void write_tradeoff_csv(const std::string& path, const std::vector<TradeoffPoint>& pts);

// threshold t = eps^{1/2} exp(-4 exp(c/eps)), in log space
double runge_threshold_log(double eps, double c);

}  // namespace helmstab
