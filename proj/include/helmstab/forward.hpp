#pragma once

#include <memory>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "helmstab/field.hpp"
#include "helmstab/sobolev.hpp"

namespace helmstab {

// How boundary fluxes are formed from a discrete solution.
//  green: (u_b - u_1)/h + (h/2) [(q_1 - lambda) u_b + (L_T u)_b], the half-cell
//         balance. It is second order for solutions and keeps the discrete
//         Green identity exact, so maps are symmetric.
//  one_sided: (3u_b - 4u_1 + u_2)/(2h), the generic normal_derivative stencil.
enum class FluxStencil { green, one_sided };
FluxStencil parse_flux(const std::string& s);
std::string flux_name(FluxStencil f);

struct SolverOptions {
  bool check_spectrum = true;
  double spectral_margin = 1e-6;  // relative to lambda
  int proximity_iterations = 12;
  FluxStencil flux = FluxStencil::green;
  std::uint64_t seed = 7;
};

using SparseR = Eigen::SparseMatrix<double>;
using SparseC = Eigen::SparseMatrix<Complex>;

// (-Delta_h + q - lambda) on interior nodes with Dirichlet rows eliminated,
// factored once and shared read-only by every solve at this (q, lambda).
class DirichletSolver {
 public:
  DirichletSolver(Potential q, double lambda, SolverOptions opt = {});

  GeometryPtr geometry() const { return q_.geometry(); }
  const Potential& potential() const { return q_; }
  double lambda() const { return lambda_; }
  const SolverOptions& options() const { return opt_; }
  const SparseR& matrix() const { return A_; }

  // interior values for source f (may be empty) and trace phi
  CVec solve(const CVec& f, const CVec& phi) const;
  ComplexField solve(const ComplexField& f, const ComplexField& phi) const;
  RealField solve(const RealField& f, const RealField& phi) const;
  // raw (A - lambda)^{-1} on interior vectors, several columns at once
  RMat solve_raw(const RMat& rhs) const;
  CMat solve_raw(const CMat& rhs) const;

  // (-Delta_h + q - lambda) u - f at interior nodes, trace phi
  CVec residual(const CVec& u, const CVec& f, const CVec& phi) const;
  // outward boundary flux of the solution with trace phi
  CVec flux(const CVec& u, const CVec& phi) const;
  CVec flux(const CVec& u, const CVec& phi, FluxStencil st) const;

  // lower bound on ||(A - lambda)^{-1}|| from the proximity probe, and the
  // eigenvalue it points at
  double resolvent_lower_bound() const { return probe_norm_; }
  double probe_eigenvalue() const { return probe_mu_; }

 private:
  void assemble();
  void probe_spectrum();
  Potential q_;
  double lambda_;
  SolverOptions opt_;
  SparseR A_;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseR, Eigen::Lower, Eigen::AMDOrdering<int>>> ldlt_;
  double probe_norm_ = 0.0;
  double probe_mu_ = 0.0;
};

using DirichletSolverPtr = std::shared_ptr<const DirichletSolver>;

ComplexField solve_dirichlet(const Potential& q, double lambda, const ComplexField& f, const ComplexField& phi,
                             SolverOptions opt = {});

// tangential face Laplacian (positive, Neumann-type ends) on a boundary vector
CVec face_laplacian(const Geometry& g, const CVec& phi);

// ---- impedance problem ------------------------------------------------------

struct ImpedanceParams {
  RVec a;         // boundary coefficient, strictly positive
  int sign = +1;  // +1: (d_nu - i a sqrt(lambda)) u = phi, -1: (d_nu + i a sqrt(lambda)) u = phi
  double lambda0 = 1.0;

  static ImpedanceParams constant(const Geometry& g, double a, int sign = +1, double lambda0 = 1.0);
  void validate(const Geometry& g) const;
};

struct RobinSolution {
  ComplexField interior;
  ComplexField trace;
};

// Unknowns are interior and face nodes. Face rows carry the Robin condition
// with the flux stencil of the options; with the green stencil and the row
// scaling used here the matrix is complex symmetric.
class RobinSolver {
 public:
  RobinSolver(Potential q, double lambda, ImpedanceParams params, SolverOptions opt = {});

  GeometryPtr geometry() const { return q_.geometry(); }
  const Potential& potential() const { return q_; }
  double lambda() const { return lambda_; }
  const ImpedanceParams& params() const { return params_; }
  const SolverOptions& options() const { return opt_; }

  RobinSolution solve(const CVec& f, const CVec& phi) const;
  RobinSolution solve(const ComplexField& f, const ComplexField& phi) const;

  // Robin datum (d_nu -+ i a sqrt(lambda)) u of a discrete field, with the same
  // stencil as the face rows (source f enters green rows; may be empty)
  CVec robin_datum(const CVec& u, const CVec& trace, const CVec& f = CVec()) const;
  // interior and Robin-row residuals of a candidate solution
  std::pair<double, double> residuals(const RobinSolution& s, const CVec& f, const CVec& phi) const;

  // sup over data of ||u||_{H^1} / (||f|| + ||phi||), by power iteration on
  // the source and boundary parts separately (the sup is their maximum)
  struct BoundReport {
    double source_gain = 0.0;
    double boundary_gain = 0.0;
    double sup_ratio = 0.0;
    int iterations = 0;
  };
  BoundReport h1_bound(int max_iter = 400, double tol = 1e-7) const;

 private:
  void assemble();
  CVec rhs(const CVec& f, const CVec& phi) const;
  CVec rhs_adjoint_f(const CVec& r) const;
  CVec rhs_adjoint_phi(const CVec& r) const;
  Potential q_;
  double lambda_;
  ImpedanceParams params_;
  SolverOptions opt_;
  SparseC A_;
  SparseR H1_;  // H^1 Gram on [interior; face] unknowns
  std::shared_ptr<Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>>> lu_;
};

using RobinSolverPtr = std::shared_ptr<const RobinSolver>;

RobinSolution solve_robin(const Potential& q, double lambda, const ImpedanceParams& params, const ComplexField& f,
                          const ComplexField& phi, SolverOptions opt = {});

}  // namespace helmstab
