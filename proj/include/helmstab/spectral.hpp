#pragma once

#include <string>
#include <vector>

#include "helmstab/forward.hpp"

namespace helmstab {

// m discrete Dirichlet eigenpairs of -Delta_h + q nearest lambda, sorted by
// distance to lambda
struct SpectralWindow {
  std::string potential_id;
  double lambda = 0.0;
  std::vector<double> eigenvalues;
  RMat vectors;  // Euclidean-orthonormal columns
  std::vector<double> residuals;  // ||A v - mu v|| per pair
  double distance = 0.0;          // min |lambda - mu|
  int iterations = 0;
};

SpectralWindow eigenpairs_near(const Potential& q, double lambda, int m, int max_iter = 500, double tol = 1e-8);

// max(1/d, 1) with d the distance from lambda to the union of the windows
double e_lambda(double lambda, const std::vector<SpectralWindow>& spectra, double guard = 1e-12);
double e_lambda_from_distance(double d, double guard = 1e-12);
double b_lambda(double lambda);

enum class Variant { dirichlet, impedance };
Variant parse_variant(const std::string& s);
std::string variant_name(Variant v);
// lambda^5 e^3 b_lambda or lambda^6 b_lambda
double modulus_prefactor(double lambda, double e, Variant v, double lambda0 = 1.0);

struct ResolventReport {
  double l2_ratio = 0.0;  // ||R f|| / ||f||
  double hj_ratio = 0.0;  // ||R f||_{H^j} / (lambda^{j/2} ||f||)
  int j = 0;
};
ResolventReport check_resolvent_bound(const DirichletSolver& solver, const RealField& f, int j = 0);
ResolventReport check_resolvent_bound(const Potential& q, double lambda, const RealField& f, int j = 0);

// sup over f of ||R_q(lambda) f|| / ||f|| by power iteration
struct SupRatio {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};
SupRatio resolvent_sup_ratio(const DirichletSolver& solver, int max_iter = 20000, double tol = 1e-15);

// ||q - q0||_inf < min(||R_{q0}(lambda)||^{-1}, kappa0), with the resolvent
// norm given through the distance from lambda to the spectrum of q0
bool in_admissible_class(const Potential& q, const Potential& q0, double distance_q0, double kappa0);

}  // namespace helmstab
