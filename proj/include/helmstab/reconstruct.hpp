#pragma once

#include <memory>
#include <string>
#include <vector>

#include "helmstab/boundary_map.hpp"
#include "helmstab/cgo.hpp"
#include "helmstab/runge.hpp"

namespace helmstab {

// ---- schedules and the modulus ---------------------------------------------

struct ScheduleParams {
  int n = 3;
  double varkappa = 1.0;
  double c = 1.0;
  double theta = 0.5;
  double delta_interp = 2.5;
  double s = 1.0;
  double epsilon = 0.0;
  double log_epsilon = 0.0;
  double tau = 1.0;
};

// s = tau^{2/(n+2)}, eps = tau^{-16/(n+2)} exp(-4 varkappa tau)
ScheduleParams schedule(double tau, ScheduleParams spec = {});

struct ModulusSpec {
  double c = 1.0;
  int n = 3;
  // log of the branch point e^{e^{e^c}}
  double log_branch() const;
};

// logloglog r from log r; needs log r > e
double triple_log_from_log(double log_r);
// Phi_c(r) = 1/r up to the branch point, (logloglog r)^{-2/(n+2)} beyond it.
// The two pieces do not meet; the jump is kept as defined.
double phi_c(double r, const ModulusSpec& spec);
double phi_c_log(double log_r, const ModulusSpec& spec);

// root of tau^{2/(n+2)} e^{e^{e^{varkappa tau}}} = 1/C when e^{e^{e^varkappa}} C < 1, else 1
double select_tau(double C, double varkappa, int n = 3);
double select_tau_log(double log_C, double varkappa, int n = 3);
// log of tau^{2/(n+2)} e(varkappa tau) C, zero at the root
double select_tau_residual_log(double tau, double log_C, double varkappa, int n = 3);

// ---- pairings ---------------------------------------------------------------

// h^3 sum over Omega0 of dq u1 u2; dq has to vanish on Omega1
Complex pairing_interior(const RealField& dq, const ComplexField& u1, const ComplexField& u2);
// same with the CGO product written as exp(-i eta.x)(1 + w1)(1 + w2)
Complex pairing_interior(const RealField& dq, const CgoSolution& s1, const CgoSolution& s2);

// <(Lambda1 - Lambda2) tr1, tr2>_{L2(Sigma)} with traces given by coefficients
// in the map's input basis. For Robin-to-Dirichlet maps the sign is flipped so
// that both kinds approximate the interior pairing.
Complex pairing_boundary(const BoundaryMap& diff, const TraceBasis& basis, const CVec& c1, const CVec& c2);
// nodal form on the whole boundary; output restricted to sigma when given
Complex pairing_boundary(const BoundaryOperator& diff, const Geometry& g, const CVec& tr1, const CVec& tr2,
                         const std::vector<char>* sigma = nullptr);

// ---- Fourier estimates ------------------------------------------------------

enum class QhatMode { oracle, data, runge };
QhatMode parse_qhat_mode(const std::string& s);
std::string qhat_mode_name(QhatMode m);

struct QhatSetup {
  QhatMode mode = QhatMode::data;
  const Potential* q1 = nullptr;
  const Potential* q2 = nullptr;
  CgoOptions cgo;
  std::shared_ptr<const BoundaryOperator> diff;   // data, runge
  std::shared_ptr<const BoundaryOperator> noise;  // optional unit perturbation
  // impedance maps take Robin data of the CGO fields
  std::shared_ptr<const RobinSolver> robin;
  // runge route
  std::shared_ptr<const RungeOperator> runge1, runge2;
  double runge_threshold = 1e-8;
  double max_defect = 0.1;  // relative L2(Omega0)
};

struct QhatEstimate {
  Vec3 eta{0, 0, 0};
  double tau = 0.0;
  double lambda = 0.0;
  QhatMode mode = QhatMode::oracle;
  Complex value{0, 0};       // unperturbed estimate
  Complex noise_unit{0, 0};  // pairing through the unit perturbation
  Complex remainder{0, 0};   // h^3 sum dq rho
  double remainder_bound = 0.0;  // ||dq||_inf ||rho||_{L1(Omega0)}
  Complex exact{0, 0};           // Riemann-sum Fourier coefficient of dq
  int iterations = 0;            // max over the pair
  double cgo_residual = 0.0;
  double w_times_im_xi = 0.0;
  double im_xi = 0.0;
  double runge_defect = 0.0;  // relative, max over the pair
  Complex at(double level) const { return value + level * noise_unit; }
};

QhatEstimate qhat_estimate(const Vec3& eta, double tau, double lambda, const QhatSetup& in);

// boundary data the data mode pairs for (eta, tau, lambda): CGO traces, or
// their Robin data for impedance maps
std::pair<CVec, CVec> cgo_boundary_data(const Vec3& eta, double tau, double lambda, const QhatSetup& in);

// ---- low-pass inversion -----------------------------------------------------

struct LatticePoint {
  Idx3 n{0, 0, 0};  // signed bin
  Vec3 eta{0, 0, 0};
  std::size_t bin = 0;  // FFT-order index on the torus
};

// all dual-lattice points of t with |eta| <= s; half keeps one of each
// conjugate pair (first nonzero coordinate positive) plus the origin
std::vector<LatticePoint> lowpass_lattice(const TorusGrid& t, double s, bool half = false);
// index of the bin of -n
std::size_t conjugate_bin(const TorusGrid& t, const LatticePoint& p);

struct LowpassResult {
  ComplexField torus_field;  // on the H^-1 torus
  RealField interior;        // real part restricted to the box
  double s = 0.0;
  int modes = 0;
  double tail_bound_sq = 0.0;  // s^-2 kappa^2 vol(Omega0)
  double tail_bound = 0.0;
};

// samples are indexed like points; conjugates are filled in for missing -eta
LowpassResult lowpass_invert(GeometryPtr g, const std::vector<LatticePoint>& points, const std::vector<Complex>& samples,
                             double s, double kappa);

// H^-1 distance between the truncated estimate and dq, from the exact
// coefficients (FFT order): estimates inside |eta| <= s, dq alone outside
double hminus1_error(const TorusGrid& t, const CVec& exact, const std::vector<LatticePoint>& points,
                     const std::vector<Complex>& samples, double s);
// (1/V) sum (1 + |k|^2)^{-1} |c_k|^2 over |k| > s
double hminus1_tail_sq(const TorusGrid& t, const CVec& exact, double s);
double omega0_volume(const Geometry& g);

void write_qhat_csv(const std::string& path, const std::vector<QhatEstimate>& est, double level = 0.0);

}  // namespace helmstab
