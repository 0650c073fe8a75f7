#pragma once

#include <vector>

#include "helmstab/fft.hpp"
#include "helmstab/field.hpp"

namespace helmstab {

// eta1, eta2 orthogonal to each other and to eta, |eta1|^2 = tau^2 + lambda,
// |eta2|^2 = |eta|^2/4 + tau^2, xi1 = eta/2 + eta1 + i eta2, xi2 = eta/2 - eta1 - i eta2
struct FrequencyPair {
  Vec3 eta{0, 0, 0};
  double tau = 1.0;
  double lambda = 1.0;
  Vec3 eta1{0, 0, 0};
  Vec3 eta2{0, 0, 0};
  CVec3 xi1{};
  CVec3 xi2{};
};

// axes are tried in hint order; the one with the largest component orthogonal
// to what is already spanned wins, earlier hints win ties
FrequencyPair make_frequency_pair(const Vec3& eta, double tau, double lambda, const Idx3& hint = {0, 1, 2});
// largest violation among the pair invariants (zero up to rounding)
double frequency_pair_defect(const FrequencyPair& p);

// sum_d (4/h^2) sin^2(h xi_d / 2): the 7-point symbol at a complex frequency
Complex grid_dispersion(const CVec3& xi, double h);

// Pair moved onto the discrete dispersion surface grid_dispersion = lambda,
// keeping xi1 + xi2 = eta (minimum-norm Newton on the common half-difference).
struct AdaptedPair {
  CVec3 xi1{};
  CVec3 xi2{};
  int iterations = 0;
  double defect = 0.0;  // max |grid_dispersion - lambda|
  double shift = 0.0;   // |zeta_adapted - zeta_continuum|
};
AdaptedPair adapt_to_grid(const FrequencyPair& p, double h, int max_iter = 50);

enum class SymbolKind { grid, continuum };
SymbolKind parse_symbol(const std::string& s);
std::string symbol_name(SymbolKind k);

// Fourier multiplier 1/P on the dual lattice of a torus, shifted by half a
// lattice step along a subset of axes. P is the conjugated symbol
//   grid:      sum_d (4/h^2) sin^2(h (k_d - xi_d)/2) - lambda
//   continuum: k.k - 2 xi.k   (xi.xi = lambda)
// and the shift maximising min |P| among the seven nonzero half-step
// patterns is used unless one is forced.
class FaddeevMultiplier {
 public:
  FaddeevMultiplier(const TorusGrid& t, const CVec3& xi, double lambda, SymbolKind kind = SymbolKind::grid,
                    double guard = 1e-8, int forced_shift = 0);

  const TorusGrid& torus() const { return t_; }
  const CVec3& xi() const { return xi_; }
  int shift_code() const { return code_; }  // bit d set: half step along axis d
  Vec3 shift() const;
  double min_symbol() const { return min_abs_; }
  // operator norm on the shifted-mode space
  double norm() const { return 1.0 / min_abs_; }
  // L^2 -> H^2 gain, sup of (1 + |k|^2) / |P| over the shifted modes
  double h2_norm() const { return h2_gain_; }
  Complex symbol(const Vec3& k) const;
  // shifted frequency of FFT bin (a, b, c)
  Vec3 frequency(const Idx3& bin) const;

  // in place on a torus array (node order of TorusGrid), using fft as workspace
  void apply(Complex* data, Fft3& fft) const;
  // same with the symbol instead of its inverse
  void apply_symbol(Complex* data, Fft3& fft) const;
  ComplexField apply(const ComplexField& f) const;

 private:
  void multiply(Complex* data, Fft3& fft, bool inverse) const;
  TorusGrid t_;
  CVec3 xi_;
  double lambda_;
  SymbolKind kind_;
  int code_ = 0;
  double min_abs_ = 0.0;
  double h2_gain_ = 0.0;
  std::vector<Complex> inv_;  // 1/P per bin
  std::vector<Complex> sym_;
  std::array<std::vector<Complex>, 3> phase_;  // exp(-i delta_d j h)
};

ComplexField faddeev_apply(const CVec3& xi, double lambda, const ComplexField& f,
                           SymbolKind kind = SymbolKind::grid);

struct CgoOptions {
  SymbolKind symbol = SymbolKind::grid;
  double tol = 1e-10;
  int max_iter = 50;
  int growth_limit = 5;
  double guard = 1e-8;
};

// u = exp(-i x.xi)(1 + w) on the CGO torus cell around X; x = global index * h
struct CgoSolution {
  GeometryPtr geometry;
  CVec3 xi{};
  double lambda = 0.0;
  SymbolKind symbol = SymbolKind::grid;
  ComplexField w;  // torus support, whole cell
  int shift_code = 0;
  double min_symbol = 0.0;
  double h2_gain = 0.0;  // L^2 -> H^2 norm of the multiplier
  int iterations = 0;
  double final_update = 0.0;
  double lipschitz = 0.0;  // largest measured ratio of successive updates
  double residual = 0.0;   // ||(-Delta_h + q - lambda) u||_{L2(X)} / ||u||_{L2(X)}
  double w_norm_X = 0.0;
  double u_norm_X = 0.0;
  double im_xi = 0.0;
  double w_times_im_xi() const { return w_norm_X * im_xi; }

  bool in_cell(const Idx3& g) const;
  Complex w_at(const Idx3& g) const;
  Complex u_at(const Idx3& g) const;
  // values on X nodes (lexicographic over the X box)
  CVec u_on_X() const;
  CVec w_on_X() const;
  // values on the box nodes; needs the box inside the cell
  CVec interior_values() const;
  CVec boundary_trace() const;
  bool box_in_cell() const;
};

// fixed point w = E[-q (1 + w)] with q cut off outside X
CgoSolution solve_cgo(const Potential& q, const CVec3& xi, double lambda, const CgoOptions& opt = {});
// both CGOs of a pair; the grid symbol adapts the pair first
std::pair<CgoSolution, CgoSolution> solve_cgo_pair(const Potential& q1, const Potential& q2, const FrequencyPair& p,
                                                   const CgoOptions& opt = {});

// rho = exp(-i eta.x)(w1 + w2 + w1 w2) on X
struct ProductRemainder {
  Vec3 eta{0, 0, 0};
  CVec rho;               // on X nodes
  double identity_defect = 0.0;  // max |u1 u2 - exp(-i eta.x) - rho| / max(1, |u1 u2|)
  double l1_omega0 = 0.0;  // h^3 sum over Omega0 of |rho|
};
ProductRemainder cgo_product_remainder(const CgoSolution& s1, const CgoSolution& s2);

// X node helpers
std::size_t x_node_count(const Geometry& g);
std::vector<Idx3> x_nodes(const Geometry& g);
double x_volume(const Geometry& g);

// smallest tau in [lo, hi] at which the fixed point converges, by bisection
struct VarpiEstimate {
  double tau = 0.0;
  double im_xi = 0.0;
  bool bracketed = false;
  int solves = 0;
};
VarpiEstimate estimate_varpi(const Potential& q, const Vec3& eta, double lambda, double lo, double hi,
                             const CgoOptions& opt = {}, int steps = 12);

// least-squares slope of log ||u|| against |Im xi|
double fit_varkappa(const std::vector<double>& im_xi, const std::vector<double>& u_norms);

}  // namespace helmstab
