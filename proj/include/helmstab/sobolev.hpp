#pragma once

#include <memory>
#include <vector>

#include "helmstab/field.hpp"

namespace helmstab {

// ---- interior / torus side ------------------------------------------------

// discrete L2 with the natural measure of the support (h^3 volume, h^2 boundary)
template <class T>
double l2_norm(const GridField<T>& f);

// s in {-1, 0, 1, 2}. Interior fields: s=-1 through zero extension to the
// Fourier torus, s=1,2 through finite-difference energies with a zero trace.
// Torus fields: Fourier weights (1+|k|^2)^s for every s.
double sobolev_interior_norm(const ComplexField& f, int s);
double sobolev_interior_norm(const RealField& f, int s);
// same with an explicit boundary trace entering the difference stencils
double sobolev_interior_norm(const ComplexField& f, int s, const ComplexField& trace);

// interior field placed on a torus whose index offset says where the box sits
ComplexField zero_extend(const ComplexField& f, const TorusGrid& t);
ComplexField zero_extend(const RealField& f, const TorusGrid& t);

// h^3 * sum_x f(x) exp(-i k.x) for every dual lattice point (FFT ordering)
CVec torus_spectrum(const ComplexField& torus_field);

// returns true and the integer index when eta is on the dual lattice of t
bool on_dual_lattice(const TorusGrid& t, const Vec3& eta, Idx3* k = nullptr, double tol = 1e-9);

// direct Riemann sum h^3 sum q(x) e^{-i eta.x}; eta must be on the H^-1 torus lattice
Complex fourier_coefficient(const RealField& q, const Vec3& eta);
// all coefficients at once through the FFT (same values)
CVec fourier_coefficients(const RealField& q);

// ---- boundary side --------------------------------------------------------

// Symmetric positive weight acting on coefficient vectors of a node set.
class WeightOperator {
 public:
  virtual ~WeightOperator() = default;
  virtual std::size_t size() const = 0;
  virtual CMat apply(const CMat& x) const = 0;
  virtual std::string describe() const = 0;
  CMat dense() const;
};

class IdentityWeight : public WeightOperator {
 public:
  IdentityWeight(std::size_t n, double scale = 1.0) : n_(n), scale_(scale) {}
  std::size_t size() const override { return n_; }
  CMat apply(const CMat& x) const override { return scale_ * x; }
  std::string describe() const override;

 private:
  std::size_t n_;
  double scale_;
};

class DenseWeight : public WeightOperator {
 public:
  explicit DenseWeight(CMat w, std::string label = "dense");
  std::size_t size() const override { return static_cast<std::size_t>(w_.rows()); }
  CMat apply(const CMat& x) const override { return w_ * x; }
  std::string describe() const override { return label_; }

 private:
  CMat w_;
  std::string label_;
};

// Facewise functional calculus of the face graph Laplacians. Each face is an
// (N-1)x(N-1) node grid with Neumann-type ends, so its eigenvectors are
// products of DCT-II vectors and every weight h^2 (1+L)^s is separable.
class BoundarySobolev {
 public:
  explicit BoundarySobolev(GeometryPtr g);

  int m() const { return m_; }
  const RMat& dct() const { return Q1_; }
  const RVec& mu1() const { return mu1_; }
  double face_eigenvalue(int a, int b) const { return mu1_[a] + mu1_[b]; }
  // unit (Euclidean) eigenvector on face f, zero elsewhere
  RVec face_mode(int f, int a, int b) const;

  // h^2 (1+L)^s on all faces
  CVec apply(const CVec& phi, double s) const;
  RVec apply(const RVec& phi, double s) const;
  CMat apply(const CMat& phi, double s) const;
  // dense block-diagonal boundary Laplacian (small grids only, used by tests)
  RMat laplacian_dense() const;

  double norm(const CVec& phi, double s) const;
  // minimum of the whole-boundary norm over extensions of phi|patch
  double quotient_norm(const CVec& phi, double s, const std::vector<char>& patch) const;
  // weight S on patch-indexed vectors with x^H S x = quotient norm^2
  std::shared_ptr<const WeightOperator> patch_weight(double s, const std::vector<char>& patch) const;

  const Geometry& geometry() const { return *g_; }
  // one face block, row-major (a, b) ordering
  void apply_face(const Complex* in, Complex* out, double s) const;

 private:
  GeometryPtr g_;
  int m_;
  double h_;
  RMat Q1_;
  RVec mu1_;
};

double boundary_sobolev_norm(const ComplexField& phi, double s, const std::vector<char>& patch);
double boundary_sobolev_norm(const ComplexField& phi, double s);

// bilinear boundary pairing h^2 sum a b, no conjugation
Complex boundary_pairing(const CVec& a, const CVec& b, double h);

// second-order one-sided outward difference (3u_b - 4u_1 + u_2)/(2h)
ComplexField normal_derivative(const ComplexField& u, const ComplexField& trace);
RealField normal_derivative(const RealField& u, const RealField& trace);

}  // namespace helmstab
