#pragma once

#include <memory>
#include <string>
#include <vector>

#include "helmstab/forward.hpp"
#include "helmstab/trace_basis.hpp"

namespace helmstab {

enum class MapKind { dtn, rtd };
std::string map_kind_name(MapKind k);

// Matrix from the coefficients of a patch-supported trace basis to nodal
// values on the output node set. The basis is orthonormal for s_in, so the
// input Gram is the identity unless a caller says otherwise.
struct BoundaryMap {
  MapKind kind = MapKind::dtn;
  double lambda = 0.0;
  double s_in = 1.5;
  double s_out = 0.5;
  std::string potential_id;
  TraceBasisPtr basis;  // may be null for bare matrices
  RMat input_gram;      // k x k, symmetric positive definite
  std::shared_ptr<const WeightOperator> output_weight;
  std::vector<std::size_t> output_nodes;  // boundary ids, may be empty for bare matrices
  CMat matrix;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  // output scattered onto every boundary node (zeros off the output set)
  CVec embed(const CVec& out) const;
};

// bare map with identity weights, used for testing the norm
BoundaryMap bare_map(const CMat& m);

// One Dirichlet solve per basis column; output is the flux on Sigma.
BoundaryMap assemble_dtn(const DirichletSolver& solver, TraceBasisPtr basis, int threads = 1);
BoundaryMap assemble_dtn(const Potential& q, double lambda, TraceBasisPtr basis, SolverOptions opt = {});
// One impedance solve per basis column; output is the trace on Sigma.
BoundaryMap assemble_rtd(const RobinSolver& solver, TraceBasisPtr basis);
BoundaryMap assemble_rtd(const Potential& q, double lambda, const ImpedanceParams& params, TraceBasisPtr basis,
                         SolverOptions opt = {});

BoundaryMap map_difference(const BoundaryMap& a, const BoundaryMap& b);
// largest singular value of W_out^{1/2} M W_in^{-1/2}
double operator_norm(const BoundaryMap& m);
// binary matrix plus JSON metadata
void export_map(const std::string& stem, const BoundaryMap& m);

// ---- matrix-free maps on nodal boundary data -------------------------------

class BoundaryOperator {
 public:
  virtual ~BoundaryOperator() = default;
  virtual MapKind kind() const = 0;
  // full-boundary nodal data to full-boundary nodal output
  virtual CVec apply(const CVec& phi) const = 0;
};

class DtnOperator : public BoundaryOperator {
 public:
  explicit DtnOperator(std::shared_ptr<const DirichletSolver> s) : s_(std::move(s)) {}
  MapKind kind() const override { return MapKind::dtn; }
  CVec apply(const CVec& phi) const override;
  const DirichletSolver& solver() const { return *s_; }

 private:
  std::shared_ptr<const DirichletSolver> s_;
};

class RtdOperator : public BoundaryOperator {
 public:
  explicit RtdOperator(std::shared_ptr<const RobinSolver> s) : s_(std::move(s)) {}
  MapKind kind() const override { return MapKind::rtd; }
  CVec apply(const CVec& phi) const override;
  const RobinSolver& solver() const { return *s_; }

 private:
  std::shared_ptr<const RobinSolver> s_;
};

class DifferenceOperator : public BoundaryOperator {
 public:
  DifferenceOperator(std::shared_ptr<const BoundaryOperator> a, std::shared_ptr<const BoundaryOperator> b);
  MapKind kind() const override { return a_->kind(); }
  CVec apply(const CVec& phi) const override { return a_->apply(phi) - b_->apply(phi); }

 private:
  std::shared_ptr<const BoundaryOperator> a_, b_;
};

// Perturbations E with ||E|| = 1 from H^{s_in} to H^{s_out} of the whole
// boundary, E = W_out^{-1/2} G W_in^{1/2} with ||G||_2 = 1. s_in/s_out are
// (3/2, 1/2) for dtn and (1/2, 3/2) for rtd.
class NoiseOperator : public BoundaryOperator {
 public:
  NoiseOperator(GeometryPtr g, MapKind kind);
  MapKind kind() const override { return kind_; }
  CVec apply(const CVec& phi) const override;
  double s_in() const { return s_in_; }
  double s_out() const { return s_out_; }
  // the same operator seen through a map's basis and output nodes
  BoundaryMap as_map(const BoundaryMap& like) const;

 protected:
  virtual CVec apply_core(const CVec& x) const = 0;  // G
  GeometryPtr g_;
  MapKind kind_;
  double s_in_, s_out_;
  BoundarySobolev bs_;
};

// G = A diag(sigma) B^T, A and B with random orthonormal columns,
// 1 = sigma_1 >= sigma_2 >= ... > 0
class UnitNoiseOperator : public NoiseOperator {
 public:
  UnitNoiseOperator(GeometryPtr g, MapKind kind, std::uint64_t seed, int rank = 64);

 protected:
  CVec apply_core(const CVec& x) const override;

 private:
  RMat A_, B_;
  RVec sigma_;
};

// rank one and aimed at a given pair of boundary data: <E x, y> is the
// largest value any unit perturbation can produce, h^2 |W_in^{1/2} x| |W_out^{-1/2} y|
class AlignedNoiseOperator : public NoiseOperator {
 public:
  AlignedNoiseOperator(GeometryPtr g, MapKind kind, const CVec& x, const CVec& y);

 protected:
  CVec apply_core(const CVec& x) const override;

 private:
  CVec u_, v_;
};

// m + level * E, with E read through m's basis and output nodes
BoundaryMap perturbed_map(const BoundaryMap& m, const NoiseOperator& E, double level);

}  // namespace helmstab
