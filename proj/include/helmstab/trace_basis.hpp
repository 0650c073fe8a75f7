#pragma once

#include <memory>
#include <vector>

#include "helmstab/sobolev.hpp"

namespace helmstab {

// Orthonormal (in the whole-boundary H^s norm) basis of patch-supported
// traces. Candidates are the Neumann modes of each patch rectangle, taken in
// order of increasing eigenvalue (ties: face, then mode indices).
struct TraceBasis {
  GeometryPtr geometry;
  double s = 1.5;
  RMat vectors;  // boundary_count x k, zero off the patch
  RVec eigenvalues;
  std::vector<Idx3> labels;  // (face, p, r)
  std::vector<char> patch;
  std::string hash;

  int size() const { return static_cast<int>(vectors.cols()); }
  CVec synthesize(const CVec& coeffs) const;
  // H^s projection coefficients c_j = <psi_j, phi>_{H^s}
  CVec project(const CVec& phi) const;
};

using TraceBasisPtr = std::shared_ptr<const TraceBasis>;

TraceBasisPtr build_trace_basis(GeometryPtr g, const std::vector<char>& patch, int k, double s);

}  // namespace helmstab
