#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "helmstab/core.hpp"

namespace helmstab {

// Faces are numbered axis*2 + side: 0 {x1=0}, 1 {x1=L}, 2 {x2=0}, 3 {x2=L},
// 4 {x3=0}, 5 {x3=L}. Tangential coordinates on a face are the two remaining
// axes in increasing order.
inline int face_axis(int f) { return f / 2; }
inline int face_side(int f) { return f % 2; }
inline double face_outward(int f) { return face_side(f) == 0 ? -1.0 : 1.0; }
std::array<int, 2> face_tangent_axes(int f);
std::string face_name(int f);
int parse_face(const std::string& name);

// A rectangle on one face, in tangential coordinates. Defaults cover the face.
struct PatchRect {
  int face = 0;
  double u0 = 0.0;
  double u1 = 1e300;
  double v0 = 0.0;
  double v1 = 1e300;
};

struct Patch {
  std::vector<PatchRect> rects;
  static Patch all_faces();
  static Patch face(int f);
};

struct GeometrySpec {
  int dimension = 3;
  double side = 1.0;
  int subdivisions = 16;
  Vec3 omega0_lo{0.25, 0.25, 0.25};
  Vec3 omega0_hi{0.75, 0.75, 0.75};
  Patch gamma = Patch::all_faces();
  Patch sigma = Patch::all_faces();
  double torus_factor = 2.0;      // zero-extension torus for H^-1 and Fourier data
  double cgo_torus_factor = 2.0;  // CGO torus side relative to X
};

// Periodic grid with the same spacing as the box grid. Torus node j along an
// axis corresponds to global grid index offset[d] + j (coordinate times h).
struct TorusGrid {
  Idx3 M{0, 0, 0};
  Idx3 offset{0, 0, 0};
  double h = 0.0;

  std::size_t size() const {
    return static_cast<std::size_t>(M[0]) * M[1] * M[2];
  }
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * M[1] + b) * M[2] + c;
  }
  Idx3 unravel(std::size_t id) const {
    const int c = static_cast<int>(id % M[2]);
    const int b = static_cast<int>((id / M[2]) % M[1]);
    const int a = static_cast<int>(id / (static_cast<std::size_t>(M[1]) * M[2]));
    return {a, b, c};
  }
  double side(int d) const { return M[d] * h; }
  double volume() const { return side(0) * side(1) * side(2); }
  // dual lattice spacing along d
  double dual_step(int d) const { return 2.0 * kPi / side(d); }
  // signed integer frequency of FFT bin j
  int signed_bin(int d, int j) const { return j <= M[d] / 2 ? j : j - M[d]; }
  bool operator==(const TorusGrid& o) const {
    return M == o.M && offset == o.offset && h == o.h;
  }
};

struct BoundaryNode {
  int face;
  int a;  // tangential index along first tangent axis, 1..N-1
  int b;  // along second tangent axis
  Idx3 ijk;
  Idx3 inward1;  // first interior neighbour along the inward normal
  Idx3 inward2;  // second one
};

class Geometry {
 public:
  explicit Geometry(GeometrySpec spec);

  const GeometrySpec& spec() const { return spec_; }
  int dimension() const { return 3; }
  int N() const { return N_; }
  double h() const { return h_; }
  double side() const { return spec_.side; }

  // interior nodes: 1 <= i,j,k <= N-1, lexicographic with k fastest
  std::size_t interior_count() const { return n_int_; }
  std::size_t interior_index(int i, int j, int k) const {
    const std::size_t m = N_ - 1;
    return ((static_cast<std::size_t>(i) - 1) * m + (j - 1)) * m + (k - 1);
  }
  Idx3 interior_ijk(std::size_t id) const;
  bool is_interior(const Idx3& g) const {
    return g[0] > 0 && g[0] < N_ && g[1] > 0 && g[1] < N_ && g[2] > 0 && g[2] < N_;
  }

  // face nodes exclude edges and corners; face-major, then (a, b) lexicographic
  std::size_t boundary_count() const { return nodes_.size(); }
  std::size_t face_node_count() const {
    return static_cast<std::size_t>(N_ - 1) * (N_ - 1);
  }
  std::size_t boundary_index(int f, int a, int b) const {
    return static_cast<std::size_t>(f) * face_node_count() +
           (static_cast<std::size_t>(a) - 1) * (N_ - 1) + (b - 1);
  }
  const BoundaryNode& boundary_node(std::size_t id) const { return nodes_[id]; }
  // boundary id for a global index on a face (returns npos for edges/outside)
  std::size_t boundary_id_of(const Idx3& g) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Vec3 coord(const Idx3& g) const { return {g[0] * h_, g[1] * h_, g[2] * h_}; }

  const std::vector<char>& omega0_mask() const { return omega0_mask_; }
  const std::vector<std::size_t>& omega0_nodes() const { return omega0_nodes_; }
  const std::vector<std::size_t>& omega1_nodes() const { return omega1_nodes_; }
  Idx3 omega0_lo_index() const { return o0_lo_; }
  Idx3 omega0_hi_index() const { return o0_hi_; }

  const std::vector<char>& gamma_mask() const { return gamma_mask_; }
  const std::vector<char>& sigma_mask() const { return sigma_mask_; }
  const std::vector<std::size_t>& gamma_nodes() const { return gamma_nodes_; }
  const std::vector<std::size_t>& sigma_nodes() const { return sigma_nodes_; }
  std::vector<char> patch_mask(const Patch& p) const;
  bool gamma_is_full() const { return gamma_nodes_.size() == nodes_.size(); }
  bool sigma_is_full() const { return sigma_nodes_.size() == nodes_.size(); }

  // box node (0..N) at torus index 0..N, zeros elsewhere
  TorusGrid hminus1_torus() const { return hm1_torus_; }
  // X = bounding box of the Omega0 nodes inflated by 2h, CGO torus around it
  Idx3 x_lo_index() const { return x_lo_; }
  Idx3 x_hi_index() const { return x_hi_; }
  TorusGrid cgo_torus() const { return cgo_torus_; }

  std::string describe() const;

 private:
  GeometrySpec spec_;
  int N_;
  double h_;
  std::size_t n_int_;
  std::vector<BoundaryNode> nodes_;
  std::vector<char> omega0_mask_;
  std::vector<std::size_t> omega0_nodes_, omega1_nodes_;
  Idx3 o0_lo_{}, o0_hi_{};
  std::vector<char> gamma_mask_, sigma_mask_;
  std::vector<std::size_t> gamma_nodes_, sigma_nodes_;
  TorusGrid hm1_torus_, cgo_torus_;
  Idx3 x_lo_{}, x_hi_{};
};

using GeometryPtr = std::shared_ptr<const Geometry>;

inline GeometryPtr build_geometry(const GeometrySpec& spec) {
  return std::make_shared<const Geometry>(spec);
}

}  // namespace helmstab
