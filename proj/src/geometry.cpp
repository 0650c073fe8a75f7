#include "helmstab/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

namespace helmstab {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::array<int, 2> face_tangent_axes(int f) {
  switch (face_axis(f)) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

std::string face_name(int f) {
  static const char* names[] = {"x0", "x1", "y0", "y1", "z0", "z1"};
  if (f < 0 || f > 5) throw GeometryError("face index out of range");
  return names[f];
}

int parse_face(const std::string& name) {
  for (int f = 0; f < 6; ++f)
    if (face_name(f) == name) return f;
  throw GeometryError("unknown face '" + name + "' (expected x0,x1,y0,y1,z0,z1)");
}

Patch Patch::all_faces() {
  Patch p;
  for (int f = 0; f < 6; ++f) p.rects.push_back(PatchRect{f});
  return p;
}

Patch Patch::face(int f) {
  Patch p;
  p.rects.push_back(PatchRect{f});
  return p;
}

Geometry::Geometry(GeometrySpec spec) : spec_(std::move(spec)) {
  if (spec_.dimension != 3)
    throw GeometryError("only dimension 3 is implemented");
  if (spec_.subdivisions < 4)
    throw GeometryError("grid resolution must be at least 4 subdivisions per side");
  if (!(spec_.side > 0.0)) throw GeometryError("box side must be positive");
  N_ = spec_.subdivisions;
  h_ = spec_.side / N_;
  const std::size_t m = N_ - 1;
  n_int_ = m * m * m;

  nodes_.reserve(6 * m * m);
  for (int f = 0; f < 6; ++f) {
    const int ax = face_axis(f);
    const auto t = face_tangent_axes(f);
    const int fixed = face_side(f) == 0 ? 0 : N_;
    const int step = face_side(f) == 0 ? 1 : -1;
    for (int a = 1; a < N_; ++a)
      for (int b = 1; b < N_; ++b) {
        BoundaryNode bn{};
        bn.face = f;
        bn.a = a;
        bn.b = b;
        bn.ijk[ax] = fixed;
        bn.ijk[t[0]] = a;
        bn.ijk[t[1]] = b;
        bn.inward1 = bn.ijk;
        bn.inward1[ax] += step;
        bn.inward2 = bn.ijk;
        bn.inward2[ax] += 2 * step;
        nodes_.push_back(bn);
      }
  }

  // Omega0: closed box selection of interior nodes
  const double tol = 1e-9 * h_;
  omega0_mask_.assign(n_int_, 0);
  Idx3 lo{N_, N_, N_}, hi{0, 0, 0};
  for (std::size_t id = 0; id < n_int_; ++id) {
    const Idx3 g = interior_ijk(id);
    bool in = true;
    for (int d = 0; d < 3; ++d) {
      const double x = g[d] * h_;
      if (x < spec_.omega0_lo[d] - tol || x > spec_.omega0_hi[d] + tol) in = false;
    }
    if (!in) continue;
    omega0_mask_[id] = 1;
    omega0_nodes_.push_back(id);
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], g[d]);
      hi[d] = std::max(hi[d], g[d]);
    }
  }
  if (omega0_nodes_.empty()) throw GeometryError("Omega0 contains no grid nodes");
  for (int d = 0; d < 3; ++d)
    if (lo[d] < 2 || hi[d] > N_ - 2)
      throw GeometryError("Omega0 margin violated: nodes closer than 2h to the boundary");
  o0_lo_ = lo;
  o0_hi_ = hi;

  for (std::size_t id = 0; id < n_int_; ++id)
    if (!omega0_mask_[id]) omega1_nodes_.push_back(id);
  if (omega1_nodes_.empty()) throw GeometryError("Omega1 is empty");
  {
    // edge connectivity of the shell
    std::vector<char> seen(n_int_, 0);
    std::deque<std::size_t> queue{omega1_nodes_.front()};
    seen[omega1_nodes_.front()] = 1;
    std::size_t count = 0;
    while (!queue.empty()) {
      const std::size_t id = queue.front();
      queue.pop_front();
      ++count;
      const Idx3 g = interior_ijk(id);
      for (int d = 0; d < 3; ++d)
        for (int s = -1; s <= 1; s += 2) {
          Idx3 nb = g;
          nb[d] += s;
          if (!is_interior(nb)) continue;
          const std::size_t nid = interior_index(nb[0], nb[1], nb[2]);
          if (omega0_mask_[nid] || seen[nid]) continue;
          seen[nid] = 1;
          queue.push_back(nid);
        }
    }
    if (count != omega1_nodes_.size()) throw GeometryError("Omega1 is not connected");
  }

  gamma_mask_ = patch_mask(spec_.gamma);
  sigma_mask_ = patch_mask(spec_.sigma);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (gamma_mask_[i]) gamma_nodes_.push_back(i);
    if (sigma_mask_[i]) sigma_nodes_.push_back(i);
  }
  if (gamma_nodes_.empty()) throw GeometryError("Gamma patch is empty");
  if (sigma_nodes_.empty()) throw GeometryError("Sigma patch is empty");

  if (!(spec_.torus_factor >= 1.0)) throw GeometryError("torus factor must be >= 1");
  hm1_torus_.h = h_;
  for (int d = 0; d < 3; ++d) {
    hm1_torus_.M[d] = static_cast<int>(std::lround(spec_.torus_factor * N_));
    hm1_torus_.offset[d] = 0;
    if (hm1_torus_.M[d] < N_ + 1)
      throw GeometryError("zero-extension torus must strictly contain the box");
  }

  if (!(spec_.cgo_torus_factor > 1.0)) throw GeometryError("CGO torus factor must be > 1");
  cgo_torus_.h = h_;
  for (int d = 0; d < 3; ++d) {
    x_lo_[d] = o0_lo_[d] - 2;
    x_hi_[d] = o0_hi_[d] + 2;
    const int nx = x_hi_[d] - x_lo_[d] + 1;
    int M = static_cast<int>(std::lround(spec_.cgo_torus_factor * (nx - 1)));
    if (M % 2) ++M;
    if (M < nx + 2) M = nx + 2 + (nx % 2);
    cgo_torus_.M[d] = M;
    cgo_torus_.offset[d] = x_lo_[d] - (M - nx) / 2;
  }
}

Idx3 Geometry::interior_ijk(std::size_t id) const {
  const std::size_t m = N_ - 1;
  const int k = static_cast<int>(id % m) + 1;
  const int j = static_cast<int>((id / m) % m) + 1;
  const int i = static_cast<int>(id / (m * m)) + 1;
  return {i, j, k};
}

std::size_t Geometry::boundary_id_of(const Idx3& g) const {
  int on = -1, count = 0;
  for (int d = 0; d < 3; ++d) {
    if (g[d] < 0 || g[d] > N_) return npos;
    if (g[d] == 0 || g[d] == N_) {
      on = d;
      ++count;
    }
  }
  if (count != 1) return npos;
  const int f = 2 * on + (g[on] == N_ ? 1 : 0);
  const auto t = face_tangent_axes(f);
  return boundary_index(f, g[t[0]], g[t[1]]);
}

std::vector<char> Geometry::patch_mask(const Patch& p) const {
  std::vector<char> mask(nodes_.size(), 0);
  const double tol = 1e-9 * h_;
  for (const auto& r : p.rects) {
    if (r.face < 0 || r.face > 5) throw GeometryError("patch face out of range");
    for (int a = 1; a < N_; ++a)
      for (int b = 1; b < N_; ++b) {
        const double u = a * h_, v = b * h_;
        if (u < r.u0 - tol || u > r.u1 + tol || v < r.v0 - tol || v > r.v1 + tol) continue;
        mask[boundary_index(r.face, a, b)] = 1;
      }
  }
  return mask;
}

std::string Geometry::describe() const {
  std::ostringstream os;
  os << "N=" << N_ << " h=" << h_ << " interior=" << n_int_ << " boundary=" << nodes_.size()
     << " omega0=" << omega0_nodes_.size() << " gamma=" << gamma_nodes_.size()
     << " sigma=" << sigma_nodes_.size();
  return os.str();
}

}  // namespace helmstab
