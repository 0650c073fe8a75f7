#include "helmstab/trace_basis.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace helmstab {

CVec TraceBasis::synthesize(const CVec& coeffs) const {
  if (coeffs.size() != vectors.cols()) throw ShapeError("coefficient count does not match the basis");
  return vectors.cast<Complex>() * coeffs;
}

CVec TraceBasis::project(const CVec& phi) const {
  BoundarySobolev bs(geometry);
  const CVec w = bs.apply(phi, s);
  return vectors.cast<Complex>().transpose() * w;
}

TraceBasisPtr build_trace_basis(GeometryPtr g, const std::vector<char>& patch, int k, double s) {
  if (k < 1) throw ShapeError("basis size must be positive");
  if (patch.size() != g->boundary_count()) throw ShapeError("patch mask length");
  const int m = g->N() - 1;
  const double h = g->h();

  struct Rect {
    int face, a0, a1, b0, b1;
  };
  std::vector<Rect> rects;
  for (int f = 0; f < 6; ++f) {
    int a0 = m + 1, a1 = 0, b0 = m + 1, b1 = 0, count = 0;
    for (int a = 1; a <= m; ++a)
      for (int b = 1; b <= m; ++b)
        if (patch[g->boundary_index(f, a, b)]) {
          a0 = std::min(a0, a);
          a1 = std::max(a1, a);
          b0 = std::min(b0, b);
          b1 = std::max(b1, b);
          ++count;
        }
    if (!count) continue;
    if (count != (a1 - a0 + 1) * (b1 - b0 + 1))
      throw GeometryError("patch on face " + face_name(f) + " is not a node rectangle");
    rects.push_back({f, a0, a1, b0, b1});
  }
  if (rects.empty()) throw GeometryError("trace basis patch is empty");

  struct Cand {
    double mu;
    int face, p, r, rect;
  };
  std::vector<Cand> cands;
  for (std::size_t ri = 0; ri < rects.size(); ++ri) {
    const auto& R = rects[ri];
    const int mu_n = R.a1 - R.a0 + 1, mv_n = R.b1 - R.b0 + 1;
    for (int p = 0; p < mu_n; ++p)
      for (int r = 0; r < mv_n; ++r) {
        const double sp = std::sin(kPi * p / (2.0 * mu_n)), sr = std::sin(kPi * r / (2.0 * mv_n));
        cands.push_back({4.0 / (h * h) * (sp * sp + sr * sr), R.face, p, r, static_cast<int>(ri)});
      }
  }
  if (static_cast<std::size_t>(k) > cands.size())
    throw ShapeError("basis size exceeds the number of patch nodes");
  // identical formulas give bitwise-equal eigenvalues, so exact comparison is safe
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return std::tie(x.mu, x.face, x.p, x.r) < std::tie(y.mu, y.face, y.p, y.r);
  });
  cands.resize(static_cast<std::size_t>(k));

  auto basis = std::make_shared<TraceBasis>();
  basis->geometry = g;
  basis->s = s;
  basis->patch = patch;
  const Eigen::Index nb = static_cast<Eigen::Index>(g->boundary_count());
  RMat C = RMat::Zero(nb, k);
  basis->eigenvalues.resize(k);
  for (int j = 0; j < k; ++j) {
    const auto& c = cands[j];
    const auto& R = rects[c.rect];
    const int mu_n = R.a1 - R.a0 + 1, mv_n = R.b1 - R.b0 + 1;
    for (int a = R.a0; a <= R.a1; ++a)
      for (int b = R.b0; b <= R.b1; ++b)
        C(static_cast<Eigen::Index>(g->boundary_index(c.face, a, b)), j) =
            std::cos(kPi * c.p * (a - R.a0 + 0.5) / mu_n) * std::cos(kPi * c.r * (b - R.b0 + 0.5) / mv_n);
    C.col(j).normalize();
    basis->eigenvalues[j] = c.mu;
    basis->labels.push_back({c.face, c.p, c.r});
  }

  BoundarySobolev bs(g);
  RMat GC(nb, k);
  for (int j = 0; j < k; ++j) GC.col(j) = bs.apply(RVec(C.col(j)), s);
  RMat K = C.transpose() * GC;
  K = 0.5 * (K + K.transpose());
  Eigen::LLT<RMat> llt(K);
  if (llt.info() != Eigen::Success) throw Error("trace basis Gram matrix is not positive definite");
  // B = C L^{-T}, so B^T G B = I
  RMat Bt = llt.matrixL().solve(RMat(C.transpose()));
  basis->vectors = Bt.transpose();
  basis->hash = hex64(fnv1a(basis->vectors.data(), sizeof(double) * basis->vectors.size()));
  return basis;
}

}  // namespace helmstab
