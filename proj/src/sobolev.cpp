#include "helmstab/sobolev.hpp"

#include <cmath>
#include <sstream>

#include "helmstab/fft.hpp"

namespace helmstab {

namespace {

double support_measure(const Geometry& g, Support s) {
  const double h = g.h();
  return s == Support::boundary ? h * h : h * h * h;
}

// value of u at a global index, using the trace on face nodes and zero
// outside; edge/corner nodes are not part of the discretisation.
template <class T>
struct ClosedView {
  const Geometry& g;
  const Eigen::Matrix<T, Eigen::Dynamic, 1>& u;
  const Eigen::Matrix<T, Eigen::Dynamic, 1>* trace;

  // returns false for nodes that carry no value (edges, corners, outside)
  bool get(const Idx3& p, T& out) const {
    if (g.is_interior(p)) {
      out = u[static_cast<Eigen::Index>(g.interior_index(p[0], p[1], p[2]))];
      return true;
    }
    const std::size_t b = g.boundary_id_of(p);
    if (b == Geometry::npos) return false;
    out = trace ? (*trace)[static_cast<Eigen::Index>(b)] : T(0);
    return true;
  }
};

template <class T>
double fd_norm_sq(const Geometry& g, const Eigen::Matrix<T, Eigen::Dynamic, 1>& u,
                  const Eigen::Matrix<T, Eigen::Dynamic, 1>* trace, int s) {
  const double h = g.h();
  const double h3 = h * h * h;
  ClosedView<T> view{g, u, trace};
  double l2 = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) l2 += std::norm(u[i]);
  l2 *= h3;
  if (s == 0) return l2;

  // first differences over edges with at least one interior endpoint
  double e1 = 0.0;
  const int N = g.N();
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Idx3 p = g.interior_ijk(id);
    const T up = u[static_cast<Eigen::Index>(id)];
    for (int d = 0; d < 3; ++d) {
      Idx3 q = p;
      q[d] += 1;
      T uq;
      if (view.get(q, uq)) e1 += std::norm(uq - up);
      if (p[d] == 1) {
        Idx3 r = p;
        r[d] = 0;
        T ur;
        if (view.get(r, ur)) e1 += std::norm(up - ur);
      }
    }
  }
  e1 *= h;  // h^3 * (diff/h)^2
  if (s == 1) return l2 + e1;

  // pure second differences at interior nodes, mixed ones on plaquettes
  double e2 = 0.0;
  const double w = h3 / (h * h * h * h);
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Idx3 p = g.interior_ijk(id);
    const T up = u[static_cast<Eigen::Index>(id)];
    for (int d = 0; d < 3; ++d) {
      Idx3 a = p, b = p;
      a[d] += 1;
      b[d] -= 1;
      T ua, ub;
      if (view.get(a, ua) && view.get(b, ub)) e2 += w * std::norm(ua - 2.0 * up + ub);
    }
  }
  for (int d = 0; d < 3; ++d)
    for (int e = d + 1; e < 3; ++e) {
      const int o = 3 - d - e;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 1; k < N; ++k) {
            Idx3 p00{}, p10{}, p01{}, p11{};
            p00[d] = i; p00[e] = j; p00[o] = k;
            p10 = p00; p10[d] += 1;
            p01 = p00; p01[e] += 1;
            p11 = p10; p11[e] += 1;
            if (!(g.is_interior(p00) || g.is_interior(p10) || g.is_interior(p01) || g.is_interior(p11)))
              continue;
            T a, b, c, dd;
            if (!(view.get(p00, a) && view.get(p10, b) && view.get(p01, c) && view.get(p11, dd))) continue;
            e2 += 2.0 * w * std::norm(dd - b - c + a);
          }
    }
  return l2 + e1 + e2;
}

double torus_weighted_norm(const ComplexField& f, int s) {
  const TorusGrid& t = *f.torus;
  CVec spec = torus_spectrum(f);
  double acc = 0.0;
  for (std::size_t id = 0; id < t.size(); ++id) {
    const Idx3 j = t.unravel(id);
    double k2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double kd = t.signed_bin(d, j[d]) * t.dual_step(d);
      k2 += kd * kd;
    }
    acc += std::norm(spec[static_cast<Eigen::Index>(id)]) * std::pow(1.0 + k2, s);
  }
  return std::sqrt(acc / t.volume());
}

}  // namespace

template <class T>
double l2_norm(const GridField<T>& f) {
  f.check();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) acc += std::norm(f.values[i]);
  return std::sqrt(acc * support_measure(*f.geometry, f.support));
}
template double l2_norm<double>(const RealField&);
template double l2_norm<Complex>(const ComplexField&);

double sobolev_interior_norm(const ComplexField& f, int s) {
  f.check();
  if (s < -1 || s > 2) throw DomainError("unsupported Sobolev exponent " + std::to_string(s));
  if (f.support == Support::boundary) throw SupportError("interior norm of a boundary field");
  if (f.support == Support::torus) return torus_weighted_norm(f, s);
  if (s == -1) return torus_weighted_norm(zero_extend(f, f.geometry->hminus1_torus()), -1);
  return std::sqrt(fd_norm_sq<Complex>(*f.geometry, f.values, nullptr, s));
}

double sobolev_interior_norm(const RealField& f, int s) {
  return sobolev_interior_norm(to_complex(f), s);
}

double sobolev_interior_norm(const ComplexField& f, int s, const ComplexField& trace) {
  f.check();
  trace.check();
  if (f.support != Support::interior || trace.support != Support::boundary)
    throw SupportError("expected an interior field with a boundary trace");
  if (s < 0 || s > 2) throw DomainError("trace-aware norms need s in {0,1,2}");
  return std::sqrt(fd_norm_sq<Complex>(*f.geometry, f.values, &trace.values, s));
}

ComplexField zero_extend(const ComplexField& f, const TorusGrid& t) {
  f.check();
  if (f.support != Support::interior) throw SupportError("zero extension expects an interior field");
  const Geometry& g = *f.geometry;
  ComplexField out(f.geometry, t);
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Idx3 p = g.interior_ijk(id);
    const Complex v = f.values[static_cast<Eigen::Index>(id)];
    Idx3 j;
    bool inside = true;
    for (int d = 0; d < 3; ++d) {
      j[d] = p[d] - t.offset[d];
      inside = inside && j[d] >= 0 && j[d] < t.M[d];
    }
    if (!inside) {
      if (v != Complex(0)) throw SupportError("field leaves the torus cell");
      continue;
    }
    out.values[static_cast<Eigen::Index>(t.index(j[0], j[1], j[2]))] = v;
  }
  return out;
}

ComplexField zero_extend(const RealField& f, const TorusGrid& t) { return zero_extend(to_complex(f), t); }

CVec torus_spectrum(const ComplexField& f) {
  if (f.support != Support::torus || !f.torus) throw SupportError("torus spectrum of a non-torus field");
  const TorusGrid& t = *f.torus;
  CVec data = f.values;
  Fft3 fft(t.M);
  fft.forward(data.data());
  const double h3 = t.h * t.h * t.h;
  // phase of the cell origin so that the result is sum f(x) e^{-ik.x}
  for (std::size_t id = 0; id < t.size(); ++id) {
    const Idx3 j = t.unravel(id);
    double ph = 0.0;
    for (int d = 0; d < 3; ++d) ph += t.signed_bin(d, j[d]) * t.dual_step(d) * t.offset[d] * t.h;
    data[static_cast<Eigen::Index>(id)] *= h3 * std::polar(1.0, -ph);
  }
  return data;
}

bool on_dual_lattice(const TorusGrid& t, const Vec3& eta, Idx3* k, double tol) {
  Idx3 kk{};
  for (int d = 0; d < 3; ++d) {
    const double r = eta[d] / t.dual_step(d);
    const double n = std::round(r);
    if (std::abs(r - n) > tol * std::max(1.0, std::abs(r))) return false;
    kk[d] = static_cast<int>(n);
  }
  if (k) *k = kk;
  return true;
}

Complex fourier_coefficient(const RealField& q, const Vec3& eta) {
  q.check();
  if (q.support != Support::interior) throw SupportError("fourier_coefficient expects an interior field");
  const Geometry& g = *q.geometry;
  if (!on_dual_lattice(g.hminus1_torus(), eta)) throw DomainError("frequency is not on the torus dual lattice");
  const double h = g.h();
  // separable phases keep this to three small tables
  std::vector<Complex> ph[3];
  for (int d = 0; d < 3; ++d) {
    ph[d].resize(g.N() + 1);
    for (int i = 0; i <= g.N(); ++i) ph[d][i] = std::polar(1.0, -eta[d] * i * h);
  }
  Complex acc = 0.0;
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const double v = q.values[static_cast<Eigen::Index>(id)];
    if (v == 0.0) continue;
    const Idx3 p = g.interior_ijk(id);
    acc += v * ph[0][p[0]] * ph[1][p[1]] * ph[2][p[2]];
  }
  return acc * (h * h * h);
}

CVec fourier_coefficients(const RealField& q) {
  return torus_spectrum(zero_extend(q, q.geometry->hminus1_torus()));
}

// ---------------------------------------------------------------------------

CMat WeightOperator::dense() const {
  return apply(CMat::Identity(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size())));
}

std::string IdentityWeight::describe() const {
  std::ostringstream os;
  os << "identity x " << scale_;
  return os.str();
}

DenseWeight::DenseWeight(CMat w, std::string label) : w_(std::move(w)), label_(std::move(label)) {
  if (w_.rows() != w_.cols()) throw ShapeError("dense weight must be square");
}

BoundarySobolev::BoundarySobolev(GeometryPtr g) : g_(std::move(g)) {
  m_ = g_->N() - 1;
  h_ = g_->h();
  Q1_.resize(m_, m_);
  mu1_.resize(m_);
  for (int a = 0; a < m_; ++a) {
    const double c = a == 0 ? std::sqrt(1.0 / m_) : std::sqrt(2.0 / m_);
    for (int j = 0; j < m_; ++j) Q1_(j, a) = c * std::cos(kPi * a * (j + 0.5) / m_);
    const double sn = std::sin(kPi * a / (2.0 * m_));
    mu1_[a] = 4.0 / (h_ * h_) * sn * sn;
  }
}

RVec BoundarySobolev::face_mode(int f, int a, int b) const {
  RVec v = RVec::Zero(static_cast<Eigen::Index>(g_->boundary_count()));
  const std::size_t base = static_cast<std::size_t>(f) * m_ * m_;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) v[static_cast<Eigen::Index>(base + i * m_ + j)] = Q1_(i, a) * Q1_(j, b);
  return v;
}

void BoundarySobolev::apply_face(const Complex* in, Complex* out, double s) const {
  using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> X(in, m_, m_);
  const Eigen::MatrixXcd Qc = Q1_.cast<Complex>();
  RowMat Y = Qc.transpose() * X * Qc;
  for (int a = 0; a < m_; ++a)
    for (int b = 0; b < m_; ++b) Y(a, b) *= std::pow(1.0 + mu1_[a] + mu1_[b], s);
  Eigen::Map<RowMat> Z(out, m_, m_);
  Z = (h_ * h_) * (Qc * Y * Qc.transpose());
}

CVec BoundarySobolev::apply(const CVec& phi, double s) const {
  if (static_cast<std::size_t>(phi.size()) != g_->boundary_count()) throw ShapeError("boundary vector length");
  CVec out(phi.size());
  const std::size_t fs = static_cast<std::size_t>(m_) * m_;
  for (int f = 0; f < 6; ++f) apply_face(phi.data() + f * fs, out.data() + f * fs, s);
  return out;
}

RVec BoundarySobolev::apply(const RVec& phi, double s) const {
  return apply(CVec(phi.cast<Complex>()), s).real();
}

CMat BoundarySobolev::apply(const CMat& phi, double s) const {
  CMat out(phi.rows(), phi.cols());
  for (Eigen::Index c = 0; c < phi.cols(); ++c) out.col(c) = apply(CVec(phi.col(c)), s);
  return out;
}

RMat BoundarySobolev::laplacian_dense() const {
  const Eigen::Index nb = static_cast<Eigen::Index>(g_->boundary_count());
  RMat L = RMat::Zero(nb, nb);
  const double w = 1.0 / (h_ * h_);
  for (int f = 0; f < 6; ++f)
    for (int a = 1; a <= m_; ++a)
      for (int b = 1; b <= m_; ++b) {
        const auto i = static_cast<Eigen::Index>(g_->boundary_index(f, a, b));
        const int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
        for (int t = 0; t < 4; ++t) {
          const int aa = a + da[t], bb = b + db[t];
          if (aa < 1 || aa > m_ || bb < 1 || bb > m_) continue;
          const auto j = static_cast<Eigen::Index>(g_->boundary_index(f, aa, bb));
          L(i, i) += w;
          L(i, j) -= w;
        }
      }
  return L;
}

double BoundarySobolev::norm(const CVec& phi, double s) const {
  const CVec w = apply(phi, s);
  return std::sqrt(std::max(0.0, phi.dot(w).real()));
}

namespace {

// Quotient weight of one patch for exponent s. Whole faces use the separable
// formula; partial faces keep S_f = [(G_f^{-1})_PP]^{-1} through a Cholesky
// factor of (G_f^{-1})_PP.
class PatchSobolevWeight : public WeightOperator {
 public:
  PatchSobolevWeight(const BoundarySobolev& bs, double s, const std::vector<char>& patch)
      : bs_(bs), s_(s) {
    const Geometry& g = bs.geometry();
    const int m = bs.m();
    const std::size_t fs = static_cast<std::size_t>(m) * m;
    const double h2 = g.h() * g.h();
    std::size_t offset = 0;
    for (int f = 0; f < 6; ++f) {
      Block blk;
      blk.face = f;
      blk.offset = offset;
      for (std::size_t i = 0; i < fs; ++i)
        if (patch[f * fs + i]) blk.local.push_back(static_cast<int>(i));
      if (blk.local.empty()) continue;
      blk.full = blk.local.size() == fs;
      if (!blk.full) {
        const Eigen::Index p = static_cast<Eigen::Index>(blk.local.size());
        RMat QP(p, static_cast<Eigen::Index>(fs));
        for (Eigen::Index r = 0; r < p; ++r) {
          const int a = blk.local[r] / m, b = blk.local[r] % m;
          for (int u = 0; u < m; ++u)
            for (int v = 0; v < m; ++v) QP(r, u * m + v) = bs.dct()(a, u) * bs.dct()(b, v);
        }
        RVec d(static_cast<Eigen::Index>(fs));
        for (int u = 0; u < m; ++u)
          for (int v = 0; v < m; ++v) d[u * m + v] = std::pow(1.0 + bs.face_eigenvalue(u, v), -s) / h2;
        RMat Ginv = QP * d.asDiagonal() * QP.transpose();
        blk.chol = std::make_shared<Eigen::LLT<RMat>>(Ginv);
        if (blk.chol->info() != Eigen::Success) throw Error("patch weight factorisation failed");
      }
      offset += blk.local.size();
      blocks_.push_back(std::move(blk));
    }
    n_ = offset;
  }

  std::size_t size() const override { return n_; }

  CMat apply(const CMat& x) const override {
    if (static_cast<std::size_t>(x.rows()) != n_) throw ShapeError("patch weight input rows");
    const int m = bs_.m();
    const std::size_t fs = static_cast<std::size_t>(m) * m;
    CMat out(x.rows(), x.cols());
    for (const auto& blk : blocks_) {
      const Eigen::Index p = static_cast<Eigen::Index>(blk.local.size());
      if (blk.full) {
        CVec tmp(static_cast<Eigen::Index>(fs)), y(static_cast<Eigen::Index>(fs));
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
          tmp = x.col(c).segment(static_cast<Eigen::Index>(blk.offset), p);
          bs_.apply_face(tmp.data(), y.data(), s_);
          out.col(c).segment(static_cast<Eigen::Index>(blk.offset), p) = y;
        }
      } else {
        const CMat xb = x.middleRows(static_cast<Eigen::Index>(blk.offset), p);
        const RMat re = blk.chol->solve(RMat(xb.real()));
        const RMat im = blk.chol->solve(RMat(xb.imag()));
        out.middleRows(static_cast<Eigen::Index>(blk.offset), p) = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
      }
    }
    return out;
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "boundary Sobolev quotient weight s=" << s_ << " on " << n_ << " nodes";
    return os.str();
  }

 private:
  struct Block {
    int face = 0;
    std::size_t offset = 0;
    bool full = false;
    std::vector<int> local;
    std::shared_ptr<Eigen::LLT<RMat>> chol;
  };
  const BoundarySobolev& bs_;
  double s_;
  std::size_t n_ = 0;
  std::vector<Block> blocks_;
};

// keeps the BoundarySobolev alive next to the weight that references it
class OwningPatchWeight : public WeightOperator {
 public:
  OwningPatchWeight(std::shared_ptr<const BoundarySobolev> bs, double s, const std::vector<char>& patch)
      : bs_(std::move(bs)), w_(*bs_, s, patch) {}
  std::size_t size() const override { return w_.size(); }
  CMat apply(const CMat& x) const override { return w_.apply(x); }
  std::string describe() const override { return w_.describe(); }

 private:
  std::shared_ptr<const BoundarySobolev> bs_;
  PatchSobolevWeight w_;
};

}  // namespace

double BoundarySobolev::quotient_norm(const CVec& phi, double s, const std::vector<char>& patch) const {
  if (static_cast<std::size_t>(phi.size()) != g_->boundary_count() || patch.size() != g_->boundary_count())
    throw ShapeError("boundary vector length");
  PatchSobolevWeight w(*this, s, patch);
  CVec x(static_cast<Eigen::Index>(w.size()));
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < patch.size(); ++i)
    if (patch[i]) x[r++] = phi[static_cast<Eigen::Index>(i)];
  const CVec y = w.apply(x);
  return std::sqrt(std::max(0.0, x.dot(y).real()));
}

std::shared_ptr<const WeightOperator> BoundarySobolev::patch_weight(double s, const std::vector<char>& patch) const {
  auto self = std::make_shared<const BoundarySobolev>(*this);
  return std::make_shared<OwningPatchWeight>(std::move(self), s, patch);
}

double boundary_sobolev_norm(const ComplexField& phi, double s, const std::vector<char>& patch) {
  phi.check();
  if (phi.support != Support::boundary) throw SupportError("boundary norm of a non-boundary field");
  BoundarySobolev bs(phi.geometry);
  bool full = true;
  for (char c : patch) full = full && c;
  if (full) return bs.norm(phi.values, s);
  return bs.quotient_norm(phi.values, s, patch);
}

double boundary_sobolev_norm(const ComplexField& phi, double s) {
  return boundary_sobolev_norm(phi, s, std::vector<char>(phi.geometry->boundary_count(), 1));
}

Complex boundary_pairing(const CVec& a, const CVec& b, double h) {
  if (a.size() != b.size()) throw ShapeError("pairing length mismatch");
  return (h * h) * (a.transpose() * b)(0, 0);
}

namespace {
template <class T>
GridField<T> normal_derivative_impl(const GridField<T>& u, const GridField<T>& trace) {
  u.check();
  trace.check();
  if (u.support != Support::interior || trace.support != Support::boundary)
    throw SupportError("normal derivative needs interior values and a boundary trace");
  const Geometry& g = *u.geometry;
  GridField<T> out(u.geometry, Support::boundary);
  const double inv = 1.0 / (2.0 * g.h());
  for (std::size_t b = 0; b < g.boundary_count(); ++b) {
    const auto& bn = g.boundary_node(b);
    const T u1 = u.values[static_cast<Eigen::Index>(g.interior_index(bn.inward1[0], bn.inward1[1], bn.inward1[2]))];
    const T u2 = u.values[static_cast<Eigen::Index>(g.interior_index(bn.inward2[0], bn.inward2[1], bn.inward2[2]))];
    out.values[static_cast<Eigen::Index>(b)] = (3.0 * trace.values[static_cast<Eigen::Index>(b)] - 4.0 * u1 + u2) * inv;
  }
  return out;
}
}  // namespace

ComplexField normal_derivative(const ComplexField& u, const ComplexField& trace) {
  return normal_derivative_impl(u, trace);
}
RealField normal_derivative(const RealField& u, const RealField& trace) {
  return normal_derivative_impl(u, trace);
}

}  // namespace helmstab
