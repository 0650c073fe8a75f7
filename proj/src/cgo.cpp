#include "helmstab/cgo.hpp"

#include <cmath>
#include <limits>

namespace helmstab {

namespace {

Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double cabs3(const CVec3& a) { return std::sqrt(std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2])); }

}  // namespace

FrequencyPair make_frequency_pair(const Vec3& eta, double tau, double lambda, const Idx3& hint) {
  if (!(tau >= 1.0)) throw DomainError("frequency pair needs tau >= 1");
  if (!(lambda >= 1.0)) throw DomainError("frequency pair needs lambda >= 1");
  const double ne = norm(eta);
  std::vector<Vec3> span;
  if (ne > 0.0) span.push_back(scale(eta, 1.0 / ne));
  auto next_axis = [&]() {
    Vec3 best{0, 0, 0};
    double bn = -1.0;
    for (int a : hint) {
      Vec3 r{0, 0, 0};
      r[a] = 1.0;
      for (const auto& e : span) r = sub(r, scale(e, dot(r, e)));
      const double rn = norm(r);
      if (rn > bn + 1e-12) {
        bn = rn;
        best = r;
      }
    }
    if (bn < 1e-8) throw DomainError("no direction orthogonal to eta among the hint axes");
    return scale(best, 1.0 / bn);
  };
  const Vec3 e1 = next_axis();
  span.push_back(e1);
  const Vec3 e2 = next_axis();

  FrequencyPair p;
  p.eta = eta;
  p.tau = tau;
  p.lambda = lambda;
  p.eta1 = scale(e1, std::sqrt(tau * tau + lambda));
  p.eta2 = scale(e2, std::sqrt(ne * ne / 4.0 + tau * tau));
  for (int d = 0; d < 3; ++d) {
    p.xi1[d] = Complex(eta[d] / 2.0 + p.eta1[d], p.eta2[d]);
    p.xi2[d] = Complex(eta[d] / 2.0 - p.eta1[d], -p.eta2[d]);
  }
  return p;
}

double frequency_pair_defect(const FrequencyPair& p) {
  const double s1 = std::max(1.0, p.tau * p.tau + p.lambda + dot(p.eta, p.eta));
  double d = 0.0;
  d = std::max(d, std::abs(dot(p.eta1, p.eta2)) / s1);
  d = std::max(d, std::abs(dot(p.eta1, p.eta)) / s1);
  d = std::max(d, std::abs(dot(p.eta2, p.eta)) / s1);
  d = std::max(d, std::abs(dot(p.eta1, p.eta1) - p.tau * p.tau - p.lambda) / s1);
  d = std::max(d, std::abs(dot(p.eta2, p.eta2) - dot(p.eta, p.eta) / 4.0 - p.tau * p.tau) / s1);
  d = std::max(d, std::abs(bdot(p.xi1, p.xi1) - p.lambda) / s1);
  d = std::max(d, std::abs(bdot(p.xi2, p.xi2) - p.lambda) / s1);
  for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(p.xi1[k] + p.xi2[k] - p.eta[k]) / std::sqrt(s1));
  return d;
}

Complex grid_dispersion(const CVec3& xi, double h) {
  Complex s = 0.0;
  for (int d = 0; d < 3; ++d) {
    const Complex v = std::sin(h * xi[d] / 2.0);
    s += 4.0 / (h * h) * v * v;
  }
  return s;
}

AdaptedPair adapt_to_grid(const FrequencyPair& p, double h, int max_iter) {
  Eigen::Vector3cd zeta, zeta0;
  for (int d = 0; d < 3; ++d) zeta0[d] = Complex(p.eta1[d], p.eta2[d]);
  zeta = zeta0;
  auto xi_of = [&](int sgn) {
    CVec3 x;
    for (int d = 0; d < 3; ++d) x[d] = p.eta[d] / 2.0 + static_cast<double>(sgn) * zeta[d];
    return x;
  };
  const double scale_ = std::max({1.0, p.lambda, std::norm(cabs3(xi_of(1)))});
  AdaptedPair out;
  for (int it = 0; it <= max_iter; ++it) {
    const CVec3 a = xi_of(1), b = xi_of(-1);
    Eigen::Vector2cd F(grid_dispersion(a, h) - p.lambda, grid_dispersion(b, h) - p.lambda);
    out.defect = F.cwiseAbs().maxCoeff();
    out.iterations = it;
    if (out.defect <= 1e-13 * scale_) break;
    if (it == max_iter || !std::isfinite(out.defect))
      throw ConvergenceError("grid dispersion adaptation failed; h |xi| is too large for this grid");
    Eigen::Matrix<Complex, 2, 3> J;
    for (int d = 0; d < 3; ++d) {
      J(0, d) = 2.0 / h * std::sin(h * a[d]);
      J(1, d) = -2.0 / h * std::sin(h * b[d]);
    }
    const Eigen::Matrix2cd JJ = J * J.adjoint();
    zeta -= J.adjoint() * JJ.fullPivLu().solve(F);
  }
  out.xi1 = xi_of(1);
  out.xi2 = xi_of(-1);
  out.shift = (zeta - zeta0).norm();
  return out;
}

SymbolKind parse_symbol(const std::string& s) {
  if (s == "grid") return SymbolKind::grid;
  if (s == "continuum") return SymbolKind::continuum;
  throw ConfigError("unknown symbol kind '" + s + "'");
}

std::string symbol_name(SymbolKind k) { return k == SymbolKind::grid ? "grid" : "continuum"; }

FaddeevMultiplier::FaddeevMultiplier(const TorusGrid& t, const CVec3& xi, double lambda, SymbolKind kind,
                                     double guard, int forced_shift)
    : t_(t), xi_(xi), lambda_(lambda), kind_(kind) {
  if (t.size() == 0) throw ShapeError("empty torus");
  const double h = t.h;
  // per-axis symbol pieces for both shift options; P = sum_d piece_d - lambda
  // (continuum: piece_d = k_d^2 - 2 xi_d k_d)
  std::array<std::array<std::vector<Complex>, 2>, 3> piece;
  for (int d = 0; d < 3; ++d)
    for (int s = 0; s < 2; ++s) {
      piece[d][s].resize(static_cast<std::size_t>(t.M[d]));
      for (int j = 0; j < t.M[d]; ++j) {
        const double k = t.dual_step(d) * (t.signed_bin(d, j) + 0.5 * s);
        Complex v;
        if (kind == SymbolKind::grid) {
          const Complex sn = std::sin(h * (k - xi[d]) / 2.0);
          v = 4.0 / (h * h) * sn * sn;
        } else {
          v = k * k - 2.0 * xi[d] * k;
        }
        piece[d][s][static_cast<std::size_t>(j)] = v;
      }
    }
  const double off = kind == SymbolKind::grid ? lambda : 0.0;
  auto min_for = [&](int code) {
    double mn = std::numeric_limits<double>::infinity();
    const auto& p0 = piece[0][code & 1];
    const auto& p1 = piece[1][(code >> 1) & 1];
    const auto& p2 = piece[2][(code >> 2) & 1];
    for (const Complex& a : p0)
      for (const Complex& b : p1)
        for (const Complex& c : p2) mn = std::min(mn, std::abs(a + b + c - off));
    return mn;
  };
  if (forced_shift >= 1 && forced_shift <= 7) {
    code_ = forced_shift;
    min_abs_ = min_for(code_);
  } else {
    min_abs_ = -1.0;
    for (int c = 1; c <= 7; ++c) {
      const double m = min_for(c);
      if (m > min_abs_) {
        min_abs_ = m;
        code_ = c;
      }
    }
  }
  if (!(min_abs_ >= guard * std::max(1.0, lambda)))
    throw LatticeResonanceError("shifted lattice hits the characteristic set of the symbol; try another shift or torus",
                                min_abs_);
  sym_.resize(t.size());
  inv_.resize(t.size());
  const auto& p0 = piece[0][code_ & 1];
  const auto& p1 = piece[1][(code_ >> 1) & 1];
  const auto& p2 = piece[2][(code_ >> 2) & 1];
  std::size_t id = 0;
  for (int a = 0; a < t.M[0]; ++a)
    for (int b = 0; b < t.M[1]; ++b)
      for (int c = 0; c < t.M[2]; ++c, ++id) {
        sym_[id] = p0[static_cast<std::size_t>(a)] + p1[static_cast<std::size_t>(b)] +
                   p2[static_cast<std::size_t>(c)] - off;
        inv_[id] = 1.0 / sym_[id];
        const Vec3 k = frequency({a, b, c});
        h2_gain_ = std::max(h2_gain_, (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * std::abs(inv_[id]));
      }
  for (int d = 0; d < 3; ++d) {
    phase_[d].resize(static_cast<std::size_t>(t.M[d]));
    const double delta = ((code_ >> d) & 1) ? 0.5 * t.dual_step(d) : 0.0;
    for (int j = 0; j < t.M[d]; ++j) phase_[d][static_cast<std::size_t>(j)] = std::polar(1.0, -delta * j * h);
  }
}

Vec3 FaddeevMultiplier::shift() const {
  Vec3 s{0, 0, 0};
  for (int d = 0; d < 3; ++d)
    if ((code_ >> d) & 1) s[d] = 0.5 * t_.dual_step(d);
  return s;
}

Vec3 FaddeevMultiplier::frequency(const Idx3& bin) const {
  const Vec3 sh = shift();
  Vec3 k;
  for (int d = 0; d < 3; ++d) k[d] = t_.dual_step(d) * t_.signed_bin(d, bin[d]) + sh[d];
  return k;
}

Complex FaddeevMultiplier::symbol(const Vec3& k) const {
  Complex s = 0.0;
  if (kind_ == SymbolKind::grid) {
    const double h = t_.h;
    for (int d = 0; d < 3; ++d) {
      const Complex sn = std::sin(h * (k[d] - xi_[d]) / 2.0);
      s += 4.0 / (h * h) * sn * sn;
    }
    return s - lambda_;
  }
  for (int d = 0; d < 3; ++d) s += k[d] * k[d] - 2.0 * xi_[d] * k[d];
  return s;
}

void FaddeevMultiplier::multiply(Complex* data, Fft3& fft, bool inverse) const {
  if (fft.shape() != t_.M) throw ShapeError("transform shape does not match the torus");
  const auto& ph0 = phase_[0];
  const auto& ph1 = phase_[1];
  const auto& ph2 = phase_[2];
  std::size_t id = 0;
  for (int a = 0; a < t_.M[0]; ++a)
    for (int b = 0; b < t_.M[1]; ++b) {
      const Complex pab = ph0[static_cast<std::size_t>(a)] * ph1[static_cast<std::size_t>(b)];
      for (int c = 0; c < t_.M[2]; ++c, ++id) data[id] *= pab * ph2[static_cast<std::size_t>(c)];
    }
  fft.forward(data);
  const auto& m = inverse ? inv_ : sym_;
  const double norm = 1.0 / static_cast<double>(t_.size());
  for (std::size_t i = 0; i < t_.size(); ++i) data[i] *= m[i] * norm;
  fft.backward(data);
  id = 0;
  for (int a = 0; a < t_.M[0]; ++a)
    for (int b = 0; b < t_.M[1]; ++b) {
      const Complex pab = std::conj(ph0[static_cast<std::size_t>(a)] * ph1[static_cast<std::size_t>(b)]);
      for (int c = 0; c < t_.M[2]; ++c, ++id) data[id] *= pab * std::conj(ph2[static_cast<std::size_t>(c)]);
    }
}

void FaddeevMultiplier::apply(Complex* data, Fft3& fft) const { multiply(data, fft, true); }
void FaddeevMultiplier::apply_symbol(Complex* data, Fft3& fft) const { multiply(data, fft, false); }

ComplexField FaddeevMultiplier::apply(const ComplexField& f) const {
  f.check();
  if (f.support != Support::torus || !f.torus || !(*f.torus == t_)) throw SupportError("field is not on this torus");
  Fft3 fft(t_.M);
  ComplexField out = f;
  apply(out.values.data(), fft);
  return out;
}

ComplexField faddeev_apply(const CVec3& xi, double lambda, const ComplexField& f, SymbolKind kind) {
  if (f.support != Support::torus || !f.torus) throw SupportError("faddeev_apply needs a torus field");
  FaddeevMultiplier E(*f.torus, xi, lambda, kind);
  return E.apply(f);
}

// ---- X helpers --------------------------------------------------------------

std::size_t x_node_count(const Geometry& g) {
  const Idx3 lo = g.x_lo_index(), hi = g.x_hi_index();
  return static_cast<std::size_t>(hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) * (hi[2] - lo[2] + 1);
}

std::vector<Idx3> x_nodes(const Geometry& g) {
  const Idx3 lo = g.x_lo_index(), hi = g.x_hi_index();
  std::vector<Idx3> out;
  out.reserve(x_node_count(g));
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) out.push_back({i, j, k});
  return out;
}

double x_volume(const Geometry& g) {
  const double h = g.h();
  return h * h * h * static_cast<double>(x_node_count(g));
}

// ---- CGO solution -----------------------------------------------------------

bool CgoSolution::in_cell(const Idx3& g) const {
  const TorusGrid& t = *w.torus;
  for (int d = 0; d < 3; ++d)
    if (g[d] - t.offset[d] < 0 || g[d] - t.offset[d] >= t.M[d]) return false;
  return true;
}

Complex CgoSolution::w_at(const Idx3& g) const {
  if (!in_cell(g)) throw SupportError("node outside the CGO torus cell");
  const TorusGrid& t = *w.torus;
  return w[t.index(g[0] - t.offset[0], g[1] - t.offset[1], g[2] - t.offset[2])];
}

Complex CgoSolution::u_at(const Idx3& g) const {
  const double h = geometry->h();
  double re = 0.0, im = 0.0;
  for (int d = 0; d < 3; ++d) {
    re += g[d] * h * xi[d].imag();
    im -= g[d] * h * xi[d].real();
  }
  return std::exp(Complex(re, im)) * (1.0 + w_at(g));
}

CVec CgoSolution::u_on_X() const {
  const auto nodes = x_nodes(*geometry);
  CVec out(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) out[static_cast<Eigen::Index>(i)] = u_at(nodes[i]);
  return out;
}

CVec CgoSolution::w_on_X() const {
  const auto nodes = x_nodes(*geometry);
  CVec out(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) out[static_cast<Eigen::Index>(i)] = w_at(nodes[i]);
  return out;
}

bool CgoSolution::box_in_cell() const {
  const int N = geometry->N();
  return in_cell({0, 0, 0}) && in_cell({N, N, N});
}

CVec CgoSolution::interior_values() const {
  if (!box_in_cell()) throw SupportError("the box does not fit inside the CGO torus cell");
  const Geometry& g = *geometry;
  CVec out(static_cast<Eigen::Index>(g.interior_count()));
  for (std::size_t i = 0; i < g.interior_count(); ++i) out[static_cast<Eigen::Index>(i)] = u_at(g.interior_ijk(i));
  return out;
}

CVec CgoSolution::boundary_trace() const {
  if (!box_in_cell()) throw SupportError("the box does not fit inside the CGO torus cell");
  const Geometry& g = *geometry;
  CVec out(static_cast<Eigen::Index>(g.boundary_count()));
  for (std::size_t i = 0; i < g.boundary_count(); ++i)
    out[static_cast<Eigen::Index>(i)] = u_at(g.boundary_node(i).ijk);
  return out;
}

CgoSolution solve_cgo(const Potential& q, const CVec3& xi, double lambda, const CgoOptions& opt) {
  const GeometryPtr gp = q.geometry();
  const Geometry& g = *gp;
  const TorusGrid t = g.cgo_torus();
  const double h = g.h();
  const double sc = std::max({1.0, std::abs(lambda), std::norm(cabs3(xi))});
  if (opt.symbol == SymbolKind::grid) {
    if (std::abs(grid_dispersion(xi, h) - lambda) > 1e-9 * sc)
      throw DomainError("xi is off the discrete dispersion surface; adapt the pair to the grid first");
  } else if (std::abs(bdot(xi, xi) - lambda) > 1e-9 * sc) {
    throw DomainError("xi.xi differs from lambda");
  }

  // q cut off to X, placed on the torus
  std::vector<double> qt(t.size(), 0.0);
  const Idx3 lo = g.x_lo_index(), hi = g.x_hi_index();
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        const Idx3 p{i, j, k};
        if (!g.is_interior(p)) continue;
        qt[t.index(i - t.offset[0], j - t.offset[1], k - t.offset[2])] =
            q.values()[static_cast<Eigen::Index>(g.interior_index(i, j, k))];
      }

  const FaddeevMultiplier E(t, xi, lambda, opt.symbol, opt.guard);
  Fft3 fft(t.M);
  CgoSolution s;
  s.geometry = gp;
  s.xi = xi;
  s.lambda = lambda;
  s.symbol = opt.symbol;
  s.shift_code = E.shift_code();
  s.min_symbol = E.min_symbol();
  s.h2_gain = E.h2_norm();
  s.im_xi = norm(imag_part(xi));
  s.w = ComplexField(gp, t);

  const double vol = h * h * h;
  CVec next(static_cast<Eigen::Index>(t.size()));
  double prev_update = -1.0;
  int growth = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (std::size_t i = 0; i < t.size(); ++i) next[static_cast<Eigen::Index>(i)] = -qt[i] * (1.0 + s.w[i]);
    E.apply(next.data(), fft);
    const double upd = std::sqrt(vol) * (next - s.w.values).norm();
    const double wn = std::sqrt(vol) * next.norm();
    s.w.values.swap(next);
    s.iterations = it;
    s.final_update = wn > 0.0 ? upd / wn : 0.0;
    if (!std::isfinite(upd)) throw ContractionError("CGO fixed point blew up", s.im_xi, s.lipschitz);
    if (prev_update > 0.0) {
      s.lipschitz = std::max(s.lipschitz, upd / prev_update);
      growth = upd > prev_update ? growth + 1 : 0;
      if (growth >= opt.growth_limit)
        throw ContractionError("CGO fixed point update grew for " + std::to_string(growth) +
                                   " consecutive iterations (|Im xi| = " + std::to_string(s.im_xi) +
                                   ", Lipschitz ~ " + std::to_string(s.lipschitz) + ")",
                               s.im_xi, s.lipschitz);
    }
    prev_update = upd;
    if (s.final_update <= opt.tol) break;
  }

  // diagnostics on X
  const auto nodes = x_nodes(g);
  double wn2 = 0.0, un2 = 0.0, rn2 = 0.0;
  const double w2 = 1.0 / (h * h);
  for (const Idx3& p : nodes) {
    const Complex u = s.u_at(p);
    wn2 += std::norm(s.w_at(p));
    un2 += std::norm(u);
    const double qv = qt[t.index(p[0] - t.offset[0], p[1] - t.offset[1], p[2] - t.offset[2])];
    Complex r = (6.0 * w2 + qv - lambda) * u;
    for (int d = 0; d < 3; ++d)
      for (int sg = -1; sg <= 1; sg += 2) {
        Idx3 nb = p;
        nb[d] += sg;
        r -= w2 * s.u_at(nb);
      }
    rn2 += std::norm(r);
  }
  s.w_norm_X = std::sqrt(vol * wn2);
  s.u_norm_X = std::sqrt(vol * un2);
  s.residual = un2 > 0.0 ? std::sqrt(rn2 / un2) : 0.0;
  return s;
}

std::pair<CgoSolution, CgoSolution> solve_cgo_pair(const Potential& q1, const Potential& q2, const FrequencyPair& p,
                                                   const CgoOptions& opt) {
  CVec3 a = p.xi1, b = p.xi2;
  if (opt.symbol == SymbolKind::grid) {
    const AdaptedPair ad = adapt_to_grid(p, q1.geometry()->h());
    a = ad.xi1;
    b = ad.xi2;
  }
  return {solve_cgo(q1, a, p.lambda, opt), solve_cgo(q2, b, p.lambda, opt)};
}

ProductRemainder cgo_product_remainder(const CgoSolution& s1, const CgoSolution& s2) {
  if (s1.geometry != s2.geometry) throw ShapeError("CGO solutions on different geometries");
  ProductRemainder out;
  double imag_gap = 0.0;
  for (int d = 0; d < 3; ++d) {
    const Complex sum = s1.xi[d] + s2.xi[d];
    out.eta[d] = sum.real();
    imag_gap = std::max(imag_gap, std::abs(sum.imag()));
  }
  if (imag_gap > 1e-9 * std::max(1.0, s1.im_xi)) throw ShapeError("CGO solutions do not come from one frequency pair");
  const Geometry& g = *s1.geometry;
  const double h = g.h();
  const auto nodes = x_nodes(g);
  out.rho.resize(static_cast<Eigen::Index>(nodes.size()));
  out.identity_defect = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Idx3& p = nodes[i];
    const double ex = (p[0] * out.eta[0] + p[1] * out.eta[1] + p[2] * out.eta[2]) * h;
    const Complex e = std::polar(1.0, -ex);
    const Complex w1 = s1.w_at(p), w2 = s2.w_at(p);
    const Complex rho = e * (w1 + w2 + w1 * w2);
    out.rho[static_cast<Eigen::Index>(i)] = rho;
    const Complex prod = s1.u_at(p) * s2.u_at(p);
    out.identity_defect = std::max(out.identity_defect, std::abs(prod - e - rho) / std::max(1.0, std::abs(prod)));
  }
  double l1 = 0.0;
  for (std::size_t id : g.omega0_nodes()) {
    const Idx3 p = g.interior_ijk(id);
    const double ex = (p[0] * out.eta[0] + p[1] * out.eta[1] + p[2] * out.eta[2]) * h;
    const Complex w1 = s1.w_at(p), w2 = s2.w_at(p);
    l1 += std::abs(std::polar(1.0, -ex) * (w1 + w2 + w1 * w2));
  }
  out.l1_omega0 = h * h * h * l1;
  return out;
}

VarpiEstimate estimate_varpi(const Potential& q, const Vec3& eta, double lambda, double lo, double hi,
                             const CgoOptions& opt, int steps) {
  VarpiEstimate est;
  auto converges = [&](double tau, double* im) {
    ++est.solves;
    try {
      const FrequencyPair p = make_frequency_pair(eta, tau, lambda);
      CVec3 xi = p.xi1;
      if (opt.symbol == SymbolKind::grid) xi = adapt_to_grid(p, q.geometry()->h()).xi1;
      const CgoSolution s = solve_cgo(q, xi, lambda, opt);
      *im = s.im_xi;
      return s.final_update <= opt.tol;
    } catch (const ContractionError&) {
      return false;
    } catch (const LatticeResonanceError&) {
      return false;
    }
  };
  double im = 0.0;
  if (converges(lo, &im)) {
    est.tau = lo;
    est.im_xi = im;
    est.bracketed = true;
    return est;
  }
  if (!converges(hi, &im)) {
    est.tau = hi;
    return est;
  }
  est.bracketed = true;
  double a = std::log(lo), b = std::log(hi), best_im = im;
  for (int i = 0; i < steps; ++i) {
    const double m = 0.5 * (a + b);
    double mi = 0.0;
    if (converges(std::exp(m), &mi)) {
      b = m;
      best_im = mi;
    } else {
      a = m;
    }
  }
  est.tau = std::exp(b);
  est.im_xi = best_im;
  return est;
}

double fit_varkappa(const std::vector<double>& im_xi, const std::vector<double>& u_norms) {
  if (im_xi.size() != u_norms.size() || im_xi.size() < 2) throw ShapeError("fit needs at least two points");
  const double n = static_cast<double>(im_xi.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < im_xi.size(); ++i) {
    if (!(u_norms[i] > 0.0)) throw DomainError("norms must be positive for a log fit");
    const double x = im_xi[i], y = std::log(u_norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

}  // namespace helmstab
