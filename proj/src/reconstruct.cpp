#include "helmstab/reconstruct.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace helmstab {

// ---- schedules and the modulus ---------------------------------------------

ScheduleParams schedule(double tau, ScheduleParams spec) {
  if (!(tau >= 1.0)) throw DomainError("schedule needs tau >= 1");
  if (spec.n < 1) throw DomainError("dimension must be positive");
  const double n2 = spec.n + 2.0;
  spec.tau = tau;
  spec.s = std::pow(tau, 2.0 / n2);
  spec.log_epsilon = -16.0 / n2 * std::log(tau) - 4.0 * spec.varkappa * tau;
  if (!(spec.log_epsilon < 0.0))
    throw ScheduleRangeError("eps = tau^{-16/(n+2)} exp(-4 varkappa tau) is not below 1 at tau = " +
                             std::to_string(tau));
  spec.epsilon = std::exp(spec.log_epsilon);
  return spec;
}

double ModulusSpec::log_branch() const { return std::exp(std::exp(c)); }

double triple_log_from_log(double log_r) {
  if (!(log_r > std::exp(1.0))) throw DomainError("logloglog r needs log r > e");
  return std::log(std::log(log_r));
}

double phi_c_log(double log_r, const ModulusSpec& spec) {
  if (!(spec.c > 0.0)) throw DomainError("modulus needs c > 0");
  if (std::isnan(log_r)) throw DomainError("phi_c of NaN");
  if (log_r == std::numeric_limits<double>::infinity()) return 0.0;
  if (log_r <= spec.log_branch()) return std::exp(-log_r);
  return std::pow(triple_log_from_log(log_r), -2.0 / (spec.n + 2.0));
}

double phi_c(double r, const ModulusSpec& spec) {
  if (!(r > 0.0)) throw DomainError("phi_c needs r > 0");
  return phi_c_log(std::log(r), spec);
}

double select_tau_residual_log(double tau, double log_C, double varkappa, int n) {
  return 2.0 / (n + 2.0) * std::log(tau) + std::exp(std::exp(varkappa * tau)) + log_C;
}

double select_tau_log(double log_C, double varkappa, int n) {
  if (!(varkappa > 0.0)) throw DomainError("select_tau needs varkappa > 0");
  if (std::isnan(log_C) || log_C == std::numeric_limits<double>::infinity())
    throw DomainError("select_tau needs a finite positive C");
  if (select_tau_residual_log(1.0, log_C, varkappa, n) >= 0.0) return 1.0;
  if (log_C == -std::numeric_limits<double>::infinity()) return std::numeric_limits<double>::infinity();
  // e^{e^{varkappa hi}} >= log(1/C) makes the residual nonnegative at hi
  double lo = 1.0;
  double hi = std::max(1.0, std::log(std::log(-log_C)) / varkappa);
  for (int it = 0; it < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (select_tau_residual_log(mid, log_C, varkappa, n) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double rl = std::abs(select_tau_residual_log(lo, log_C, varkappa, n));
  const double rh = std::abs(select_tau_residual_log(hi, log_C, varkappa, n));
  return rl < rh ? lo : hi;
}

double select_tau(double C, double varkappa, int n) {
  if (!(C > 0.0)) throw DomainError("select_tau needs C > 0");
  return select_tau_log(std::log(C), varkappa, n);
}

// ---- pairings ---------------------------------------------------------------

namespace {

void check_support(const RealField& dq) {
  dq.check();
  if (dq.support != Support::interior) throw SupportError("dq must be an interior field");
  for (std::size_t id : dq.geometry->omega1_nodes())
    if (dq[id] != 0.0) throw SupportError("dq does not vanish on Omega1");
}

double sup_abs(const RealField& f) { return f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Complex pairing_interior(const RealField& dq, const ComplexField& u1, const ComplexField& u2) {
  check_support(dq);
  u1.check();
  u2.check();
  if (u1.support != Support::interior || u2.support != Support::interior)
    throw SupportError("pairing expects interior fields");
  const Geometry& g = *dq.geometry;
  Complex acc = 0.0;
  for (std::size_t id : g.omega0_nodes()) acc += dq[id] * u1[id] * u2[id];
  const double h = g.h();
  return acc * (h * h * h);
}

Complex pairing_interior(const RealField& dq, const CgoSolution& s1, const CgoSolution& s2) {
  check_support(dq);
  const Geometry& g = *dq.geometry;
  if (s1.geometry.get() != &g || s2.geometry.get() != &g) throw ShapeError("CGO solutions on another geometry");
  const double h = g.h();
  Vec3 eta;
  for (int d = 0; d < 3; ++d) eta[d] = (s1.xi[d] + s2.xi[d]).real();
  Complex acc = 0.0;
  for (std::size_t id : g.omega0_nodes()) {
    if (dq[id] == 0.0) continue;
    const Idx3 p = g.interior_ijk(id);
    const double ex = (p[0] * eta[0] + p[1] * eta[1] + p[2] * eta[2]) * h;
    acc += dq[id] * std::polar(1.0, -ex) * (1.0 + s1.w_at(p)) * (1.0 + s2.w_at(p));
  }
  return acc * (h * h * h);
}

Complex pairing_boundary(const BoundaryMap& diff, const TraceBasis& basis, const CVec& c1, const CVec& c2) {
  if (!diff.basis || diff.basis->hash != basis.hash) throw ShapeError("traces are not in the map's input basis");
  if (c1.size() != diff.cols() || c2.size() != diff.cols()) throw ShapeError("coefficient length mismatch");
  const Geometry& g = *basis.geometry;
  const CVec out = diff.matrix * c1;
  const CVec tr2 = basis.synthesize(c2);
  if (diff.output_nodes.size() != static_cast<std::size_t>(out.size())) throw ShapeError("map output nodes missing");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < diff.output_nodes.size(); ++i)
    acc += out[static_cast<Eigen::Index>(i)] * tr2[static_cast<Eigen::Index>(diff.output_nodes[i])];
  acc *= g.h() * g.h();
  return diff.kind == MapKind::rtd ? -acc : acc;
}

Complex pairing_boundary(const BoundaryOperator& diff, const Geometry& g, const CVec& tr1, const CVec& tr2,
                         const std::vector<char>* sigma) {
  const auto nb = static_cast<Eigen::Index>(g.boundary_count());
  if (tr1.size() != nb || tr2.size() != nb) throw ShapeError("traces must cover the whole boundary");
  const CVec out = diff.apply(tr1);
  Complex acc = 0.0;
  for (Eigen::Index i = 0; i < nb; ++i)
    if (!sigma || (*sigma)[static_cast<std::size_t>(i)]) acc += out[i] * tr2[i];
  acc *= g.h() * g.h();
  return diff.kind() == MapKind::rtd ? -acc : acc;
}

// ---- Fourier estimates ------------------------------------------------------

QhatMode parse_qhat_mode(const std::string& s) {
  if (s == "oracle") return QhatMode::oracle;
  if (s == "data") return QhatMode::data;
  if (s == "runge") return QhatMode::runge;
  throw ConfigError("unknown q-hat mode '" + s + "'");
}

std::string qhat_mode_name(QhatMode m) {
  switch (m) {
    case QhatMode::oracle: return "oracle";
    case QhatMode::data: return "data";
    case QhatMode::runge: return "runge";
  }
  return "?";
}

namespace {

// the box nodes outside X see no potential in the CGO construction
void check_supported_in_x(const Potential& q) {
  const Geometry& g = *q.geometry();
  const Idx3 lo = g.x_lo_index(), hi = g.x_hi_index();
  for (std::size_t id = 0; id < g.interior_count(); ++id) {
    const Idx3 p = g.interior_ijk(id);
    bool in = true;
    for (int d = 0; d < 3; ++d) in = in && p[d] >= lo[d] && p[d] <= hi[d];
    if (!in && q.values()[static_cast<Eigen::Index>(id)] != 0.0)
      throw SupportError("direct CGO traces need the potential to vanish outside X; use the runge route");
  }
}

CVec omega0_values(const CgoSolution& s) {
  const Geometry& g = *s.geometry;
  const auto& o0 = g.omega0_nodes();
  CVec out(static_cast<Eigen::Index>(o0.size()));
  for (std::size_t i = 0; i < o0.size(); ++i) out[static_cast<Eigen::Index>(i)] = s.u_at(g.interior_ijk(o0[i]));
  return out;
}

std::pair<CVec, CVec> data_pair(const CgoSolution& s1, const CgoSolution& s2, const QhatSetup& in) {
  check_supported_in_x(*in.q1);
  check_supported_in_x(*in.q2);
  CVec t1 = s1.boundary_trace(), t2 = s2.boundary_trace();
  if (in.diff && in.diff->kind() == MapKind::rtd) {
    if (!in.robin) throw ShapeError("impedance data mode needs a Robin solver for the CGO data");
    t1 = in.robin->robin_datum(s1.interior_values(), t1);
    t2 = in.robin->robin_datum(s2.interior_values(), t2);
  }
  return {t1, t2};
}

}  // namespace

std::pair<CVec, CVec> cgo_boundary_data(const Vec3& eta, double tau, double lambda, const QhatSetup& in) {
  if (!in.q1 || !in.q2) throw ShapeError("CGO data needs both potentials");
  const auto [s1, s2] = solve_cgo_pair(*in.q1, *in.q2, make_frequency_pair(eta, tau, lambda), in.cgo);
  return data_pair(s1, s2, in);
}

QhatEstimate qhat_estimate(const Vec3& eta, double tau, double lambda, const QhatSetup& in) {
  if (!in.q1 || !in.q2) throw ShapeError("q-hat estimation needs both potentials");
  const GeometryPtr gp = in.q1->geometry();
  const Geometry& g = *gp;
  const RealField dq = difference(*in.q1, *in.q2);
  check_support(dq);

  QhatEstimate e;
  e.eta = eta;
  e.tau = tau;
  e.lambda = lambda;
  e.mode = in.mode;
  const FrequencyPair p = make_frequency_pair(eta, tau, lambda);
  const auto [s1, s2] = solve_cgo_pair(*in.q1, *in.q2, p, in.cgo);
  e.iterations = std::max(s1.iterations, s2.iterations);
  e.cgo_residual = std::max(s1.residual, s2.residual);
  e.w_times_im_xi = std::max(s1.w_times_im_xi(), s2.w_times_im_xi());
  e.im_xi = s1.im_xi;

  const double h = g.h(), h3 = h * h * h;
  Complex ex = 0.0, rem = 0.0;
  double l1 = 0.0;
  for (std::size_t id : g.omega0_nodes()) {
    const Idx3 q = g.interior_ijk(id);
    const Complex ph = std::polar(1.0, -(q[0] * eta[0] + q[1] * eta[1] + q[2] * eta[2]) * h);
    const Complex w1 = s1.w_at(q), w2 = s2.w_at(q);
    const Complex rho = ph * (w1 + w2 + w1 * w2);
    ex += dq[id] * ph;
    rem += dq[id] * rho;
    l1 += std::abs(rho);
  }
  e.exact = ex * h3;
  e.remainder = rem * h3;
  e.remainder_bound = sup_abs(dq) * l1 * h3;

  switch (in.mode) {
    case QhatMode::oracle:
      e.value = pairing_interior(dq, s1, s2);
      break;
    case QhatMode::data: {
      if (!in.diff) throw ShapeError("data mode needs a map difference");
      const auto [t1, t2] = data_pair(s1, s2, in);
      e.value = pairing_boundary(*in.diff, g, t1, t2);
      if (in.noise) e.noise_unit = pairing_boundary(*in.noise, g, t1, t2);
      break;
    }
    case QhatMode::runge: {
      if (!in.diff || !in.runge1 || !in.runge2) throw ShapeError("runge mode needs a map difference and operators");
      if (in.diff->kind() != MapKind::dtn) throw DomainError("the runge route is only wired for Dirichlet maps");
      const RungeResult r1 = runge_approximate(*in.runge1, omega0_values(s1), in.runge_threshold);
      const RungeResult r2 = runge_approximate(*in.runge2, omega0_values(s2), in.runge_threshold);
      auto rel = [](const RungeResult& r) { return r.u0_norm > 0 ? r.defect_norm / r.u0_norm : 0.0; };
      e.runge_defect = std::max(rel(r1), rel(r2));
      if (e.runge_defect > in.max_defect)
        throw ConvergenceError("Runge defect " + std::to_string(e.runge_defect) + " above the threshold " +
                               std::to_string(in.max_defect));
      const auto& sig = g.sigma_mask();
      e.value = pairing_boundary(*in.diff, g, r1.phi, r2.phi, &sig);
      if (in.noise) e.noise_unit = pairing_boundary(*in.noise, g, r1.phi, r2.phi, &sig);
      break;
    }
  }
  return e;
}

// ---- low-pass inversion -----------------------------------------------------

namespace {

double weight_m1(const TorusGrid& t, const Idx3& bin) {
  double k2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double k = t.signed_bin(d, bin[d]) * t.dual_step(d);
    k2 += k * k;
  }
  return 1.0 / (1.0 + k2);
}

double bin_radius(const TorusGrid& t, const Idx3& bin) {
  double k2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double k = t.signed_bin(d, bin[d]) * t.dual_step(d);
    k2 += k * k;
  }
  return std::sqrt(k2);
}

bool inside(double r, double s) { return r <= s * (1.0 + 1e-12); }

// spectrum with the given samples and their conjugates; flags mark set bins
CVec assemble_spectrum(const TorusGrid& t, const std::vector<LatticePoint>& points,
                       const std::vector<Complex>& samples, double s, std::vector<char>& set) {
  if (points.size() != samples.size()) throw ShapeError("one sample per lattice point");
  CVec spec = CVec::Zero(static_cast<Eigen::Index>(t.size()));
  set.assign(t.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!inside(norm(points[i].eta), s)) continue;
    spec[static_cast<Eigen::Index>(points[i].bin)] = samples[i];
    set[points[i].bin] = 1;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!inside(norm(points[i].eta), s)) continue;
    const std::size_t c = conjugate_bin(t, points[i]);
    if (set[c]) continue;
    spec[static_cast<Eigen::Index>(c)] = std::conj(samples[i]);
    set[c] = 2;
  }
  return spec;
}

}  // namespace

std::vector<LatticePoint> lowpass_lattice(const TorusGrid& t, double s, bool half) {
  std::vector<LatticePoint> out;
  for (std::size_t id = 0; id < t.size(); ++id) {
    const Idx3 b = t.unravel(id);
    if (!inside(bin_radius(t, b), s)) continue;
    LatticePoint p;
    p.bin = id;
    for (int d = 0; d < 3; ++d) {
      p.n[d] = t.signed_bin(d, b[d]);
      p.eta[d] = p.n[d] * t.dual_step(d);
    }
    if (half) {
      int first = 0;
      for (int d = 0; d < 3 && first == 0; ++d) first = p.n[d];
      if (first < 0) continue;
    }
    out.push_back(p);
  }
  return out;
}

std::size_t conjugate_bin(const TorusGrid& t, const LatticePoint& p) {
  Idx3 c;
  for (int d = 0; d < 3; ++d) c[d] = ((-p.n[d]) % t.M[d] + t.M[d]) % t.M[d];
  return t.index(c[0], c[1], c[2]);
}

double omega0_volume(const Geometry& g) {
  const auto& sp = g.spec();
  double v = 1.0;
  for (int d = 0; d < 3; ++d) v *= sp.omega0_hi[d] - sp.omega0_lo[d];
  return v;
}

LowpassResult lowpass_invert(GeometryPtr g, const std::vector<LatticePoint>& points, const std::vector<Complex>& samples,
                             double s, double kappa) {
  const TorusGrid t = g->hminus1_torus();
  std::vector<char> set;
  CVec spec = assemble_spectrum(t, points, samples, s, set);
  LowpassResult r;
  r.s = s;
  for (char c : set) r.modes += c ? 1 : 0;
  Fft3 fft(t.M);
  fft.backward(spec.data());
  spec /= t.volume();
  r.torus_field = ComplexField(g, t);
  r.torus_field.values = spec;
  r.interior = RealField(g, Support::interior);
  for (std::size_t id = 0; id < g->interior_count(); ++id) {
    const Idx3 p = g->interior_ijk(id);
    r.interior[id] = spec[static_cast<Eigen::Index>(t.index(p[0] - t.offset[0], p[1] - t.offset[1], p[2] - t.offset[2]))].real();
  }
  r.tail_bound_sq = std::isinf(s) ? 0.0 : kappa * kappa * omega0_volume(*g) / (s * s);
  r.tail_bound = std::sqrt(r.tail_bound_sq);
  return r;
}

double hminus1_error(const TorusGrid& t, const CVec& exact, const std::vector<LatticePoint>& points,
                     const std::vector<Complex>& samples, double s) {
  if (static_cast<std::size_t>(exact.size()) != t.size()) throw ShapeError("exact coefficients do not match the torus");
  std::vector<char> set;
  const CVec spec = assemble_spectrum(t, points, samples, s, set);
  double acc = 0.0;
  for (std::size_t id = 0; id < t.size(); ++id) {
    const Eigen::Index i = static_cast<Eigen::Index>(id);
    const Complex d = set[id] ? spec[i] - exact[i] : -exact[i];
    acc += weight_m1(t, t.unravel(id)) * std::norm(d);
  }
  return std::sqrt(acc / t.volume());
}

double hminus1_tail_sq(const TorusGrid& t, const CVec& exact, double s) {
  double acc = 0.0;
  for (std::size_t id = 0; id < t.size(); ++id) {
    const Idx3 b = t.unravel(id);
    if (inside(bin_radius(t, b), s)) continue;
    acc += weight_m1(t, b) * std::norm(exact[static_cast<Eigen::Index>(id)]);
  }
  return acc / t.volume();
}

void write_qhat_csv(const std::string& path, const std::vector<QhatEstimate>& est, double level) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path);
  os << "eta1,eta2,eta3,tau,re,im,remainder_re,remainder_im,remainder_bound,exact_re,exact_im\n";
  char buf[512];
  for (const auto& e : est) {
    const Complex v = e.at(level);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.eta[0],
                  e.eta[1], e.eta[2], e.tau, v.real(), v.imag(), e.remainder.real(), e.remainder.imag(),
                  e.remainder_bound, e.exact.real(), e.exact.imag());
    os << buf;
  }
}

}  // namespace helmstab
