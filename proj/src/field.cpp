#include "helmstab/field.hpp"

#include <cmath>

namespace helmstab {

std::string support_name(Support s) {
  switch (s) {
    case Support::interior: return "interior";
    case Support::boundary: return "boundary";
    case Support::torus: return "torus";
  }
  return "?";
}

ComplexField to_complex(const RealField& f) {
  ComplexField c;
  c.geometry = f.geometry;
  c.support = f.support;
  c.torus = f.torus;
  c.values = f.values.cast<Complex>();
  return c;
}

RealField real_part(const ComplexField& f) {
  RealField r;
  r.geometry = f.geometry;
  r.support = f.support;
  r.torus = f.torus;
  r.values = f.values.real();
  return r;
}

RealField interior_from_function(GeometryPtr g, const std::function<double(const Vec3&)>& fn) {
  RealField f(g, Support::interior);
  for (std::size_t i = 0; i < g->interior_count(); ++i) f[i] = fn(g->coord(g->interior_ijk(i)));
  return f;
}

ComplexField interior_from_function_c(GeometryPtr g, const std::function<Complex(const Vec3&)>& fn) {
  ComplexField f(g, Support::interior);
  for (std::size_t i = 0; i < g->interior_count(); ++i) f[i] = fn(g->coord(g->interior_ijk(i)));
  return f;
}

RealField boundary_from_function(GeometryPtr g, const std::function<double(const Vec3&)>& fn) {
  RealField f(g, Support::boundary);
  for (std::size_t i = 0; i < g->boundary_count(); ++i) f[i] = fn(g->coord(g->boundary_node(i).ijk));
  return f;
}

ComplexField boundary_from_function_c(GeometryPtr g, const std::function<Complex(const Vec3&)>& fn) {
  ComplexField f(g, Support::boundary);
  for (std::size_t i = 0; i < g->boundary_count(); ++i) f[i] = fn(g->coord(g->boundary_node(i).ijk));
  return f;
}

BumpShape parse_bump_shape(const std::string& s) {
  if (s == "cap") return BumpShape::cap;
  if (s == "smooth") return BumpShape::smooth;
  if (s == "cinf") return BumpShape::cinf;
  throw ConfigError("unknown bump shape '" + s + "'");
}

std::string bump_shape_name(BumpShape s) {
  switch (s) {
    case BumpShape::cap: return "cap";
    case BumpShape::smooth: return "smooth";
    case BumpShape::cinf: return "cinf";
  }
  return "?";
}

double bump_value(const BumpSpec& b, const Vec3& x) {
  double v = b.amplitude;
  for (int d = 0; d < 3; ++d) {
    const double t = (x[d] - b.center[d]) / b.half_width[d];
    const double r = 1.0 - t * t;
    if (r <= 0.0) return 0.0;
    switch (b.shape) {
      case BumpShape::cap: v *= r; break;
      case BumpShape::smooth: v *= r * r; break;
      case BumpShape::cinf: v *= std::exp(1.0 - 1.0 / r); break;
    }
  }
  return v;
}

RealField bump_field(GeometryPtr g, const BumpSpec& b) {
  return interior_from_function(g, [&](const Vec3& x) { return bump_value(b, x); });
}

Potential::Potential(RealField q, double kappa, std::string label) : q_(std::move(q)) {
  q_.check();
  if (q_.support != Support::interior) throw SupportError("potentials live on interior nodes");
  const double sup = sup_norm();
  kappa_ = kappa < 0.0 ? sup : kappa;
  if (sup > kappa_ * (1.0 + 1e-14) + 1e-300)
    throw DomainError("potential exceeds its sup-norm budget kappa");
  const auto hash = fnv1a(q_.values.data(), sizeof(double) * q_.size());
  id_ = label.empty() ? "q-" + hex64(hash).substr(0, 12) : label;
}

double Potential::sup_norm() const {
  return q_.size() ? q_.values.cwiseAbs().maxCoeff() : 0.0;
}

Potential constant_potential(GeometryPtr g, double value) {
  RealField f(g, Support::interior);
  f.values.setConstant(value);
  return Potential(std::move(f));
}

bool admissible_pair(const Potential& q1, const Potential& q2) {
  const auto& g = *q1.geometry();
  if (q1.geometry().get() != q2.geometry().get() && q1.field().size() != q2.field().size())
    return false;
  for (std::size_t id : g.omega1_nodes())
    if (q1.values()[id] != q2.values()[id]) return false;
  return true;
}

RealField difference(const Potential& q1, const Potential& q2) {
  if (q1.field().size() != q2.field().size()) throw ShapeError("potential size mismatch");
  RealField d(q1.geometry(), Support::interior);
  d.values = q1.values() - q2.values();
  return d;
}

}  // namespace helmstab
