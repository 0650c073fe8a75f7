#pragma once

#include <functional>
#include <optional>
#include <string>

#include "helmstab/geometry.hpp"

namespace helmstab {

enum class Support { interior, boundary, torus };
std::string support_name(Support s);

template <class T>
struct GridField {
  using Scalar = T;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  GeometryPtr geometry;
  Support support = Support::interior;
  std::optional<TorusGrid> torus;  // set iff support == torus
  Vector values;

  GridField() = default;
  GridField(GeometryPtr g, Support s) : geometry(std::move(g)), support(s) {
    if (s == Support::torus) throw ShapeError("torus fields need a TorusGrid");
    values = Vector::Zero(static_cast<Eigen::Index>(expected_size()));
  }
  GridField(GeometryPtr g, TorusGrid t)
      : geometry(std::move(g)), support(Support::torus), torus(t) {
    values = Vector::Zero(static_cast<Eigen::Index>(t.size()));
  }
  GridField(GeometryPtr g, Support s, Vector v) : geometry(std::move(g)), support(s), values(std::move(v)) {
    check();
  }

  std::size_t expected_size() const {
    switch (support) {
      case Support::interior: return geometry->interior_count();
      case Support::boundary: return geometry->boundary_count();
      case Support::torus: return torus ? torus->size() : 0;
    }
    return 0;
  }
  void check() const {
    if (!geometry) throw ShapeError("field without geometry");
    if (static_cast<std::size_t>(values.size()) != expected_size())
      throw ShapeError("field length " + std::to_string(values.size()) +
                       " does not match support size " + std::to_string(expected_size()));
  }
  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  T& operator[](std::size_t i) { return values[static_cast<Eigen::Index>(i)]; }
  const T& operator[](std::size_t i) const { return values[static_cast<Eigen::Index>(i)]; }
};

using RealField = GridField<double>;
using ComplexField = GridField<Complex>;

ComplexField to_complex(const RealField& f);
RealField real_part(const ComplexField& f);

RealField interior_from_function(GeometryPtr g, const std::function<double(const Vec3&)>& fn);
ComplexField interior_from_function_c(GeometryPtr g, const std::function<Complex(const Vec3&)>& fn);
RealField boundary_from_function(GeometryPtr g, const std::function<double(const Vec3&)>& fn);
ComplexField boundary_from_function_c(GeometryPtr g, const std::function<Complex(const Vec3&)>& fn);

enum class BumpShape { cap, smooth, cinf };
BumpShape parse_bump_shape(const std::string& s);
std::string bump_shape_name(BumpShape s);

// Tensor-product bump amplitude * prod_d p((x_d - c_d)/w_d), p vanishing at |t|>=1.
// cap: 1-t^2, smooth: (1-t^2)^2, cinf: exp(1 - 1/(1-t^2)).
struct BumpSpec {
  double amplitude = 0.5;
  Vec3 center{0.5, 0.5, 0.5};
  Vec3 half_width{0.25, 0.25, 0.25};
  BumpShape shape = BumpShape::smooth;
};
double bump_value(const BumpSpec& b, const Vec3& x);
RealField bump_field(GeometryPtr g, const BumpSpec& b);

class Potential {
 public:
  Potential() = default;
  // kappa < 0 means "use max|q|"
  Potential(RealField q, double kappa = -1.0, std::string label = "");

  const RealField& field() const { return q_; }
  const RVec& values() const { return q_.values; }
  double kappa() const { return kappa_; }
  const std::string& id() const { return id_; }
  GeometryPtr geometry() const { return q_.geometry; }
  double sup_norm() const;

 private:
  RealField q_;
  double kappa_ = 0.0;
  std::string id_;
};

Potential constant_potential(GeometryPtr g, double value);
// q1 - q2 must vanish on every Omega1 node
bool admissible_pair(const Potential& q1, const Potential& q2);
RealField difference(const Potential& q1, const Potential& q2);

}  // namespace helmstab
