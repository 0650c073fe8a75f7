#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace helmstab {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<Complex, 3>;
using Idx3 = std::array<int, 3>;

using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Error hierarchy. Every module throws something derived from Error so the
// harness can turn a failure into a record entry instead of aborting a sweep.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class GeometryError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "geometry"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

class SupportError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "support"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

class SpectralProximityError : public Error {
 public:
  SpectralProximityError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }
  const char* kind() const noexcept override { return "spectral_proximity"; }

 private:
  double eigenvalue_;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "singular_system"; }
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "convergence"; }
};

class DivergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "divergence"; }
};

class ContractionError : public Error {
 public:
  ContractionError(const std::string& what, double im_xi, double lipschitz)
      : Error(what), im_xi_(im_xi), lipschitz_(lipschitz) {}
  double im_xi() const { return im_xi_; }
  double lipschitz() const { return lipschitz_; }
  const char* kind() const noexcept override { return "contraction"; }

 private:
  double im_xi_;
  double lipschitz_;
};

class LatticeResonanceError : public Error {
 public:
  LatticeResonanceError(const std::string& what, double min_symbol)
      : Error(what), min_symbol_(min_symbol) {}
  double min_symbol() const { return min_symbol_; }
  const char* kind() const noexcept override { return "lattice_resonance"; }

 private:
  double min_symbol_;
};

class ScheduleRangeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "schedule_range"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

// FNV-1a over raw bytes; used for potential and basis identifiers.
inline std::uint64_t fnv1a(const void* data, std::size_t bytes,
                           std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v);

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// bilinear, no conjugation: xi.xi = lambda is the dispersion relation
inline Complex bdot(const CVec3& a, const CVec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 real_part(const CVec3& a) { return {a[0].real(), a[1].real(), a[2].real()}; }
inline Vec3 imag_part(const CVec3& a) { return {a[0].imag(), a[1].imag(), a[2].imag()}; }

}  // namespace helmstab
