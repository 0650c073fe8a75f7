#pragma once

#include <memory>

#include "helmstab/core.hpp"

namespace helmstab {

// Unnormalised 3D complex transform on an M0 x M1 x M2 row-major array.
// forward: X_k = sum_j x_j exp(-2 pi i k.j / M); backward uses +i.
// Plans are made once per instance (planning is serialised internally);
// execution on an instance is not reentrant, so each worker owns its own.
class Fft3 {
 public:
  explicit Fft3(const Idx3& M);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  void forward(Complex* data);
  void backward(Complex* data);
  std::size_t size() const { return n_; }
  const Idx3& shape() const { return M_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Idx3 M_;
  std::size_t n_;
};

}  // namespace helmstab
