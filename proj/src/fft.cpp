#include "helmstab/fft.hpp"

#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace helmstab {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft3::Impl {
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft3::Fft3(const Idx3& M) : impl_(std::make_unique<Impl>()), M_(M) {
  n_ = static_cast<std::size_t>(M[0]) * M[1] * M[2];
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->buf = fftw_alloc_complex(n_);
  // ESTIMATE keeps plans reproducible between runs
  impl_->fwd = fftw_plan_dft_3d(M[0], M[1], M[2], impl_->buf, impl_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_3d(M[0], M[1], M[2], impl_->buf, impl_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->bwd) throw Error("FFTW planning failed");
}

Fft3::~Fft3() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
  if (impl_->buf) fftw_free(impl_->buf);
}

void Fft3::forward(Complex* data) {
  std::memcpy(impl_->buf, data, n_ * sizeof(Complex));
  fftw_execute(impl_->fwd);
  std::memcpy(static_cast<void*>(data), impl_->buf, n_ * sizeof(Complex));
}

void Fft3::backward(Complex* data) {
  std::memcpy(impl_->buf, data, n_ * sizeof(Complex));
  fftw_execute(impl_->bwd);
  std::memcpy(static_cast<void*>(data), impl_->buf, n_ * sizeof(Complex));
}

}  // namespace helmstab
