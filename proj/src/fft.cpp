#include "trapx/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace trapx {

namespace {
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

Fft1D::Fft1D(int n) : n_(n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  buf_ = fftw_malloc(sizeof(fftw_complex) * n);
  auto* b = static_cast<fftw_complex*>(buf_);
  fwd_ = reinterpret_cast<fftw_plan_s*>(
      fftw_plan_dft_1d(n, b, b, FFTW_FORWARD, FFTW_ESTIMATE));
  bwd_ = reinterpret_cast<fftw_plan_s*>(
      fftw_plan_dft_1d(n, b, b, FFTW_BACKWARD, FFTW_ESTIMATE));
}

Fft1D::~Fft1D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(reinterpret_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(reinterpret_cast<fftw_plan>(bwd_));
  fftw_free(buf_);
}

void Fft1D::forward(std::complex<double>* data) {
  std::memcpy(buf_, data, sizeof(fftw_complex) * n_);
  fftw_execute(reinterpret_cast<fftw_plan>(fwd_));
  std::memcpy(data, buf_, sizeof(fftw_complex) * n_);
}

void Fft1D::backward(std::complex<double>* data) {
  std::memcpy(buf_, data, sizeof(fftw_complex) * n_);
  fftw_execute(reinterpret_cast<fftw_plan>(bwd_));
  std::memcpy(data, buf_, sizeof(fftw_complex) * n_);
}

}  // namespace trapx
