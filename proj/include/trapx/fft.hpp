#pragma once
#include <complex>

struct fftw_plan_s;

namespace trapx {

// Thin in-place FFT pair on an internal aligned buffer.  Plans use
// FFTW_ESTIMATE only and planning is serialized, so results are
// deterministic across runs and threads.
class Fft1D {
 public:
  explicit Fft1D(int n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;

  void forward(std::complex<double>* data);   // unnormalized
  void backward(std::complex<double>* data);  // unnormalized (scale 1/n yourself)
  int size() const { return n_; }

 private:
  int n_;
  fftw_plan_s* fwd_;
  fftw_plan_s* bwd_;
  void* buf_;
};

}  // namespace trapx
