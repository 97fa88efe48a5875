#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace g2lab::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(std::vector<int> dims) : dims_(std::move(dims)), size_(1) {
  for (int d : dims_) size_ *= d;
  std::vector<std::complex<double>> scratch(size_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf, buf, FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf, buf, FFTW_BACKWARD, flags);
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft::forward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void Fft::backward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
}

}  // namespace g2lab::detail
