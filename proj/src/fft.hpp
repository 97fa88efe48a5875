#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace g2lab::detail {

// Unnormalized in-place complex DFT of a fixed row-major shape. Plans are
// created once; execution is re-entrant on caller-owned buffers.
class Fft {
 public:
  explicit Fft(std::vector<int> dims);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  void forward(std::complex<double>* data) const;
  void backward(std::complex<double>* data) const;
  int size() const { return size_; }
  const std::vector<int>& dims() const { return dims_; }

 private:
  std::vector<int> dims_;
  int size_;
  void* fwd_;
  void* bwd_;
};

// Signed frequency of FFT index a on a grid of n points.
inline int signed_frequency(int a, int n) { return a < n / 2 ? a : a - n; }

}  // namespace g2lab::detail
