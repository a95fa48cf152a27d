#pragma once

#include <complex>
#include <span>

namespace kdvbbm::detail {

// Unnormalized real FFT of a fixed length backed by FFTW.
//
// Plans are created once per length under a global lock and shared; execution
// goes through per-thread aligned scratch buffers, so concurrent use of one
// RealFft from several threads is fine.
class RealFft {
 public:
  static const RealFft& get(int n);

  int size() const { return n_; }

  // out[m] = sum_j in[j] exp(-2 pi i j m / n), m = 0..n/2.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // out[j] = sum_m in[m] exp(2 pi i j m / n) over the full Hermitian spectrum.
  void backward(std::span<const std::complex<double>> in, std::span<double> out) const;

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft();

 private:
  explicit RealFft(int n);

  int n_;
  void* forward_plan_;
  void* backward_plan_;
};

}  // namespace kdvbbm::detail
