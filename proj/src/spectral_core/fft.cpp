#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace kdvbbm::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

// Aligned scratch for one transform length, owned by one thread.
struct Scratch {
  explicit Scratch(int n)
      : real(fftw_alloc_real(static_cast<std::size_t>(n))),
        spectrum(fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1))) {}
  std::unique_ptr<double, FftwDeleter> real;
  std::unique_ptr<fftw_complex, FftwDeleter> spectrum;
};

Scratch& scratch_for(int n) {
  thread_local std::map<int, Scratch> buffers;
  auto it = buffers.find(n);
  if (it == buffers.end()) it = buffers.emplace(n, Scratch(n)).first;
  return it->second;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("fft: length must be even");
  Scratch tmp(n);
  // FFTW_ESTIMATE keeps plans (and therefore results) independent of timing.
  forward_plan_ = fftw_plan_dft_r2c_1d(n, tmp.real.get(), tmp.spectrum.get(), FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_c2r_1d(n, tmp.spectrum.get(), tmp.real.get(), FFTW_ESTIMATE);
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) {
    throw std::runtime_error("fft: FFTW planning failed");
  }
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

const RealFft& RealFft::get(int n) {
  std::mutex& mutex = planner_mutex();  // must outlive the cache below
  static std::map<int, std::unique_ptr<RealFft>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::unique_ptr<RealFft>(new RealFft(n))).first;
  return *it->second;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  Scratch& s = scratch_for(n_);
  std::copy(in.begin(), in.end(), s.real.get());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), s.real.get(), s.spectrum.get());
  const auto* spec = reinterpret_cast<const std::complex<double>*>(s.spectrum.get());
  std::copy(spec, spec + n_ / 2 + 1, out.begin());
}

void RealFft::backward(std::span<const std::complex<double>> in, std::span<double> out) const {
  Scratch& s = scratch_for(n_);
  std::copy(in.begin(), in.begin() + n_ / 2 + 1,
            reinterpret_cast<std::complex<double>*>(s.spectrum.get()));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_plan_), s.spectrum.get(), s.real.get());
  std::copy(s.real.get(), s.real.get() + n_, out.begin());
}

}  // namespace kdvbbm::detail
