#include "sefusion/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "sefusion/common.hpp"

namespace sefusion {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2 || (n & (n - 1)) != 0) {
    throw DomainError("RealFft: size must be a power of two >= 2, got " + std::to_string(n));
  }
  std::lock_guard lock(planner_mutex());
  time_ = fftw_alloc_real(n);
  auto* freq = fftw_alloc_complex(n / 2 + 1);
  freq_ = freq;
  fwd_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), time_, freq, FFTW_ESTIMATE);
  inv_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), freq, time_, FFTW_ESTIMATE);
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& other) noexcept
    : n_(other.n_),
      time_(other.time_),
      freq_(other.freq_),
      fwd_plan_(other.fwd_plan_),
      inv_plan_(other.inv_plan_) {
  other.time_ = nullptr;
  other.freq_ = nullptr;
  other.fwd_plan_ = nullptr;
  other.inv_plan_ = nullptr;
}

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    release();
    n_ = other.n_;
    std::swap(time_, other.time_);
    std::swap(freq_, other.freq_);
    std::swap(fwd_plan_, other.fwd_plan_);
    std::swap(inv_plan_, other.inv_plan_);
  }
  return *this;
}

void RealFft::release() noexcept {
  if (!time_ && !freq_) return;
  std::lock_guard lock(planner_mutex());
  if (fwd_plan_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_plan_));
  if (inv_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inv_plan_));
  fftw_free(time_);
  fftw_free(freq_);
  time_ = nullptr;
  freq_ = nullptr;
  fwd_plan_ = nullptr;
  inv_plan_ = nullptr;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  if (in.size() > n_ || out.size() != num_bins()) {
    throw ShapeError("RealFft::forward: buffer size mismatch");
  }
  std::copy(in.begin(), in.end(), time_);
  std::fill(time_ + in.size(), time_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(fwd_plan_));
  const auto* f = static_cast<const fftw_complex*>(freq_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {f[k][0], f[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  if (in.size() != num_bins() || out.size() != n_) {
    throw ShapeError("RealFft::inverse: buffer size mismatch");
  }
  auto* f = static_cast<fftw_complex*>(freq_);
  for (std::size_t k = 0; k < in.size(); ++k) {
    f[k][0] = in[k].real();
    f[k][1] = in[k].imag();
  }
  // A real signal has purely real DC and Nyquist terms.
  f[0][1] = 0.0;
  f[n_ / 2][1] = 0.0;
  fftw_execute(static_cast<fftw_plan>(inv_plan_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = time_[i] * scale;
}

}  // namespace sefusion
