#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace sefusion {

/// Real-input FFT of a fixed power-of-two size, backed by FFTW.
///
/// Forward transform is unnormalized; inverse carries the 1/N factor, so
/// inverse(forward(x)) == x. Each instance owns its plan and scratch buffers;
/// instances are not shareable across threads, but distinct instances are.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  std::size_t size() const { return n_; }
  std::size_t num_bins() const { return n_ / 2 + 1; }

  /// `in` may be shorter than size(); the remainder is zero-filled.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Inverse of a one-sided spectrum; writes size() samples.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  double* time_ = nullptr;
  void* freq_ = nullptr;
  void* fwd_plan_ = nullptr;
  void* inv_plan_ = nullptr;
};

}  // namespace sefusion
