// Copyright 2026 The specloss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Framing, Hann windowing and one-sided DFT analysis of real signals.
//
// Frames are left aligned: frame t covers samples [t*hop, t*hop + window) and
// the tail shorter than one window is dropped. Each frame is multiplied by a
// periodic Hann window, zero padded to fft_size and transformed with FFTW.

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "specloss/error.hpp"

namespace specloss {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 24000;

  std::size_t size() const noexcept { return samples.size(); }
  std::span<const double> view() const noexcept { return samples; }
};

struct StftConfig {
  std::size_t fft_size = 1024;
  std::size_t window_size = 600;
  std::size_t hop_size = 120;

  std::size_t num_bins() const noexcept { return fft_size / 2 + 1; }

  void validate() const {
    if (fft_size == 0 || (fft_size & (fft_size - 1)) != 0)
      throw InvalidArgument("fft_size must be a power of two, got " + std::to_string(fft_size));
    if (fft_size < 2) throw InvalidArgument("fft_size must be at least 2");
    if (window_size == 0 || window_size > fft_size)
      throw InvalidArgument("window_size must be in [1, fft_size], got " +
                            std::to_string(window_size));
    if (hop_size == 0) throw InvalidArgument("hop_size must be positive");
  }

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

// Dense row-major matrix; rows are time frames, columns frequency bins.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Matrix<U>& o) const noexcept {
    return rows_ == o.rows() && cols_ == o.cols();
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

struct MagnitudeSpectrogram {
  StftConfig config;
  RealMatrix values;  // linear magnitude, num_frames x num_bins

  std::size_t num_frames() const noexcept { return values.rows(); }
  std::size_t num_bins() const noexcept { return values.cols(); }
};

// Periodic (DFT-even) Hann window: w[k] = 0.5 (1 - cos(2 pi k / n)).
inline std::vector<double> hann_window(std::size_t n) {
  if (n == 0) throw InvalidArgument("hann_window: length must be positive");
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                 static_cast<double>(n)));
  return w;
}

inline std::size_t num_frames(std::size_t signal_length, const StftConfig& cfg) {
  if (signal_length < cfg.window_size) return 0;
  return (signal_length - cfg.window_size) / cfg.hop_size + 1;
}

namespace detail {

// One r2c/c2r plan pair per transform size. Plans are created under a lock
// (the FFTW planner is not thread safe) and executed through the new-array
// interface, which is.
class FftPlans {
 public:
  explicit FftPlans(std::size_t n) : n_(n) {
    std::vector<double> real(n);
    std::vector<std::complex<double>> spec(n / 2 + 1);
    const int size = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(size, real.data(), as_fftw(spec.data()),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_ = fftw_plan_dft_c2r_1d(size, as_fftw(spec.data()), real.data(),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!forward_ || !inverse_) throw Error("FFTW failed to create a plan");
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (inverse_) fftw_destroy_plan(inverse_);
  }

  // frame.size() == n, out.size() == n/2 + 1
  void forward(std::span<double> frame, std::span<std::complex<double>> out) const {
    fftw_execute_dft_r2c(forward_, frame.data(), as_fftw(out.data()));
  }

  // Unnormalised inverse of a Hermitian half spectrum. Destroys `half`.
  void inverse(std::span<std::complex<double>> half, std::span<double> out) const {
    fftw_execute_dft_c2r(inverse_, as_fftw(half.data()), out.data());
  }

  std::size_t size() const noexcept { return n_; }

  static const FftPlans& get(std::size_t n) {
    std::lock_guard lock(planner_mutex());
    static std::map<std::size_t, std::unique_ptr<FftPlans>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::unique_ptr<FftPlans>(new FftPlans(n));
    return *slot;
  }

 private:
  static std::recursive_mutex& planner_mutex() {
    static std::recursive_mutex mu;
    return mu;
  }
  static fftw_complex* as_fftw(std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(p);
  }

  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline void check_signal(std::span<const double> x, const StftConfig& cfg) {
  cfg.validate();
  if (x.size() < cfg.window_size)
    throw InvalidArgument("signal of " + std::to_string(x.size()) +
                          " samples is shorter than one window (" +
                          std::to_string(cfg.window_size) + ")");
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidArgument("signal contains non-finite samples");
}

}  // namespace detail

// Complex one-sided spectrum, num_frames x (fft_size/2 + 1).
inline ComplexMatrix stft_forward_full(std::span<const double> x, const StftConfig& cfg) {
  detail::check_signal(x, cfg);
  const auto& plans = detail::FftPlans::get(cfg.fft_size);
  const auto window = hann_window(cfg.window_size);
  const std::size_t frames = num_frames(x.size(), cfg);
  ComplexMatrix spectrum(frames, cfg.num_bins());
  std::vector<double> frame(cfg.fft_size, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = x.data() + t * cfg.hop_size;
    for (std::size_t k = 0; k < cfg.window_size; ++k) frame[k] = src[k] * window[k];
    std::fill(frame.begin() + cfg.window_size, frame.end(), 0.0);
    plans.forward(frame, spectrum.row(t));
  }
  return spectrum;
}

inline RealMatrix modulus(const ComplexMatrix& spectrum) {
  RealMatrix mag(spectrum.rows(), spectrum.cols());
  auto in = spectrum.flat();
  auto out = mag.flat();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::abs(in[i]);
  return mag;
}

inline MagnitudeSpectrogram stft_magnitude(std::span<const double> x, const StftConfig& cfg) {
  return {cfg, modulus(stft_forward_full(x, cfg))};
}

// Adjoint of x -> |STFT(x)|. Given the spectrum of x and dL/d|X| for every
// cell, returns dL/dx of length `signal_length`. Cells with zero modulus get
// a zero subgradient.
//
// Per frame, dL/dy[k] = sum_f g_f Re(U_f e^{+j 2 pi f k / n}) with
// U_f = X_f / |X_f|, which is one unnormalised inverse real DFT of the half
// spectrum g_f U_f with interior bins halved. The windowed frame gradients
// are then overlap-added.
inline std::vector<double> stft_magnitude_adjoint(const ComplexMatrix& spectrum,
                                                  const RealMatrix& grad_magnitude,
                                                  const StftConfig& cfg,
                                                  std::size_t signal_length) {
  cfg.validate();
  if (!spectrum.same_shape(grad_magnitude) || spectrum.cols() != cfg.num_bins() ||
      spectrum.rows() != num_frames(signal_length, cfg))
    throw InvalidArgument("stft_magnitude_adjoint: shape mismatch");
  const auto& plans = detail::FftPlans::get(cfg.fft_size);
  const auto window = hann_window(cfg.window_size);
  const std::size_t bins = cfg.num_bins();
  std::vector<double> grad(signal_length, 0.0);
  std::vector<std::complex<double>> half(bins);
  std::vector<double> frame_grad(cfg.fft_size);
  for (std::size_t t = 0; t < spectrum.rows(); ++t) {
    auto spec = spectrum.row(t);
    auto g = grad_magnitude.row(t);
    for (std::size_t f = 0; f < bins; ++f) {
      const double m = std::abs(spec[f]);
      std::complex<double> v = (m > 0.0) ? g[f] * spec[f] / m : std::complex<double>{};
      if (f != 0 && f != bins - 1) v *= 0.5;
      half[f] = v;
    }
    // c2r ignores the imaginary parts of DC and Nyquist, which are zero for
    // a real frame anyway.
    plans.inverse(half, frame_grad);
    double* dst = grad.data() + t * cfg.hop_size;
    for (std::size_t k = 0; k < cfg.window_size; ++k) dst[k] += window[k] * frame_grad[k];
  }
  return grad;
}

}  // namespace specloss
