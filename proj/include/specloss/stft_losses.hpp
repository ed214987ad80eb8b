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

// Spectral convergence and log-magnitude losses (plain and mask weighted),
// their multi-resolution average with analytic waveform gradients, and the
// least-squares GAN loss arithmetic they are combined with.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specloss/dsp_core.hpp"
#include "specloss/error.hpp"
#include "specloss/lp_mask.hpp"
#include "specloss/parallel.hpp"

namespace specloss {

// Magnitudes are floored here before taking logs.
inline constexpr double kMagnitudeFloor = 1e-7;
// Reference spectrograms with a Frobenius norm at or below this are rejected.
inline constexpr double kScDenominatorGuard = 1e-12;

// Factor applied to the log-magnitude difference in the weighted log loss.
// The mask weight is used directly; swap in std::log(w) for the literal
// "log W" reading.
inline double log_term_weight(double w) { return w; }

namespace detail {

// Neumaier compensated sum. Keeps loss values accurate to a few ulps so that
// finite-difference checks at small steps stay meaningful.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline void check_shapes(const RealMatrix& a, const RealMatrix& b, const char* what) {
  if (!a.same_shape(b))
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                          "x" + std::to_string(b.cols()) + ")");
}

inline double frobenius(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

inline double floored_log(double m) { return std::log(m > kMagnitudeFloor ? m : kMagnitudeFloor); }

inline double sc_core(const RealMatrix& x, const RealMatrix& xh, const RealMatrix* w) {
  const auto a = x.flat(), b = xh.flat();
  const double den = frobenius(a);
  if (!(den > kScDenominatorGuard))
    throw DivisionGuard("spectral convergence: reference spectrogram is all zero");
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (w ? w->flat()[i] : 1.0) * (a[i] - b[i]);
    num += d * d;
  }
  return std::sqrt(num) / den;
}

inline double mag_core(const RealMatrix& x, const RealMatrix& xh, const RealMatrix* w) {
  const auto a = x.flat(), b = xh.flat();
  if (a.empty()) throw InvalidArgument("log STFT magnitude: empty spectrogram");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = w ? log_term_weight(w->flat()[i]) : 1.0;
    acc += std::abs(scale * (floored_log(a[i]) - floored_log(b[i])));
  }
  return acc / static_cast<double>(a.size());
}

inline void check_configs(const MagnitudeSpectrogram& x, const MagnitudeSpectrogram& xh) {
  if (!(x.config == xh.config)) throw InvalidArgument("spectrograms use different STFT configs");
}

}  // namespace detail

// ||X - X^||_F / ||X||_F
inline double spectral_convergence(const RealMatrix& x, const RealMatrix& xh) {
  detail::check_shapes(x, xh, "spectral_convergence");
  return detail::sc_core(x, xh, nullptr);
}

// mean |ln X - ln X^| with magnitudes floored at kMagnitudeFloor.
inline double log_stft_magnitude(const RealMatrix& x, const RealMatrix& xh) {
  detail::check_shapes(x, xh, "log_stft_magnitude");
  return detail::mag_core(x, xh, nullptr);
}

// ||W o (X - X^)||_F / ||X||_F. The denominator is not weighted.
inline double weighted_spectral_convergence(const RealMatrix& x, const RealMatrix& xh,
                                            const RealMatrix& w) {
  detail::check_shapes(x, xh, "weighted_spectral_convergence");
  detail::check_shapes(x, w, "weighted_spectral_convergence");
  return detail::sc_core(x, xh, &w);
}

inline double weighted_log_stft_magnitude(const RealMatrix& x, const RealMatrix& xh,
                                          const RealMatrix& w) {
  detail::check_shapes(x, xh, "weighted_log_stft_magnitude");
  detail::check_shapes(x, w, "weighted_log_stft_magnitude");
  return detail::mag_core(x, xh, &w);
}

inline double spectral_convergence(const MagnitudeSpectrogram& x, const MagnitudeSpectrogram& xh) {
  detail::check_configs(x, xh);
  return spectral_convergence(x.values, xh.values);
}
inline double log_stft_magnitude(const MagnitudeSpectrogram& x, const MagnitudeSpectrogram& xh) {
  detail::check_configs(x, xh);
  return log_stft_magnitude(x.values, xh.values);
}
inline double weighted_spectral_convergence(const MagnitudeSpectrogram& x,
                                            const MagnitudeSpectrogram& xh, const RealMatrix& w) {
  detail::check_configs(x, xh);
  return weighted_spectral_convergence(x.values, xh.values, w);
}
inline double weighted_log_stft_magnitude(const MagnitudeSpectrogram& x,
                                          const MagnitudeSpectrogram& xh, const RealMatrix& w) {
  detail::check_configs(x, xh);
  return weighted_log_stft_magnitude(x.values, xh.values, w);
}

struct MultiResolutionConfig {
  std::vector<StftConfig> resolutions;

  // (fft, window, hop) = (512, 240, 50), (1024, 600, 120), (2048, 1200, 240).
  static MultiResolutionConfig defaults() {
    return {{{512, 240, 50}, {1024, 600, 120}, {2048, 1200, 240}}};
  }

  void validate() const {
    if (resolutions.empty()) throw InvalidArgument("multi-resolution config needs at least one STFT");
    for (const auto& r : resolutions) r.validate();
  }

  std::size_t max_window() const {
    std::size_t m = 0;
    for (const auto& r : resolutions) m = std::max(m, r.window_size);
    return m;
  }
};

struct ResolutionLoss {
  StftConfig config;
  double sc = 0.0;
  double mag = 0.0;
};

struct LossReport {
  std::vector<ResolutionLoss> per_resolution;
  double total = 0.0;  // (1/M) sum_m (sc_m + mag_m)
  bool weighted = false;
  std::optional<std::vector<double>> gradient;  // d total / d estimate
};

// Multi-resolution STFT loss against a fixed reference. Reference spectra and
// mask rows are computed once, so repeated evaluations (optimisation loops)
// only pay for the estimate's transforms.
class MultiResolutionStftLoss {
 public:
  MultiResolutionStftLoss(std::span<const double> reference, MultiResolutionConfig config,
                          std::optional<MaskDesign> mask = std::nullopt)
      : config_(std::move(config)), length_(reference.size()), weighted_(mask.has_value()) {
    config_.validate();
    if (reference.size() < config_.max_window())
      throw InvalidArgument("reference of " + std::to_string(reference.size()) +
                            " samples is shorter than the largest window (" +
                            std::to_string(config_.max_window()) + ")");
    for (const auto& cfg : config_.resolutions) {
      Resolution res{cfg, stft_magnitude(reference, cfg).values, {}};
      res.reference_norm = detail::frobenius(res.reference.flat());
      if (!(res.reference_norm > kScDenominatorGuard))
        throw DivisionGuard("spectral convergence: reference spectrogram is all zero at fft " +
                            std::to_string(cfg.fft_size));
      res.weights = mask ? mask->row(cfg).weights : std::vector<double>(cfg.num_bins(), 1.0);
      resolutions_.push_back(std::move(res));
    }
  }

  const MultiResolutionConfig& config() const noexcept { return config_; }
  std::size_t signal_length() const noexcept { return length_; }
  bool weighted() const noexcept { return weighted_; }

  LossReport evaluate(std::span<const double> estimate, bool want_gradient) const {
    if (estimate.size() != length_)
      throw InvalidArgument("estimate has " + std::to_string(estimate.size()) +
                            " samples, reference has " + std::to_string(length_));
    const std::size_t m = resolutions_.size();
    std::vector<ResolutionLoss> losses(m);
    std::vector<std::vector<double>> grads(want_gradient ? m : 0);
    parallel_for(m, [&](std::size_t i) {
      auto g = evaluate_one(resolutions_[i], estimate, want_gradient, losses[i]);
      if (want_gradient) grads[i] = std::move(g);
    });

    LossReport report;
    report.weighted = weighted_;
    report.per_resolution = std::move(losses);
    const double inv_m = 1.0 / static_cast<double>(m);
    detail::CompensatedSum sum;
    for (const auto& l : report.per_resolution) {
      sum.add(l.sc);
      sum.add(l.mag);
    }
    report.total = sum.value() * inv_m;
    if (want_gradient) {
      std::vector<double> total(length_, 0.0);
      for (const auto& g : grads)
        for (std::size_t n = 0; n < length_; ++n) total[n] += g[n];
      for (double& v : total) v *= inv_m;
      report.gradient = std::move(total);
    }
    return report;
  }

 private:
  struct Resolution {
    StftConfig config;
    RealMatrix reference;
    std::vector<double> weights;  // one row, repeated over frames
    double reference_norm = 0.0;
  };

  static std::vector<double> evaluate_one(const Resolution& res, std::span<const double> estimate,
                                          bool want_gradient, ResolutionLoss& out) {
    const ComplexMatrix spectrum = stft_forward_full(estimate, res.config);
    const RealMatrix& ref = res.reference;
    const std::size_t frames = ref.rows(), bins = ref.cols();
    const double cells = static_cast<double>(frames * bins);

    detail::CompensatedSum num_acc, mag_acc;
    RealMatrix est(frames, bins);
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t f = 0; f < bins; ++f) {
        const double a = ref(t, f);
        const double b = std::abs(spectrum(t, f));
        const double w = res.weights[f];
        est(t, f) = b;
        const double d = w * (a - b);
        num_acc.add(d * d);
        mag_acc.add(std::abs(log_term_weight(w) * (detail::floored_log(a) - detail::floored_log(b))));
      }
    const double num = std::sqrt(num_acc.value());
    out.config = res.config;
    out.sc = num / res.reference_norm;
    out.mag = mag_acc.value() / cells;
    if (!want_gradient) return {};

    // d(sc + mag)/d|X^|
    RealMatrix grad_mag(frames, bins);
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t f = 0; f < bins; ++f) {
        const double a = ref(t, f), b = est(t, f), w = res.weights[f];
        double g = 0.0;
        if (num > 0.0) g -= w * w * (a - b) / (num * res.reference_norm);
        if (b > kMagnitudeFloor) {
          const double lw = log_term_weight(w);
          const double r = lw * (detail::floored_log(a) - std::log(b));
          if (r != 0.0) g -= (r > 0.0 ? lw : -lw) / (cells * b);
        }
        grad_mag(t, f) = g;
      }
    return stft_magnitude_adjoint(spectrum, grad_mag, res.config, estimate.size());
  }

  MultiResolutionConfig config_;
  std::size_t length_;
  bool weighted_;
  std::vector<Resolution> resolutions_;
};

inline LossReport mr_stft_loss(std::span<const double> reference, std::span<const double> estimate,
                               const MultiResolutionConfig& config,
                               const std::optional<MaskDesign>& mask, bool want_gradient) {
  if (reference.size() != estimate.size())
    throw InvalidArgument("reference and estimate lengths differ (" +
                          std::to_string(reference.size()) + " vs " +
                          std::to_string(estimate.size()) + ")");
  return MultiResolutionStftLoss(reference, config, mask).evaluate(estimate, want_gradient);
}

// Least-squares GAN losses over per-time-step discriminator outputs.

inline constexpr double kDefaultLambdaAdv = 4.0;

struct GanLossInputs {
  std::vector<double> disc_outputs_fake;
  std::vector<double> disc_outputs_real;
  double lambda_adv = kDefaultLambdaAdv;
};

// mean_t (1 - D_t)^2 over outputs on generated audio.
inline double adversarial_generator_loss(std::span<const double> disc_outputs_fake) {
  if (disc_outputs_fake.empty()) throw InvalidArgument("adversarial loss: no discriminator outputs");
  double acc = 0.0;
  for (double d : disc_outputs_fake) acc += (1.0 - d) * (1.0 - d);
  return acc / static_cast<double>(disc_outputs_fake.size());
}

// mean (1 - D_real)^2 + mean D_fake^2
inline double discriminator_loss(std::span<const double> disc_outputs_real,
                                 std::span<const double> disc_outputs_fake) {
  if (disc_outputs_real.empty() || disc_outputs_fake.empty())
    throw InvalidArgument("discriminator loss: no discriminator outputs");
  double real = 0.0, fake = 0.0;
  for (double d : disc_outputs_real) real += (1.0 - d) * (1.0 - d);
  for (double d : disc_outputs_fake) fake += d * d;
  return real / static_cast<double>(disc_outputs_real.size()) +
         fake / static_cast<double>(disc_outputs_fake.size());
}

inline double combined_generator_loss(double mr_stft_total, double adversarial,
                                      double lambda_adv = kDefaultLambdaAdv) {
  if (!(lambda_adv >= 0.0)) throw InvalidArgument("lambda_adv must be non-negative");
  return mr_stft_total + lambda_adv * adversarial;
}

}  // namespace specloss
