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

// Time-invariant noise-shaping filters built on an LP model:
//   analysis  e[n] = x[n] - sum_k a_k x[n-k]      (FIR, A(z))
//   synthesis y[n] = e[n] + sum_k a_k y[n-k]      (all-pole, 1/A(z))
// Both start from zero history, so synthesis exactly inverts analysis.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "specloss/error.hpp"
#include "specloss/lp_mask.hpp"

namespace specloss {

// Running filter memory. `history[0]` is the most recent past value. Not
// meant to be shared between threads while a signal is being filtered.
class FilterState {
 public:
  explicit FilterState(LpModel lp) : lp_(std::move(lp)), history_(lp_.order(), 0.0) {}

  const LpModel& lp() const noexcept { return lp_; }
  std::span<const double> history() const noexcept { return history_; }
  void reset() { std::fill(history_.begin(), history_.end(), 0.0); }

  // sum_k a_k history[k-1]: the prediction of the next sample.
  double predict() const { return static_cast<double>(extended_prediction()); }

  // History holds past inputs.
  double analyze(double x) {
    const double e = static_cast<double>(x - extended_prediction());
    push(x);
    return e;
  }

  // History holds past outputs.
  double synthesize(double e) {
    const double y = static_cast<double>(e + extended_prediction());
    push(y);
    return y;
  }

 private:
  // The prediction is carried in extended precision so that analysis and
  // synthesis round once per sample; the all-pole synthesis recursion
  // amplifies any extra rounding by the peak gain of 1/A.
  long double extended_prediction() const {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < history_.size(); ++k)
      acc += static_cast<long double>(lp_.coefficients[k]) * history_[k];
    return acc;
  }

  void push(double v) {
    if (history_.empty()) return;
    for (std::size_t k = history_.size() - 1; k > 0; --k) history_[k] = history_[k - 1];
    history_[0] = v;
  }

  LpModel lp_;
  std::vector<double> history_;
};

namespace detail {
inline void check_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidArgument("noise shaping: non-finite input sample");
}
}  // namespace detail

inline std::vector<double> analysis_filter(std::span<const double> x, const LpModel& lp) {
  detail::check_finite(x);
  FilterState state(lp);
  std::vector<double> e(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) e[n] = state.analyze(x[n]);
  return e;
}

inline std::vector<double> synthesis_filter(std::span<const double> e, const LpModel& lp) {
  detail::check_finite(e);
  if (!is_minimum_phase(lp))
    throw InvalidArgument("synthesis_filter: LP model is not minimum phase, 1/A(z) is unstable");
  FilterState state(lp);
  std::vector<double> y(e.size());
  for (std::size_t n = 0; n < e.size(); ++n) y[n] = state.synthesize(e[n]);
  return y;
}

// Analysis filter with the residual quantised inside the prediction loop:
//   e_q[n] = quantize(x[n] - sum_k a_k y[n-k]),  y[n] = e_q[n] + sum_k a_k y[n-k].
// synthesis_filter(e_q) reproduces y exactly, and y[n] - x[n] is the quantiser
// error of sample n alone, so quantisation noise is never fed through the
// all-pole inverse. `quantize` maps a real to a representable value.
template <typename Quantizer>
std::vector<double> quantized_analysis_filter(std::span<const double> x, const LpModel& lp,
                                              Quantizer&& quantize) {
  detail::check_finite(x);
  FilterState reconstruction(lp);
  std::vector<double> e(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    e[n] = quantize(x[n] - reconstruction.predict());
    reconstruction.synthesize(e[n]);
  }
  return e;
}

inline Waveform analysis_filter(const Waveform& x, const LpModel& lp) {
  return {analysis_filter(x.view(), lp), x.sample_rate};
}

inline Waveform synthesis_filter(const Waveform& e, const LpModel& lp) {
  return {synthesis_filter(e.view(), lp), e.sample_rate};
}

}  // namespace specloss
