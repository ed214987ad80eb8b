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

// Direct waveform optimisation against the multi-resolution STFT loss. The
// estimate samples themselves are the parameters; no generator network is
// involved. Used to exercise the analytic gradients end to end and to measure
// where the residual spectral error ends up with and without the mask.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "specloss/dsp_core.hpp"
#include "specloss/error.hpp"
#include "specloss/lp_mask.hpp"
#include "specloss/stft_losses.hpp"

namespace specloss {

struct OptimizeOptions {
  std::size_t steps = 500;
  double step_size = 0.05;
  double momentum = 0.9;   // decay of the running gradient mean
  double init_std = 0.1;   // std of the Gaussian initial estimate
  std::uint64_t seed = 0;
};

struct OptimizeRun {
  Waveform target;
  Waveform estimate;
  std::size_t steps = 0;
  double step_size = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;  // steps + 1 entries, initial loss first
  std::optional<MaskDesign> mask;
};

inline OptimizeRun optimize_waveform(const Waveform& target, const MultiResolutionConfig& mrc,
                                     const std::optional<MaskDesign>& mask,
                                     const OptimizeOptions& opts) {
  if (opts.steps == 0) throw InvalidArgument("optimize_waveform: steps must be at least 1");
  if (!(opts.step_size > 0.0)) throw InvalidArgument("optimize_waveform: step_size must be positive");
  const MultiResolutionStftLoss loss(target.view(), mrc, mask);

  OptimizeRun run;
  run.target = target;
  run.steps = opts.steps;
  run.step_size = opts.step_size;
  run.seed = opts.seed;
  run.mask = mask;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> noise(0.0, opts.init_std);
  std::vector<double> x(target.size());
  for (double& v : x) v = noise(rng);

  std::vector<double> velocity(x.size(), 0.0);
  run.loss_history.reserve(opts.steps + 1);
  auto record = [&](double total) {
    run.loss_history.push_back(total);
    if (!std::isfinite(total))
      throw AbortedRun("optimize_waveform: loss became non-finite at step " +
                           std::to_string(run.loss_history.size() - 1),
                       run.loss_history);
  };
  for (std::size_t step = 0; step < opts.steps; ++step) {
    const auto report = loss.evaluate(x, true);
    record(report.total);
    const auto& g = *report.gradient;
    for (std::size_t n = 0; n < x.size(); ++n) {
      velocity[n] = opts.momentum * velocity[n] + (1.0 - opts.momentum) * g[n];
      x[n] -= opts.step_size * velocity[n];
    }
  }
  record(loss.evaluate(x, false).total);
  run.estimate = {std::move(x), target.sample_rate};
  return run;
}

inline OptimizeRun optimize_waveform(const Waveform& target, const MultiResolutionConfig& mrc,
                                     const std::optional<MaskDesign>& mask, std::size_t steps,
                                     double step_size, std::uint64_t seed) {
  OptimizeOptions opts;
  opts.steps = steps;
  opts.step_size = step_size;
  opts.seed = seed;
  return optimize_waveform(target, mrc, mask, opts);
}

struct ValleyErrorProfile {
  double valley_err = 0.0;   // highest-weight quarter of the bins
  double formant_err = 0.0;  // lowest-weight quarter of the bins
  std::vector<std::size_t> valley_bins;
  std::vector<std::size_t> formant_bins;
};

// Ranks bins by mask weight and returns the mean squared log-magnitude error
// over all frames within the top and bottom quarter of the ranking.
inline ValleyErrorProfile valley_error_profile(std::span<const double> target,
                                               std::span<const double> estimate,
                                               const LpModel& lp, const StftConfig& cfg) {
  if (target.size() != estimate.size())
    throw InvalidArgument("valley_error_profile: lengths differ");
  const auto mask = mask_response(lp, cfg);
  if (mask.degenerate) throw InvalidArgument("valley_error_profile: mask is degenerate (flat LP response)");

  const std::size_t bins = cfg.num_bins();
  std::vector<std::size_t> order(bins);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mask.weights[a] < mask.weights[b];
  });
  const std::size_t quarter = std::max<std::size_t>(1, bins / 4);

  ValleyErrorProfile out;
  out.formant_bins.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(quarter));
  out.valley_bins.assign(order.end() - static_cast<std::ptrdiff_t>(quarter), order.end());
  std::sort(out.formant_bins.begin(), out.formant_bins.end());
  std::sort(out.valley_bins.begin(), out.valley_bins.end());

  const auto a = stft_magnitude(target, cfg);
  const auto b = stft_magnitude(estimate, cfg);
  auto mean_sq = [&](const std::vector<std::size_t>& set) {
    double acc = 0.0;
    for (std::size_t t = 0; t < a.num_frames(); ++t)
      for (std::size_t f : set) {
        const double d = detail::floored_log(a.values(t, f)) - detail::floored_log(b.values(t, f));
        acc += d * d;
      }
    return acc / static_cast<double>(a.num_frames() * set.size());
  };
  out.valley_err = mean_sq(out.valley_bins);
  out.formant_err = mean_sq(out.formant_bins);
  return out;
}

}  // namespace specloss
