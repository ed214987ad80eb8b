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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "specloss/dsp_core.hpp"
#include "specloss/error.hpp"
#include "specloss/stft_losses.hpp"

namespace specloss {

struct LsdReport {
  std::vector<double> per_frame;  // dB
  double mean = 0.0;              // dB
  StftConfig config;
};

inline StftConfig default_lsd_config() { return {1024, 600, 120}; }

// Per frame: sqrt(mean_f (20 log10(|X| / |X^|))^2), magnitudes floored at
// kMagnitudeFloor. Linear frequency bins.
inline LsdReport log_spectral_distance(std::span<const double> x, std::span<const double> xh,
                                       const StftConfig& cfg = default_lsd_config()) {
  if (x.size() != xh.size())
    throw InvalidArgument("log_spectral_distance: lengths differ (" + std::to_string(x.size()) +
                          " vs " + std::to_string(xh.size()) + ")");
  const auto a = stft_magnitude(x, cfg);
  const auto b = stft_magnitude(xh, cfg);
  LsdReport report;
  report.config = cfg;
  report.per_frame.resize(a.num_frames());
  const double bins = static_cast<double>(a.num_bins());
  double total = 0.0;
  for (std::size_t t = 0; t < a.num_frames(); ++t) {
    auto ra = a.values.row(t);
    auto rb = b.values.row(t);
    double acc = 0.0;
    for (std::size_t f = 0; f < ra.size(); ++f) {
      const double ma = std::max(ra[f], kMagnitudeFloor);
      const double mb = std::max(rb[f], kMagnitudeFloor);
      const double db = 20.0 * (std::log10(ma) - std::log10(mb));
      acc += db * db;
    }
    report.per_frame[t] = std::sqrt(acc / bins);
    total += report.per_frame[t];
  }
  report.mean = total / static_cast<double>(report.per_frame.size());
  return report;
}

}  // namespace specloss
