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

// JSON forms of the mask file and the reports. Kept apart from the numeric
// headers so those do not depend on nlohmann/json.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "specloss/error.hpp"
#include "specloss/lp_mask.hpp"
#include "specloss/metrics.hpp"
#include "specloss/stft_losses.hpp"
#include "specloss/toy_optimizer.hpp"

namespace specloss {

using nlohmann::json;

inline json to_json(const MaskFile& m) {
  return {{"order", m.mask.lp.order()},
          {"lp_coefficients", m.mask.lp.coefficients},
          {"norm_range", {m.mask.lo, m.mask.hi}},
          {"sample_rate", m.sample_rate},
          {"source", m.mask.lp.source}};
}

// Throws InvalidArgument naming the first bad field.
inline MaskFile mask_file_from_json(const json& j) {
  auto bad = [](const std::string& what) { return InvalidArgument("mask file: " + what); };
  if (!j.is_object()) throw bad("top level is not an object");
  MaskFile m;
  if (!j.contains("lp_coefficients") || !j["lp_coefficients"].is_array())
    throw bad("missing lp_coefficients array");
  for (const auto& v : j["lp_coefficients"]) {
    if (!v.is_number()) throw bad("lp_coefficients must be numbers");
    const double c = v.get<double>();
    if (!std::isfinite(c)) throw bad("lp_coefficients must be finite");
    m.mask.lp.coefficients.push_back(c);
  }
  if (m.mask.lp.coefficients.empty()) throw bad("lp_coefficients is empty");
  if (j.contains("order")) {
    if (!j["order"].is_number_integer() ||
        j["order"].get<long long>() != static_cast<long long>(m.mask.lp.order()))
      throw bad("order does not match the number of lp_coefficients");
  }
  if (j.contains("norm_range")) {
    const auto& r = j["norm_range"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
      throw bad("norm_range must be [lo, hi]");
    m.mask.lo = r[0].get<double>();
    m.mask.hi = r[1].get<double>();
    if (!(m.mask.lo > 0.0) || !(m.mask.lo < m.mask.hi) || !std::isfinite(m.mask.hi))
      throw bad("norm_range must satisfy 0 < lo < hi");
  }
  if (j.contains("sample_rate")) {
    if (!j["sample_rate"].is_number_integer() || j["sample_rate"].get<long long>() <= 0)
      throw bad("sample_rate must be a positive integer");
    m.sample_rate = j["sample_rate"].get<int>();
  }
  if (j.contains("source")) {
    if (!j["source"].is_string()) throw bad("source must be a string");
    m.mask.lp.source = j["source"].get<std::string>();
  }
  return m;
}

inline MaskFile read_mask_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mask file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("mask file " + path.string() + " is not valid JSON: " + e.what());
  }
  return mask_file_from_json(j);
}

inline json to_json(const StftConfig& c) {
  return {{"fft", c.fft_size}, {"window", c.window_size}, {"hop", c.hop_size}};
}

inline json to_json(const LossReport& r) {
  json res = json::array();
  for (const auto& l : r.per_resolution)
    res.push_back({{"fft", l.config.fft_size},
                   {"window", l.config.window_size},
                   {"hop", l.config.hop_size},
                   {"sc", l.sc},
                   {"mag", l.mag}});
  return {{"resolutions", res}, {"total", r.total}, {"weighted", r.weighted}};
}

inline json to_json(const LsdReport& r) {
  return {{"config", to_json(r.config)}, {"per_frame_db", r.per_frame}, {"mean_db", r.mean}};
}

inline json to_json(const SpectralMask& m) {
  return {{"fft", m.config.fft_size},
          {"num_bins", m.weights.size()},
          {"norm_range", {m.lo, m.hi}},
          {"degenerate", m.degenerate},
          {"order", m.lp.order()},
          {"weights", m.weights}};
}

inline json to_json(const ValleyErrorProfile& p) {
  return {{"valley_err", p.valley_err},
          {"formant_err", p.formant_err},
          {"valley_bins", p.valley_bins.size()},
          {"formant_bins", p.formant_bins.size()}};
}

inline json to_json(const OptimizeRun& r) {
  const double first = r.loss_history.front(), last = r.loss_history.back();
  return {{"steps", r.steps},
          {"step_size", r.step_size},
          {"seed", r.seed},
          {"weighted", r.mask.has_value()},
          {"initial_loss", first},
          {"final_loss", last},
          {"loss_history", r.loss_history}};
}

// Pretty JSON with a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace specloss
