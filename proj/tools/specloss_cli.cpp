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

// specloss command-line tool.
//
// Structured results go to --out (or stdout) as JSON; diagnostics go to
// stderr. Exit codes: 0 ok, 1 usage error, 2 data error, 3 numerical
// degeneracy.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include "specloss/serialize.hpp"
#include "specloss/specloss.hpp"

namespace fs = std::filesystem;
using namespace specloss;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

void emit(const json& j, const std::string& out) {
  const std::string text = dump(j);
  if (out.empty() || out == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + out + " for writing");
  f << text;
  if (!f) throw IoError("write error on " + out);
}

void write_f64_le(const fs::path& path, std::span<const double> values) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    f.write(buf, 8);
  }
  if (!f) throw IoError("write error on " + path.string());
}

std::pair<Waveform, Waveform> read_pair(const std::string& ref_path, const std::string& est_path) {
  auto ref = read_wav(ref_path).waveform;
  auto est = read_wav(est_path).waveform;
  if (ref.sample_rate != est.sample_rate)
    throw InvalidArgument("sample rates differ: " + std::to_string(ref.sample_rate) + " vs " +
                          std::to_string(est.sample_rate));
  if (ref.size() != est.size())
    throw InvalidArgument("signal lengths differ: " + std::to_string(ref.size()) + " vs " +
                          std::to_string(est.size()));
  return {std::move(ref), std::move(est)};
}

struct DesignMaskArgs {
  std::string corpus;
  std::size_t order = 40;
  std::vector<double> range{kDefaultMaskLo, kDefaultMaskHi};
  std::string out;
};

int design_mask(const DesignMaskArgs& a) {
  const auto paths = scan_corpus(a.corpus);
  if (paths.empty()) throw InvalidArgument("corpus " + a.corpus + " contains no .wav files");
  if (a.range.size() != 2) throw InvalidArgument("--range expects LO,HI");

  std::vector<Waveform> waves;
  std::vector<std::string> names;
  for (const auto& p : paths) {
    auto w = read_wav(p).waveform;
    if (!waves.empty() && w.sample_rate != waves.front().sample_rate)
      throw InvalidArgument(p.string() + ": sample rate " + std::to_string(w.sample_rate) +
                            " differs from corpus rate " +
                            std::to_string(waves.front().sample_rate));
    waves.push_back(std::move(w));
    names.push_back(fs::relative(p, a.corpus).generic_string());
  }

  const auto design = design_corpus_lp(waves, names, a.order, fs::path(a.corpus).filename().string());
  for (const auto& item : design.items) {
    if (item.used)
      std::cerr << "lp " << item.source << ": order " << a.order
                << ", normalised prediction error " << item.residual_energy << "\n";
    else
      std::cerr << "warning: skipped " << item.source << ": " << item.reason << "\n";
  }

  MaskFile file;
  file.mask = {design.lp, a.range[0], a.range[1]};
  file.sample_rate = waves.front().sample_rate;
  // Validates the range and flags flat responses early.
  if (file.mask.row({1024, 1024, 256}).degenerate)
    std::cerr << "warning: averaged LP response is flat; mask weights are constant\n";
  emit(to_json(file), a.out);
  return kOk;
}

struct EvalLossArgs {
  std::string ref, est, mask, grad, out;
};

int eval_loss(const EvalLossArgs& a) {
  const auto [ref, est] = read_pair(a.ref, a.est);
  std::optional<MaskDesign> mask;
  if (!a.mask.empty()) mask = read_mask_file(a.mask).mask;
  const auto report =
      mr_stft_loss(ref.view(), est.view(), MultiResolutionConfig::defaults(), mask, !a.grad.empty());
  if (report.gradient) write_f64_le(a.grad, *report.gradient);
  emit(to_json(report), a.out);
  return kOk;
}

struct LsdArgs {
  std::string ref, est, out;
  StftConfig cfg = default_lsd_config();
};

int lsd(const LsdArgs& a) {
  const auto [ref, est] = read_pair(a.ref, a.est);
  emit(to_json(log_spectral_distance(ref.view(), est.view(), a.cfg)), a.out);
  return kOk;
}

struct NoiseShapeArgs {
  std::string mode, mask, in, out;
};

int noise_shape(const NoiseShapeArgs& a) {
  const auto mask = read_mask_file(a.mask);
  if (!is_minimum_phase(mask.mask.lp))
    throw NumericalDegeneracy("mask " + a.mask + " holds an unstable LP model (not minimum phase)");
  const auto input = read_wav(a.in).waveform;
  Waveform output{{}, input.sample_rate};
  std::size_t clipped = 0;
  if (a.mode == "analyze") {
    // Quantise inside the prediction loop so that synthesising the 16-bit
    // residual lands within half a step of the input.
    output.samples = quantized_analysis_filter(input.view(), mask.mask.lp, [&](double v) {
      if (v > 1.0 || v < -1.0) ++clipped;
      return quantize_pcm16(v) / 32768.0;
    });
    write_wav(a.out, output);
  } else {
    output = synthesis_filter(input, mask.mask.lp);
    clipped = write_wav(a.out, output);
  }
  if (clipped > 0) std::cerr << "warning: " << clipped << " samples clipped to [-1, 1]\n";
  emit({{"mode", a.mode},
        {"input", a.in},
        {"output", a.out},
        {"samples", output.size()},
        {"sample_rate", output.sample_rate},
        {"clipped", clipped}},
       "");
  return kOk;
}

struct MaskDumpArgs {
  std::string mask, out;
  std::size_t fft = 1024;
};

int mask_dump(const MaskDumpArgs& a) {
  const auto file = read_mask_file(a.mask);
  const auto row = file.mask.row({a.fft, a.fft, std::max<std::size_t>(1, a.fft / 4)});
  if (row.degenerate)
    std::cerr << "warning: LP response is flat (degenerate model); every weight is " << row.hi
              << "\n";
  json j = to_json(row);
  j["sample_rate"] = file.sample_rate;
  emit(j, a.out);
  return kOk;
}

struct OptimizeArgs {
  std::string target, mask, out;
  std::size_t steps = 500;
  std::uint64_t seed = 0;
  double step_size = 0.05;
};

int optimize_demo(const OptimizeArgs& a) {
  const auto target = read_wav(a.target).waveform;
  const auto mrc = MultiResolutionConfig::defaults();
  OptimizeOptions opts;
  opts.steps = a.steps;
  opts.step_size = a.step_size;
  opts.seed = a.seed;
  const StftConfig profile_cfg = default_lsd_config();

  json report;
  const auto plain = optimize_waveform(target, mrc, std::nullopt, opts);
  report["unweighted"] = to_json(plain);
  if (!a.mask.empty()) {
    const auto mask = read_mask_file(a.mask).mask;
    const auto weighted = optimize_waveform(target, mrc, mask, opts);
    report["weighted"] = to_json(weighted);
    const auto pu = valley_error_profile(target.view(), plain.estimate.view(), mask.lp, profile_cfg);
    const auto pw = valley_error_profile(target.view(), weighted.estimate.view(), mask.lp, profile_cfg);
    report["unweighted"]["profile"] = to_json(pu);
    report["weighted"]["profile"] = to_json(pw);
    report["comparison"] = {{"profile_config", to_json(profile_cfg)},
                            {"valley_err_unweighted", pu.valley_err},
                            {"valley_err_weighted", pw.valley_err},
                            {"formant_err_unweighted", pu.formant_err},
                            {"formant_err_weighted", pw.formant_err},
                            {"weighted_valley_lower", pw.valley_err < pu.valley_err}};
  }
  emit(report, a.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceptually weighted multi-resolution STFT loss toolkit"};
  app.require_subcommand(1);

  DesignMaskArgs dm;
  auto* c_dm = app.add_subcommand("design-mask", "Average corpus LSFs into a mask file");
  c_dm->add_option("--corpus", dm.corpus, "Directory scanned recursively for .wav files")->required();
  c_dm->add_option("--order", dm.order, "LP order")->capture_default_str()->check(CLI::PositiveNumber);
  c_dm->add_option("--range", dm.range, "Normalisation range LO,HI")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  c_dm->add_option("--out", dm.out, "Output mask JSON (default stdout)");

  EvalLossArgs el;
  auto* c_el = app.add_subcommand("eval-loss", "Multi-resolution STFT loss between two files");
  c_el->add_option("--ref", el.ref, "Reference WAV")->required();
  c_el->add_option("--est", el.est, "Estimate WAV")->required();
  c_el->add_option("--mask", el.mask, "Mask JSON; enables the weighted losses");
  c_el->add_option("--grad", el.grad, "Write d total / d est as raw little-endian float64");
  c_el->add_option("--out", el.out, "Report JSON (default stdout)");

  LsdArgs ld;
  auto* c_ld = app.add_subcommand("lsd", "Log-spectral distance in dB");
  c_ld->add_option("--ref", ld.ref, "Reference WAV")->required();
  c_ld->add_option("--est", ld.est, "Estimate WAV")->required();
  c_ld->add_option("--out", ld.out, "Report JSON (default stdout)");
  c_ld->add_option("--fft", ld.cfg.fft_size)->capture_default_str();
  c_ld->add_option("--window", ld.cfg.window_size)->capture_default_str();
  c_ld->add_option("--hop", ld.cfg.hop_size)->capture_default_str();

  NoiseShapeArgs ns;
  auto* c_ns = app.add_subcommand("noise-shape", "Apply the LP analysis filter or its inverse");
  c_ns->add_option("--mode", ns.mode, "analyze | synthesize")
      ->required()
      ->check(CLI::IsMember({"analyze", "synthesize"}));
  c_ns->add_option("--mask", ns.mask, "Mask JSON holding the LP model")->required();
  c_ns->add_option("--in", ns.in, "Input WAV")->required();
  c_ns->add_option("--out", ns.out, "Output WAV")->required();

  MaskDumpArgs md;
  auto* c_md = app.add_subcommand("mask-dump", "Normalised weight row for one FFT size");
  c_md->add_option("--mask", md.mask, "Mask JSON")->required();
  c_md->add_option("--fft", md.fft, "FFT size (power of two)")->capture_default_str();
  c_md->add_option("--out", md.out, "Output JSON (default stdout)");

  OptimizeArgs op;
  auto* c_op = app.add_subcommand("optimize-demo", "Fit a waveform to a target by gradient descent");
  c_op->add_option("--target", op.target, "Target WAV")->required();
  c_op->add_option("--mask", op.mask, "Mask JSON; adds a weighted run and a valley comparison");
  c_op->add_option("--steps", op.steps)->capture_default_str()->check(CLI::PositiveNumber);
  c_op->add_option("--seed", op.seed)->capture_default_str();
  c_op->add_option("--step-size", op.step_size)->capture_default_str()->check(CLI::PositiveNumber);
  c_op->add_option("--out", op.out, "Run report JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c_dm) return design_mask(dm);
    if (*c_el) return eval_loss(el);
    if (*c_ld) return lsd(ld);
    if (*c_ns) return noise_shape(ns);
    if (*c_md) return mask_dump(md);
    if (*c_op) return optimize_demo(op);
  } catch (const NumericalDegeneracy& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const AbortedRun& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
