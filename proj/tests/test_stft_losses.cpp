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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "specloss/lp_mask.hpp"
#include "specloss/parallel.hpp"
#include "specloss/stft_losses.hpp"

namespace specloss {
namespace {

RealMatrix mat(std::size_t rows, std::size_t cols, std::vector<double> v) {
  RealMatrix m(rows, cols);
  std::copy(v.begin(), v.end(), m.flat().begin());
  return m;
}

RealMatrix random_magnitudes(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  RealMatrix m(rows, cols);
  for (double& v : m.flat()) v = u(rng);
  return m;
}

std::vector<double> flat(const RealMatrix& m) { return {m.flat().begin(), m.flat().end()}; }

RealMatrix filled(std::size_t rows, std::size_t cols, double v) {
  RealMatrix m(rows, cols);
  std::fill(m.flat().begin(), m.flat().end(), v);
  return m;
}

TEST(SpectralConvergence, HandValues) {
  const auto x = mat(1, 2, {3, 4});
  EXPECT_EQ(spectral_convergence(x, x), 0.0);
  EXPECT_EQ(spectral_convergence(x, mat(1, 2, {0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(spectral_convergence(x, mat(1, 2, {3, 0})), 0.8);
}

TEST(SpectralConvergence, Errors) {
  EXPECT_THROW(spectral_convergence(mat(1, 2, {3, 4}), mat(2, 1, {3, 4})), InvalidArgument);
  EXPECT_THROW(spectral_convergence(mat(1, 2, {0, 0}), mat(1, 2, {1, 1})), DivisionGuard);
  const MagnitudeSpectrogram a{{512, 240, 50}, mat(1, 2, {1, 2})};
  const MagnitudeSpectrogram b{{512, 256, 50}, mat(1, 2, {1, 2})};
  EXPECT_THROW(spectral_convergence(a, b), InvalidArgument);
}

TEST(LogStftMagnitude, HandValues) {
  const auto x = mat(1, 1, {std::numbers::e});
  EXPECT_EQ(log_stft_magnitude(x, x), 0.0);
  EXPECT_DOUBLE_EQ(log_stft_magnitude(x, mat(1, 1, {1.0})), 1.0);
  EXPECT_THROW(log_stft_magnitude(x, mat(1, 2, {1, 1})), InvalidArgument);
}

TEST(LogStftMagnitude, FloorAppliesToZeros) {
  const auto a = mat(1, 2, {1.0, 0.0});
  const auto b = mat(1, 2, {1.0, 1.0});
  EXPECT_NEAR(log_stft_magnitude(a, b), 0.5 * std::abs(std::log(1e-7)), 1e-12);
}

TEST(LogStftMagnitude, MatchesDirectFormula) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_magnitudes(rng, 4, 5), b = random_magnitudes(rng, 4, 5);
    EXPECT_NEAR(log_stft_magnitude(a, b), oracle::logmag(flat(a), flat(b)), 1e-12);
    EXPECT_NEAR(spectral_convergence(a, b), oracle::sc(flat(a), flat(b)), 1e-12);
  }
}

TEST(WeightedSpectralConvergence, HandValues) {
  const auto x = mat(1, 2, {3, 4});
  EXPECT_NEAR(weighted_spectral_convergence(x, mat(1, 2, {0, 0}), mat(1, 2, {1, 0.5})),
              std::sqrt(13.0) / 5.0, 1e-15);
}

TEST(WeightedLogStftMagnitude, HandValues) {
  const auto x = mat(1, 1, {std::numbers::e});
  EXPECT_DOUBLE_EQ(weighted_log_stft_magnitude(x, mat(1, 1, {1.0}), mat(1, 1, {0.5})), 0.5);
  std::mt19937_64 rng(2);
  const auto a = random_magnitudes(rng, 3, 7);
  EXPECT_EQ(weighted_log_stft_magnitude(a, a, random_magnitudes(rng, 3, 7)), 0.0);
  EXPECT_THROW(weighted_log_stft_magnitude(a, a, filled(3, 6, 1.0)), InvalidArgument);
}

TEST(WeightedLosses, UnitMaskReducesToUnweighted) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t rows = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    const std::size_t cols = std::uniform_int_distribution<std::size_t>(1, 65)(rng);
    const auto a = random_magnitudes(rng, rows, cols), b = random_magnitudes(rng, rows, cols);
    const auto ones = filled(rows, cols, 1.0);
    EXPECT_NEAR(weighted_spectral_convergence(a, b, ones), spectral_convergence(a, b), 1e-12);
    EXPECT_NEAR(weighted_log_stft_magnitude(a, b, ones), log_stft_magnitude(a, b), 1e-12);
  }
}

TEST(WeightedLosses, HalfMaskHalvesSpectralConvergence) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_magnitudes(rng, 6, 9), b = random_magnitudes(rng, 6, 9);
    EXPECT_NEAR(weighted_spectral_convergence(a, b, filled(6, 9, 0.5)),
                0.5 * spectral_convergence(a, b), 1e-15);
  }
}

TEST(WeightedLosses, MatchDirectFormula) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uw(0.5, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_magnitudes(rng, 5, 8), b = random_magnitudes(rng, 5, 8);
    RealMatrix w(5, 8);
    for (double& v : w.flat()) v = uw(rng);
    const auto wf = flat(w);
    EXPECT_NEAR(weighted_spectral_convergence(a, b, w), oracle::sc(flat(a), flat(b), &wf), 1e-12);
    EXPECT_NEAR(weighted_log_stft_magnitude(a, b, w), oracle::logmag(flat(a), flat(b), &wf), 1e-12);
  }
}

TEST(Losses, NonNegative) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = random_magnitudes(rng, 4, 4), b = random_magnitudes(rng, 4, 4);
    const auto w = random_magnitudes(rng, 4, 4);
    EXPECT_GE(spectral_convergence(a, b), 0.0);
    EXPECT_GE(log_stft_magnitude(a, b), 0.0);
    EXPECT_GE(weighted_spectral_convergence(a, b, w), 0.0);
    EXPECT_GE(weighted_log_stft_magnitude(a, b, w), 0.0);
  }
}

TEST(MultiResolutionConfig, Defaults) {
  const auto mrc = MultiResolutionConfig::defaults();
  ASSERT_EQ(mrc.resolutions.size(), 3u);
  EXPECT_EQ(mrc.resolutions[0], (StftConfig{512, 240, 50}));
  EXPECT_EQ(mrc.resolutions[1], (StftConfig{1024, 600, 120}));
  EXPECT_EQ(mrc.resolutions[2], (StftConfig{2048, 1200, 240}));
  EXPECT_EQ(mrc.max_window(), 1200u);
  EXPECT_THROW(MultiResolutionConfig{}.validate(), InvalidArgument);
}

TEST(MrStftLoss, IdentityGivesZeroLossAndGradient) {
  std::mt19937_64 rng(7);
  const auto x = oracle::uniform_signal(rng, 2048);
  const auto r = mr_stft_loss(x, x, MultiResolutionConfig::defaults(), std::nullopt, true);
  EXPECT_EQ(r.total, 0.0);
  ASSERT_TRUE(r.gradient);
  for (double g : *r.gradient) EXPECT_EQ(g, 0.0);
}

TEST(MrStftLoss, TotalIsMeanOfPerResolutionTerms) {
  std::mt19937_64 rng(8);
  const auto x = oracle::uniform_signal(rng, 4000), y = oracle::uniform_signal(rng, 4000);
  const auto mrc = MultiResolutionConfig::defaults();
  const MaskDesign mask{LpModel{oracle::random_stable_lp(rng, 10), "direct"}};
  const auto r = mr_stft_loss(x, y, mrc, mask, false);
  EXPECT_TRUE(r.weighted);
  EXPECT_FALSE(r.gradient);
  double sum = 0.0;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& cfg = mrc.resolutions[m];
    const auto a = stft_magnitude(x, cfg), b = stft_magnitude(y, cfg);
    const auto w = build_weight_matrix(mask.row(cfg), a.num_frames());
    EXPECT_EQ(r.per_resolution[m].config, cfg);
    EXPECT_NEAR(r.per_resolution[m].sc, weighted_spectral_convergence(a, b, w), 1e-12);
    EXPECT_NEAR(r.per_resolution[m].mag, weighted_log_stft_magnitude(a, b, w), 1e-12);
    sum += r.per_resolution[m].sc + r.per_resolution[m].mag;
  }
  EXPECT_NEAR(r.total, sum / 3.0, 1e-12);
}

TEST(MrStftLoss, UnitMaskMatchesNoMask) {
  std::mt19937_64 rng(9);
  const auto x = oracle::uniform_signal(rng, 2048), y = oracle::uniform_signal(rng, 2048);
  const auto mrc = MultiResolutionConfig::defaults();
  const MaskDesign unit{LpModel{{0.0, 0.0, 0.0, 0.0}, "direct"}};
  const auto a = mr_stft_loss(x, y, mrc, std::nullopt, true);
  const auto b = mr_stft_loss(x, y, mrc, unit, true);
  EXPECT_NEAR(a.total, b.total, 1e-12);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_NEAR(a.per_resolution[m].sc, b.per_resolution[m].sc, 1e-12);
    EXPECT_NEAR(a.per_resolution[m].mag, b.per_resolution[m].mag, 1e-12);
  }
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_NEAR((*a.gradient)[n], (*b.gradient)[n], 1e-12);
}

TEST(MrStftLoss, GradientMatchesFiniteDifferencesSingleResolution) {
  std::mt19937_64 rng(10);
  const auto x = oracle::uniform_signal(rng, 2048), y = oracle::uniform_signal(rng, 2048);
  const MultiResolutionConfig mrc{{{512, 240, 50}}};
  const auto check = oracle::check_gradient(x, y, mrc, std::nullopt, 32, rng);
  EXPECT_LT(check.worst_relative, 1e-5);
}

TEST(MrStftLoss, GradientMatchesFiniteDifferencesThreeResolutions) {
  std::mt19937_64 rng(11);
  const auto x = oracle::uniform_signal(rng, 2048), y = oracle::uniform_signal(rng, 2048);
  const auto mrc = MultiResolutionConfig::defaults();
  EXPECT_LT(oracle::check_gradient(x, y, mrc, std::nullopt, 32, rng).worst_relative, 1e-5);
  const MaskDesign mask{lp_from_signal(x, 40).model};
  EXPECT_LT(oracle::check_gradient(x, y, mrc, mask, 32, rng).worst_relative, 1e-5);
}

TEST(MrStftLoss, GradientIsFinite) {
  std::mt19937_64 rng(12);
  const auto x = oracle::uniform_signal(rng, 2048);
  std::vector<double> y(2048, 0.0);  // every estimate magnitude below the floor
  y[1000] = 1e-3;
  const auto r = mr_stft_loss(x, y, MultiResolutionConfig::defaults(), std::nullopt, true);
  for (double g : *r.gradient) EXPECT_TRUE(std::isfinite(g));
}

TEST(MrStftLoss, MonotoneInNoiseAmplitude) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const auto x = oracle::uniform_signal(rng, 2048, 0.5);
    const auto noise = oracle::uniform_signal(rng, 2048);
    const MultiResolutionStftLoss loss(x, MultiResolutionConfig::defaults());
    double prev = 0.0;
    for (double amp : {0.001, 0.01, 0.05, 0.2, 1.0}) {
      std::vector<double> y(x);
      for (std::size_t n = 0; n < y.size(); ++n) y[n] += amp * noise[n];
      const double total = loss.evaluate(y, false).total;
      EXPECT_GT(total, prev) << "seed " << seed << " amp " << amp;
      prev = total;
    }
  }
}

TEST(MrStftLoss, NoiseInHighWeightBinsCostsMore) {
  // A two-resonance predictor: mask weight is low at the resonances and high
  // between them. Equal-amplitude tones go either into the highest-weight or
  // the lowest-weight bins.
  const StftConfig cfg{1024, 1024, 256};
  const MultiResolutionConfig mrc{{cfg}};
  std::vector<double> poly{1.0};
  for (double th : {0.6, 1.8}) {
    const std::vector<double> quad{1.0, -2.0 * 0.95 * std::cos(th), 0.95 * 0.95};
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) next[i + j] += poly[i] * quad[j];
    poly = next;
  }
  std::vector<double> a(poly.begin() + 1, poly.end());
  for (double& v : a) v = -v;
  const MaskDesign mask{LpModel{a, "direct"}};
  const auto row = mask.row(cfg).weights;

  std::vector<std::size_t> order(row.size() - 2);
  std::iota(order.begin(), order.end(), std::size_t{1});  // skip DC and Nyquist
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return row[i] < row[j]; });
  const std::vector<std::size_t> low{order[0], order[1], order[2], order[3]};
  const std::size_t last = order.size() - 1;
  const std::vector<std::size_t> high{order[last - 3], order[last - 2], order[last - 1], order[last]};

  std::mt19937_64 rng(13);
  const auto x = oracle::uniform_signal(rng, 4096, 0.5);
  auto with_tones = [&](const std::vector<std::size_t>& bins) {
    std::vector<double> y(x);
    for (std::size_t f : bins)
      for (std::size_t n = 0; n < y.size(); ++n)
        y[n] += 0.05 * std::cos(2.0 * std::numbers::pi * static_cast<double>(f * n) / 1024.0);
    return y;
  };
  const auto hi = mr_stft_loss(x, with_tones(high), mrc, mask, false);
  const auto lo = mr_stft_loss(x, with_tones(low), mrc, mask, false);
  EXPECT_GT(hi.per_resolution[0].sc, lo.per_resolution[0].sc);
  // Unweighted, the two perturbations cost about the same.
  const auto hu = mr_stft_loss(x, with_tones(high), mrc, std::nullopt, false);
  const auto lu = mr_stft_loss(x, with_tones(low), mrc, std::nullopt, false);
  EXPECT_NEAR(hu.per_resolution[0].sc / lu.per_resolution[0].sc, 1.0, 0.1);
}

TEST(MrStftLoss, IndependentOfThreadCount) {
  std::mt19937_64 rng(14);
  const auto x = oracle::uniform_signal(rng, 3000), y = oracle::uniform_signal(rng, 3000);
  const auto mrc = MultiResolutionConfig::defaults();
  set_max_threads(1);
  const auto a = mr_stft_loss(x, y, mrc, std::nullopt, true);
  set_max_threads(3);
  const auto b = mr_stft_loss(x, y, mrc, std::nullopt, true);
  set_max_threads(0);
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(*a.gradient, *b.gradient);
}

TEST(MrStftLoss, Errors) {
  const std::vector<double> x(2048, 0.1), y(2047, 0.1), s(1000, 0.1);
  const auto mrc = MultiResolutionConfig::defaults();
  EXPECT_THROW(mr_stft_loss(x, y, mrc, std::nullopt, false), InvalidArgument);
  EXPECT_THROW(mr_stft_loss(s, s, mrc, std::nullopt, false), InvalidArgument);
  const std::vector<double> zeros(2048, 0.0);
  EXPECT_THROW(mr_stft_loss(zeros, x, mrc, std::nullopt, false), DivisionGuard);
}

TEST(GanLosses, AdversarialGenerator) {
  EXPECT_EQ(adversarial_generator_loss(std::vector<double>{1, 1, 1}), 0.0);
  EXPECT_EQ(adversarial_generator_loss(std::vector<double>{0, 0}), 1.0);
  EXPECT_EQ(adversarial_generator_loss(std::vector<double>{0, 1}), 0.5);
  EXPECT_THROW(adversarial_generator_loss(std::vector<double>{}), InvalidArgument);
}

TEST(GanLosses, Discriminator) {
  EXPECT_EQ(discriminator_loss(std::vector<double>{1, 1}, std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(discriminator_loss(std::vector<double>{0}, std::vector<double>{1, 1}), 2.0);
  EXPECT_EQ(discriminator_loss(std::vector<double>{1}, std::vector<double>{0.5}), 0.25);
  EXPECT_THROW(discriminator_loss(std::vector<double>{}, std::vector<double>{1}), InvalidArgument);
  EXPECT_THROW(discriminator_loss(std::vector<double>{1}, std::vector<double>{}), InvalidArgument);
}

TEST(GanLosses, Combined) {
  EXPECT_EQ(kDefaultLambdaAdv, 4.0);
  EXPECT_EQ(combined_generator_loss(1.0, 0.25), 2.0);
  EXPECT_EQ(combined_generator_loss(1.0, 0.25, 4.0), 2.0);
  EXPECT_EQ(combined_generator_loss(1.5, 0.25, 0.0), 1.5);
  EXPECT_EQ(combined_generator_loss(0.0, 0.0), 0.0);
  EXPECT_EQ(GanLossInputs{}.lambda_adv, 4.0);
  EXPECT_THROW(combined_generator_loss(1.0, 1.0, -1.0), InvalidArgument);
}

}  // namespace
}  // namespace specloss
