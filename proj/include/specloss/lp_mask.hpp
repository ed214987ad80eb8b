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

// Linear prediction, line spectral frequencies and the time-invariant
// perceptual mask W(z) = 1 - sum_k a_k z^-k derived from them.
//
// Sign convention: A(z) = 1 - sum_{k=1..p} a_k z^-k, so `coefficients[k-1]`
// is a_k and x[n] is predicted as sum_k a_k x[n-k].

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "specloss/dsp_core.hpp"
#include "specloss/error.hpp"

namespace specloss {

struct LpModel {
  std::vector<double> coefficients;
  std::string source = "direct";

  std::size_t order() const noexcept { return coefficients.size(); }
};

// Angles in radians, strictly increasing inside (0, pi).
struct LsfVector {
  std::vector<double> frequencies;

  std::size_t order() const noexcept { return frequencies.size(); }
};

struct LevinsonResult {
  LpModel model;
  double residual_energy = 0.0;
  std::vector<double> reflection;  // k_1..k_p
};

// r[k] = sum_n x[n] x[n+k], k = 0..max_lag (biased, unnormalised).
inline std::vector<double> autocorrelate(std::span<const double> x, std::size_t max_lag) {
  if (max_lag >= x.size())
    throw InvalidArgument("autocorrelate: max_lag " + std::to_string(max_lag) +
                          " must be below the signal length " + std::to_string(x.size()));
  // Extended-precision accumulation: the lags feed an ill-conditioned
  // Toeplitz solve at high orders.
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    long double acc = 0.0L;
    for (std::size_t n = 0; n + k < x.size(); ++n)
      acc += static_cast<long double>(x[n]) * static_cast<long double>(x[n + k]);
    r[k] = static_cast<double>(acc);
  }
  return r;
}

inline LevinsonResult levinson_durbin(std::span<const double> r, std::size_t order) {
  if (r.size() < order + 1)
    throw InvalidArgument("levinson_durbin: need " + std::to_string(order + 1) +
                          " autocorrelation lags, got " + std::to_string(r.size()));
  if (!(r[0] > 0.0)) throw InvalidArgument("levinson_durbin: r[0] must be positive");
  for (std::size_t i = 0; i <= order; ++i)
    if (!std::isfinite(r[i])) throw InvalidArgument("levinson_durbin: non-finite autocorrelation");

  // The recursion runs in extended precision; results are rounded once.
  std::vector<long double> a(order, 0.0L), prev(order, 0.0L);
  LevinsonResult out;
  out.reflection.reserve(order);
  long double energy = r[0];
  for (std::size_t i = 1; i <= order; ++i) {
    long double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= a[j - 1] * r[i - j];
    const long double k = acc / energy;
    if (!std::isfinite(k) || std::abs(k) >= 1.0L)
      throw NumericalDegeneracy("levinson_durbin: reflection coefficient " +
                                std::to_string(static_cast<double>(k)) + " at order " +
                                std::to_string(i) + " is not inside (-1, 1)");
    std::copy(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i - 1), prev.begin());
    for (std::size_t j = 1; j < i; ++j) a[j - 1] = prev[j - 1] - k * prev[i - j - 1];
    a[i - 1] = k;
    energy *= (1.0L - k * k);
    out.reflection.push_back(static_cast<double>(k));
  }
  out.model.coefficients.assign(a.begin(), a.end());
  out.residual_energy = static_cast<double>(energy);
  return out;
}

// Step-down recursion. Throws NumericalDegeneracy when some |k_i| >= 1,
// i.e. when A(z) is not minimum phase. Each step divides by 1 - k^2, so it
// runs in extended precision to keep its own rounding small next to that
// amplification.
inline std::vector<double> reflection_coefficients(const LpModel& lp) {
  std::vector<long double> a(lp.coefficients.begin(), lp.coefficients.end());
  std::vector<long double> next(a.size());
  std::vector<double> k(a.size());
  for (std::size_t i = a.size(); i >= 1; --i) {
    const long double ki = a[i - 1];
    if (!std::isfinite(ki) || std::abs(ki) >= 1.0L)
      throw NumericalDegeneracy("LP model is not minimum phase (|k_" + std::to_string(i) +
                                "| = " + std::to_string(static_cast<double>(std::abs(ki))) + ")");
    k[i - 1] = static_cast<double>(ki);
    const long double denom = 1.0L - ki * ki;
    for (std::size_t j = 1; j < i; ++j) next[j - 1] = (a[j - 1] + ki * a[i - j - 1]) / denom;
    std::copy(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(i - 1), a.begin());
  }
  return k;
}

inline bool is_minimum_phase(const LpModel& lp) {
  try {
    reflection_coefficients(lp);
    return true;
  } catch (const NumericalDegeneracy&) {
    return false;
  }
}

// Step-up recursion, the inverse of reflection_coefficients.
inline LpModel lp_from_reflection(std::span<const double> k) {
  LpModel lp;
  auto& a = lp.coefficients;
  a.assign(k.size(), 0.0);
  std::vector<double> prev(k.size());
  for (std::size_t i = 1; i <= k.size(); ++i) {
    std::copy(a.begin(), a.end(), prev.begin());
    for (std::size_t j = 1; j < i; ++j) a[j - 1] = prev[j - 1] - k[i - 1] * prev[i - j - 1];
    a[i - 1] = k[i - 1];
  }
  return lp;
}

// |A(e^{j omega})|.
inline double lp_magnitude_response(const LpModel& lp, double omega) {
  std::complex<double> acc{1.0, 0.0};
  for (std::size_t k = 1; k <= lp.order(); ++k)
    acc -= lp.coefficients[k - 1] * std::polar(1.0, -omega * static_cast<double>(k));
  return std::abs(acc);
}

namespace detail {

// Polynomials below are in powers of z^-1: p[i] multiplies z^-i. The root
// search runs in extended precision: near-coincident roots of sharp
// resonances are otherwise lost in the rounding of the evaluation.
using Real = long double;
using Poly = std::vector<Real>;

// Divides by (1 + d z^-1). The remainder is discarded (it is ~0 for the
// trivial roots this is used on).
inline Poly deflate_linear(const Poly& b, Real d) {
  Poly q(b.size() - 1);
  q[0] = b[0];
  for (std::size_t i = 1; i < q.size(); ++i) q[i] = b[i] - d * q[i - 1];
  return q;
}

// Divides by (1 - z^-2).
inline Poly deflate_both_ends(const Poly& b) {
  Poly q(b.size() - 2);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = b[i] + (i >= 2 ? q[i - 2] : Real{0});
  return q;
}

// For a symmetric polynomial S of degree d, e^{j w d/2} S(e^{jw}) is real:
// sum_i s_i cos((d/2 - i) w). With t = w/2 the cosines are cos(n t) for
// n = |d - 2i|, generated by the Chebyshev recurrence from a single cos(t).
inline Real symmetric_on_circle(const Poly& s, Real omega) {
  const std::size_t d = s.size() - 1;
  const Real c1 = std::cos(Real{0.5} * omega);
  Real acc = 0;
  Real prev = 1, cur = 1;  // cos((n - 1) t), cos(n t)
  for (std::size_t n = 0; n <= d; ++n) {
    if (n == 1) {
      cur = c1;
    } else if (n > 1) {
      const Real next = 2 * c1 * cur - prev;
      prev = cur;
      cur = next;
    }
    if ((d - n) % 2 != 0) continue;
    const std::size_t lo = (d - n) / 2, hi = d - lo;
    acc += n == 0 ? s[lo] : (s[lo] + s[hi]) * cur;
  }
  return acc;
}

inline bool roots_on_grid(const Poly& s, std::size_t expected, std::size_t grid,
                          std::vector<double>& roots) {
  roots.clear();
  const Real pi = std::numbers::pi_v<Real>;
  const Real step = pi / static_cast<Real>(grid);
  Real prev_w = 0;
  Real prev_v = symmetric_on_circle(s, 0);
  for (std::size_t i = 1; i <= grid; ++i) {
    const Real w = (i == grid) ? pi : step * static_cast<Real>(i);
    const Real v = symmetric_on_circle(s, w);
    if ((prev_v < 0) != (v < 0)) {
      if (roots.size() == expected) return false;
      Real lo = prev_w, hi = w;
      Real vlo = prev_v;
      // Bisect to full precision: coincident P and Q roots of sharp
      // resonances can be closer together than any fixed tolerance.
      for (int it = 0; it < 200; ++it) {
        const Real mid = Real{0.5} * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const Real vm = symmetric_on_circle(s, mid);
        if ((vm < 0) == (vlo < 0)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(static_cast<double>(Real{0.5} * (lo + hi)));
    }
    prev_w = w;
    prev_v = v;
  }
  return roots.size() == expected;
}

// Finds `expected` roots of s on the open upper half circle, starting from a
// 4096-point angle grid and refining it until the sign-change count matches.
inline std::vector<double> circle_roots(const Poly& s, std::size_t expected) {
  std::vector<double> roots;
  if (expected == 0) return roots;
  for (std::size_t grid = 4096; grid <= (std::size_t{1} << 22); grid *= 2)
    if (roots_on_grid(s, expected, grid, roots)) return roots;
  throw NumericalDegeneracy("LSF root search could not bracket " + std::to_string(expected) +
                            " roots");
}

}  // namespace detail

// Root angles of the sum/difference polynomials
//   P(z) = A(z) + z^-(p+1) A(1/z),  Q(z) = A(z) - z^-(p+1) A(1/z),
// with the trivial roots at z = +-1 removed. P owns the odd-numbered LSFs
// (w_1, w_3, ...), Q the even-numbered ones.
inline LsfVector lp_to_lsf(const LpModel& lp) {
  const std::size_t p = lp.order();
  if (p == 0) throw InvalidArgument("lp_to_lsf: empty model");
  if (!is_minimum_phase(lp)) throw InvalidArgument("lp_to_lsf: model is not minimum phase");

  detail::Poly c(p + 2, 0);
  c[0] = 1;
  for (std::size_t k = 1; k <= p; ++k) c[k] = -lp.coefficients[k - 1];
  detail::Poly sum(p + 2), diff(p + 2);
  for (std::size_t i = 0; i < p + 2; ++i) {
    sum[i] = c[i] + c[p + 1 - i];
    diff[i] = c[i] - c[p + 1 - i];
  }
  detail::Poly ps, qs;
  if (p % 2 == 0) {
    ps = detail::deflate_linear(sum, 1.0);
    qs = detail::deflate_linear(diff, -1.0);
  } else {
    ps = sum;
    qs = detail::deflate_both_ends(diff);
  }
  const std::size_t np = (p + 1) / 2;
  const std::size_t nq = p / 2;
  const auto proots = detail::circle_roots(ps, np);
  const auto qroots = detail::circle_roots(qs, nq);

  LsfVector out;
  out.frequencies.reserve(p);
  for (std::size_t i = 0; i < np; ++i) {
    out.frequencies.push_back(proots[i]);
    if (i < nq) out.frequencies.push_back(qroots[i]);
  }
  for (std::size_t i = 1; i < p; ++i)
    if (!(out.frequencies[i] > out.frequencies[i - 1]))
      throw NumericalDegeneracy("lp_to_lsf: roots of P and Q do not interlace");
  return out;
}

inline void validate_lsf(const LsfVector& lsf) {
  if (lsf.frequencies.empty()) throw InvalidArgument("LSF vector is empty");
  double prev = 0.0;
  for (double w : lsf.frequencies) {
    if (!(w > prev) || !(w < std::numbers::pi))
      throw InvalidArgument("LSFs must be strictly increasing inside (0, pi)");
    prev = w;
  }
}

inline LpModel lsf_to_lp(const LsfVector& lsf) {
  validate_lsf(lsf);
  const std::size_t p = lsf.order();
  // Expanding the quadratic factors into coefficients cancels catastrophically
  // for sharp resonances (intermediate coefficients grow like binomials).
  // Instead, A = (P + Q) / 2 is evaluated in product form at p + 2 points of
  // the unit circle, which determines its p + 2 coefficients exactly, and the
  // coefficients are recovered with an inverse DFT. Each factor
  // 1 - 2 cos(w_i) z^-1 + z^-2 equals z^-1 * 2 (cos w - cos w_i) on the circle,
  // written as a product of sines to avoid cancellation.
  const std::size_t n_points = p + 2;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<std::complex<double>> a_on_circle(n_points);
  for (std::size_t n = 0; n < n_points; ++n) {
    const double w = two_pi * static_cast<double>(n) / static_cast<double>(n_points);
    double rp = 1.0, rq = 1.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double f = lsf.frequencies[i];
      (i % 2 == 0 ? rp : rq) *= -4.0 * std::sin(0.5 * (w + f)) * std::sin(0.5 * (w - f));
    }
    const std::complex<double> z1 = std::polar(1.0, -w);
    const double half_p = 0.5 * static_cast<double>(p);
    std::complex<double> pv, qv;
    if (p % 2 == 0) {
      pv = (1.0 + z1) * std::polar(rp, -w * half_p);
      qv = (1.0 - z1) * std::polar(rq, -w * half_p);
    } else {
      pv = std::polar(rp, -w * (half_p + 0.5));
      qv = (1.0 - z1 * z1) * std::polar(rq, -w * (half_p - 0.5));
    }
    a_on_circle[n] = 0.5 * (pv + qv);
  }
  LpModel lp;
  lp.coefficients.resize(p);
  for (std::size_t k = 1; k <= p; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < n_points; ++n) {
      const double phase =
          two_pi * static_cast<double>((n * k) % n_points) / static_cast<double>(n_points);
      acc += a_on_circle[n] * std::polar(1.0, phase);
    }
    lp.coefficients[k - 1] = -acc.real() / static_cast<double>(n_points);
  }
  return lp;
}

// Element-wise mean, summed left to right.
inline LsfVector average_lsf(std::span<const LsfVector> corpus) {
  if (corpus.empty()) throw InvalidArgument("average_lsf: empty corpus");
  const std::size_t p = corpus.front().order();
  LsfVector mean;
  mean.frequencies.assign(p, 0.0);
  for (const auto& v : corpus) {
    if (v.order() != p) throw InvalidArgument("average_lsf: mixed LSF orders in corpus");
    for (std::size_t i = 0; i < p; ++i) mean.frequencies[i] += v.frequencies[i];
  }
  const double n = static_cast<double>(corpus.size());
  for (double& w : mean.frequencies) w /= n;
  return mean;
}

// Relative white-noise floor added to r[0] before the recursion.
inline constexpr double kLagZeroFloor = 1e-9;

// Whole-signal LP analysis: mean removal, autocorrelation, noise floor,
// Levinson-Durbin.
inline LevinsonResult lp_from_signal(std::span<const double> x, std::size_t order) {
  if (order == 0) throw InvalidArgument("LP order must be positive");
  if (x.size() <= order)
    throw InvalidArgument("signal of " + std::to_string(x.size()) +
                          " samples is too short for LP order " + std::to_string(order));
  double mean = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument("signal contains non-finite samples");
    mean += v;
  }
  mean /= static_cast<double>(x.size());
  std::vector<double> centered(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) centered[i] = x[i] - mean;
  auto r = autocorrelate(centered, order);
  if (!(r[0] > 0.0)) throw NumericalDegeneracy("signal has zero energy after mean removal");
  r[0] += kLagZeroFloor * r[0];
  return levinson_durbin(r, order);
}

struct CorpusItemStats {
  std::string source;
  bool used = false;
  double residual_energy = 0.0;  // prediction error relative to r[0]
  std::string reason;            // why it was skipped
};

struct CorpusDesign {
  LpModel lp;
  std::vector<CorpusItemStats> items;
};

// Per-signal LP -> LSF, LSF average, back to LP. Signals whose analysis is
// degenerate are skipped and reported; if none survive NumericalDegeneracy is
// thrown.
inline CorpusDesign design_corpus_lp(std::span<const Waveform> corpus,
                                     std::span<const std::string> names, std::size_t order,
                                     std::string source) {
  if (corpus.empty()) throw InvalidArgument("design_corpus_lp: empty corpus");
  CorpusDesign out;
  std::vector<LsfVector> lsfs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CorpusItemStats st;
    st.source = i < names.size() ? names[i] : std::to_string(i);
    try {
      auto fit = lp_from_signal(corpus[i].view(), order);
      lsfs.push_back(lp_to_lsf(fit.model));
      st.used = true;
      double gain = 1.0;
      for (double k : fit.reflection) gain *= (1.0 - k * k);
      st.residual_energy = gain;
    } catch (const NumericalDegeneracy& e) {
      st.reason = e.what();
    } catch (const InvalidArgument& e) {
      st.reason = e.what();
    }
    out.items.push_back(std::move(st));
  }
  if (lsfs.empty()) throw NumericalDegeneracy("every corpus item was skipped during LP analysis");
  out.lp = lsf_to_lp(average_lsf(lsfs));
  out.lp.source = std::move(source);
  return out;
}

// One normalised frequency row of the mask for a given analysis resolution.
struct SpectralMask {
  std::vector<double> weights;  // fft_size/2 + 1 entries
  StftConfig config;
  LpModel lp;
  double lo = 0.5;
  double hi = 1.0;
  bool degenerate = false;  // flat response; every weight is `hi`
};

inline constexpr double kDefaultMaskLo = 0.5;
inline constexpr double kDefaultMaskHi = 1.0;

// Samples |W(e^{j w_f})| at w_f = 2 pi f / fft_size and maps it affinely so
// that the minimum lands on lo and the maximum on hi.
inline SpectralMask mask_response(const LpModel& lp, const StftConfig& cfg,
                                  double lo = kDefaultMaskLo, double hi = kDefaultMaskHi) {
  cfg.validate();
  if (!(lo > 0.0) || !(lo < hi) || !std::isfinite(hi))
    throw InvalidArgument("mask range must satisfy 0 < lo < hi");
  SpectralMask mask{{}, cfg, lp, lo, hi, false};
  const std::size_t bins = cfg.num_bins();
  std::vector<double> raw(bins);
  for (std::size_t f = 0; f < bins; ++f)
    raw[f] = lp_magnitude_response(
        lp, 2.0 * std::numbers::pi * static_cast<double>(f) / static_cast<double>(cfg.fft_size));
  const auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
  const double lo_raw = *mn, span = *mx - *mn;
  if (!std::isfinite(span)) throw InvalidArgument("mask_response: non-finite LP response");
  if (span <= 1e-12 * std::max(1.0, *mx)) {
    mask.degenerate = true;
    mask.weights.assign(bins, hi);
    return mask;
  }
  mask.weights.resize(bins);
  for (std::size_t f = 0; f < bins; ++f) {
    const double t = (raw[f] - lo_raw) / span;
    mask.weights[f] = (t >= 1.0) ? hi : lo + t * (hi - lo);
  }
  return mask;
}

// The mask row repeated along time.
inline RealMatrix build_weight_matrix(const SpectralMask& mask, std::size_t num_frames) {
  if (num_frames == 0) throw InvalidArgument("build_weight_matrix: need at least one frame");
  RealMatrix w(num_frames, mask.weights.size());
  for (std::size_t t = 0; t < num_frames; ++t)
    std::copy(mask.weights.begin(), mask.weights.end(), w.row(t).begin());
  return w;
}

// Everything needed to rebuild a mask row for any resolution.
struct MaskDesign {
  LpModel lp;
  double lo = kDefaultMaskLo;
  double hi = kDefaultMaskHi;

  SpectralMask row(const StftConfig& cfg) const { return mask_response(lp, cfg, lo, hi); }
};

// Contents of a mask file. Weight rows are never stored; they are recomputed
// per resolution from the coefficients, so one file serves every FFT size.
struct MaskFile {
  MaskDesign mask;
  int sample_rate = 24000;
};

}  // namespace specloss
