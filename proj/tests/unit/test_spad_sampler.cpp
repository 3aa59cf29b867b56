/*
 * Copyright 2026 The spadsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "spadsim/error.hpp"
#include "spadsim/spad_sampler.hpp"

namespace spadsim {
namespace {

constexpr double kBin = 50e-12;

LikelihoodModel toy_model(long bins, double sigma, double peak_bins, double floor_p, double ppp) {
  LikelihoodModel m;
  m.window = bins * kBin;
  m.dark_rate = floor_p / kBin;
  m.signal_ppp = ppp;
  m.pulse = {peak_bins * kBin, sigma};
  return m;
}

/// Frame-level first-photon distribution, brute force: per-bin success
/// probabilities aggregated over the pulses of a frame. Last entry: empty.
std::vector<double> brute_force_q(const LikelihoodModel& m, long bins, long pulses) {
  const BinProbabilityVector p = bin_probabilities(m, bins, kBin);
  std::vector<double> q(static_cast<std::size_t>(bins) + 1, 0.0);
  double none_before = 1.0;
  for (long k = 0; k < pulses; ++k) {
    for (long i = 0; i < bins; ++i) {
      q[static_cast<std::size_t>(i)] += none_before * p.probs[static_cast<std::size_t>(i)];
      none_before *= 1.0 - p.probs[static_cast<std::size_t>(i)];
    }
  }
  q.back() = none_before;
  return q;
}

double chi_square_p(const std::vector<double>& expected_prob, const std::vector<double>& observed,
                    double n) {
  double chi = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_prob[i] * n;
    if (e < 5.0) continue;
    chi += (observed[i] - e) * (observed[i] - e) / e;
    ++dof;
  }
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi));
}

std::vector<double> observe(const PixelSampler& s, long pulses, long frames, std::uint64_t seed) {
  std::vector<double> obs(static_cast<std::size_t>(s.n_bins()) + 1, 0.0);
  for (const auto& b : sample_frames(s, pulses, frames, 0.0, {seed, 0})) {
    obs[b ? static_cast<std::size_t>(*b) : obs.size() - 1] += 1.0;
  }
  return obs;
}

TEST(SpadSampler, WindowedMatchesBruteForce) {
  const LikelihoodModel m = toy_model(64, 30e-12, 30.3, 0.002, 0.05);
  const PixelSampler s(m, 64, kBin, {});
  const long frames = 100000;
  const auto q = brute_force_q(m, 64, 10);
  EXPECT_GT(chi_square_p(q, observe(s, 10, frames, 1), frames), 0.001);
}

TEST(SpadSampler, WholeRowMatchesBruteForce) {
  const LikelihoodModel m = toy_model(16, 120e-12, 7.6, 0.01, 0.08);
  const PixelSampler s(m, 16, kBin, {});
  const long frames = 100000;
  const auto q = brute_force_q(m, 16, 10);
  EXPECT_GT(chi_square_p(q, observe(s, 10, frames, 2), frames), 0.001);
}

TEST(SpadSampler, StreamingEqualsReference) {
  struct Case {
    LikelihoodModel m;
    long bins;
    JitterSpec jitter;
    double skew;
  };
  const Case cases[] = {
      {toy_model(64, 30e-12, 30.0, 0.002, 0.05), 64, {0.0, 0.0}, 0.0},
      {toy_model(64, 30e-12, 30.0, 0.002, 0.05), 64, {20e-12, 60e-12}, 45e-12},
      {toy_model(16, 120e-12, 7.6, 0.01, 0.3), 16, {0.0, 100e-12}, -30e-12},
      {toy_model(128, 40e-12, 1.0, 0.0005, 0.6), 128, {0.0, 80e-12}, 0.0},   // peak on the edge
      {toy_model(128, 40e-12, 127.5, 0.05, 0.9), 128, {0.0, 80e-12}, 0.0},   // heavy floor
      {toy_model(96, 40e-12, 200.0, 0.001, 0.5), 96, {0.0, 0.0}, 0.0},       // peak outside
      {toy_model(64, 30e-12, 30.0, 0.0, 0.0), 64, {0.0, 0.0}, 0.0},          // nothing at all
  };
  int nonempty = 0;
  for (std::size_t c = 0; c < std::size(cases); ++c) {
    const PixelSampler s(cases[c].m, cases[c].bins, kBin, cases[c].jitter);
    for (std::uint32_t f = 0; f < 400; ++f) {
      const StreamAddress at{99, static_cast<std::uint32_t>(c)};
      const auto fast = sample_frame(s, 10, cases[c].skew, at, f);
      const auto ref = sample_frame_reference(s, 10, cases[c].skew, at, f);
      ASSERT_EQ(fast, ref) << "case " << c << " frame " << f;
      nonempty += fast.has_value();
    }
  }
  EXPECT_GT(nonempty, 1000);
}

TEST(SpadSampler, MaterializedRowsFollowBinProbabilities) {
  // Every success of a pulse, not just the first, has the per-bin rate.
  const LikelihoodModel m = toy_model(64, 30e-12, 30.3, 0.01, 0.7);
  const PixelSampler s(m, 64, kBin, {});
  const BinProbabilityVector p = bin_probabilities(m, 64, kBin);
  std::vector<double> hits(64, 0.0);
  std::vector<std::uint8_t> row(64);
  const int pulses = 100000;
  for (int k = 0; k < pulses; ++k) {
    s.materialize({3, 0}, 0, static_cast<std::uint32_t>(k), 0.0, row);
    for (int i = 0; i < 64; ++i) hits[i] += row[i];
  }
  for (int i = 0; i < 64; ++i) {
    const double e = p.probs[i] * pulses;
    EXPECT_NEAR(hits[i], e, 5.0 * std::sqrt(e) + 1.0) << "bin " << i;
  }
}

TEST(SpadSampler, MatchesNaivePerBinSamplerWithJitter) {
  // Test-only sampler: fresh jitter, full bin vector, one Bernoulli per bin.
  const LikelihoodModel m = toy_model(48, 35e-12, 24.0, 0.003, 0.2);
  const JitterSpec jitter{10e-12, 50e-12};
  const long pulses = 5;
  const long frames = 60000;
  std::mt19937_64 gen(123);
  std::normal_distribution<double> jit(jitter.mean, jitter.std);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> naive(49, 0.0);
  for (long f = 0; f < frames; ++f) {
    std::optional<long> hit;
    for (long k = 0; k < pulses && !hit; ++k) {
      const BinProbabilityVector p = bin_probabilities(m, 48, kBin, jit(gen));
      for (long i = 0; i < 48 && !hit; ++i) {
        if (uni(gen) < p.probs[static_cast<std::size_t>(i)]) hit = i;
      }
    }
    naive[hit ? static_cast<std::size_t>(*hit) : 48] += 1.0;
  }
  const PixelSampler s(m, 48, kBin, jitter);
  const std::vector<double> fast = observe(s, pulses, frames, 4);
  // Two-sample chi-square on bins with enough support.
  double chi = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < naive.size(); ++i) {
    const double t = naive[i] + fast[i];
    if (t < 10.0) continue;
    chi += (naive[i] - fast[i]) * (naive[i] - fast[i]) / t;
    ++dof;
  }
  EXPECT_GT(boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi)), 0.001);
}

TEST(SpadSampler, NonEmptyFrameProbabilityIsExactSuccess) {
  // alpha ~ 0.05 per pulse. The exact per-pulse success is 1 - prod(1 - p_i);
  // the alpha-based 1 - (1 - alpha)^n slightly overstates it.
  const LikelihoodModel m = toy_model(64, 30e-12, 30.0, 0.0002, 0.0372);
  const BinProbabilityVector p = bin_probabilities(m, 64, kBin);
  double none = 1.0;
  for (double x : p.probs) none *= 1.0 - x;
  const long pulses = 10;
  const double want = 1.0 - std::pow(none, pulses);
  const PixelSampler s(m, 64, kBin, {});
  const long frames = 200000;
  const auto obs = observe(s, pulses, frames, 8);
  const double got = 1.0 - obs.back() / frames;
  EXPECT_NEAR(got, want, 3.0 * std::sqrt(want * (1.0 - want) / frames));

  // Small alpha: the closed form is accurate.
  const LikelihoodModel weak = toy_model(64, 30e-12, 30.0, 0.00002, 0.002);
  const double alpha = total_alpha(weak).value;
  const PixelSampler ws(weak, 64, kBin, {});
  const auto wobs = observe(ws, pulses, frames, 9);
  const double closed = 1.0 - std::pow(1.0 - alpha, pulses);
  EXPECT_NEAR(1.0 - wobs.back() / frames, closed, 3.0 * std::sqrt(closed / frames));
}

TEST(SpadSampler, SamplePulseFirstSuccess) {
  KeyedStream rng(1, 0, 0, 0);
  EXPECT_EQ(sample_pulse({{0.0, 1.0, 1.0}, false}, rng), 1);
  EXPECT_EQ(sample_pulse({{0.0, 0.0, 0.0}, false}, rng), std::nullopt);
  const BinProbabilityVector p{{0.2, 0.5, 0.3}, false};
  std::vector<double> obs(4, 0.0);
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    KeyedStream r(2, 0, 0, static_cast<std::uint32_t>(k));
    const auto b = sample_pulse(p, r);
    obs[b ? static_cast<std::size_t>(*b) : 3] += 1.0;
  }
  const std::vector<double> q{0.2, 0.8 * 0.5, 0.4 * 0.3, 0.4 * 0.7};
  EXPECT_GT(chi_square_p(q, obs, n), 0.001);
}

TEST(SpadSampler, HistogramConservesFrames) {
  const LikelihoodModel m = toy_model(64, 30e-12, 30.0, 0.002, 0.05);
  const PixelSampler s(m, 64, kBin, {0.0, 20e-12});
  for (long frames : {1L, 7L, 500L}) {
    const Histogram h = build_histogram(s, 10, frames, 40e-12, {1, 2});
    EXPECT_EQ(h.n_frames, static_cast<std::uint64_t>(frames));
    EXPECT_TRUE(h.conserved());
  }
  EXPECT_THROW(build_histogram(s, 10, 0, 0.0, {1, 2}), DomainError);
}

TEST(SpadSampler, HistogramFramesAreAddressable) {
  const LikelihoodModel m = toy_model(64, 30e-12, 30.0, 0.002, 0.05);
  const PixelSampler s(m, 64, kBin, {0.0, 20e-12});
  const Histogram all = build_histogram(s, 10, 300, 40e-12, {5, 1});
  Histogram parts = build_histogram(s, 10, 100, 40e-12, {5, 1});
  const Histogram rest = build_histogram(s, 10, 200, 40e-12, {5, 1}, 100);
  for (std::size_t i = 0; i < parts.counts.size(); ++i) parts.counts[i] += rest.counts[i];
  parts.n_frames += rest.n_frames;
  parts.n_empty += rest.n_empty;
  EXPECT_EQ(parts, all);
}

TEST(SpadSampler, SkewProfileAndDraws) {
  const PixelNoiseProfile prof{41e-12, 166e-12, 192};
  EXPECT_DOUBLE_EQ(prof.sigma_q_at(0), 41e-12);
  EXPECT_DOUBLE_EQ(prof.sigma_q_at(191), 166e-12);
  EXPECT_NEAR(prof.sigma_q_at(95), 41e-12 + 125e-12 * 95.0 / 191.0, 1e-20);
  EXPECT_EQ(frame_skew({1, 1}, 0, 0.0), 0.0);
  double m2 = 0.0;
  const int n = 50000;
  for (int f = 0; f < n; ++f) {
    const double k = frame_skew({1, 1}, static_cast<std::uint32_t>(f), 100e-12);
    m2 += k * k;
  }
  EXPECT_NEAR(std::sqrt(m2 / n), 100e-12, 2e-12);
}

TEST(SpadSampler, ReferenceSizeGuard) {
  const LikelihoodModel m = toy_model(4096, 100e-12, 2000.0, 0.0, 0.01);
  const PixelSampler s(m, 4096, kBin, {});
  EXPECT_THROW(sample_frame_reference(s, 2250, 0.0, {1, 1}, 0), DomainError);
}

TEST(SpadSampler, CubeIsThreadInvariantAndConserved) {
  SystemConfig c = testing::table1();
  Scene scene = Scene::uniform(4, 4, 14.73, 0.09);
  scene.no_return[5] = 1;
  scene.range[6] = 14.70;
  AcquisitionSpec acq = c.acquisition();
  acq.frames = 30;
  const HistogramCube a = simulate_histogram_cube(scene, c, acq, 17, 1);
  const HistogramCube b = simulate_histogram_cube(scene, c, acq, 17, 3);
  EXPECT_EQ(a, b);
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(a.status[5], PixelStatus::kNoReturn);
  EXPECT_EQ(a.pixels[5].n_empty, 30u);
  std::uint64_t counted = 0;
  for (const Histogram& h : a.pixels) {
    EXPECT_TRUE(h.conserved());
    counted += h.total();
  }
  EXPECT_GT(counted, 0u);
  const HistogramCube other = simulate_histogram_cube(scene, c, acq, 18, 1);
  EXPECT_NE(a.pixels, other.pixels);
}

}  // namespace
}  // namespace spadsim
