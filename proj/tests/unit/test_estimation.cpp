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

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "spadsim/constants.hpp"
#include "spadsim/error.hpp"
#include "spadsim/estimation.hpp"

namespace spadsim {
namespace {

constexpr double kBin = 50e-12;
const MatchFilterSpec kFilter{100e-12, 4.0, Refinement::kOff};

std::vector<std::uint32_t> counts_with(std::size_t n, std::vector<std::pair<std::size_t, std::uint32_t>> hits) {
  std::vector<std::uint32_t> c(n, 0);
  for (auto [i, v] : hits) c[i] = v;
  return c;
}

/// Gaussian peak plus uniform background, sampled by a plain RNG.
std::vector<std::uint32_t> synthetic(std::mt19937_64& gen, std::size_t bins, double mu, double sigma,
                                     int signal, int background) {
  std::vector<std::uint32_t> c(bins, 0);
  std::normal_distribution<double> peak(mu, sigma);
  std::uniform_real_distribution<double> flat(0.0, bins * kBin);
  for (int k = 0; k < signal; ++k) {
    const double t = peak(gen);
    if (t >= 0.0 && t < bins * kBin) ++c[static_cast<std::size_t>(t / kBin)];
  }
  for (int k = 0; k < background; ++k) ++c[static_cast<std::size_t>(flat(gen) / kBin)];
  return c;
}

TEST(MatchFilter, DeltaInput) {
  const auto c = counts_with(100, {{37, 1}});
  EXPECT_DOUBLE_EQ(match_filter_peak(c, kFilter, kBin), 37.5 * kBin);
}

TEST(MatchFilter, TiesGoToLowestIndex) {
  const auto c = counts_with(100, {{10, 4}, {20, 4}});
  EXPECT_DOUBLE_EQ(match_filter_peak(c, kFilter, kBin), 10.5 * kBin);
}

TEST(MatchFilter, EmptyHistogramRejected) {
  const std::vector<std::uint32_t> c(50, 0);
  EXPECT_THROW(match_filter_peak(c, kFilter, kBin), EmptyHistogramError);
}

TEST(MatchFilter, SpecInvariants) {
  EXPECT_THROW(match_filter_peak(counts_with(10, {{1, 1}}), {0.0, 4.0, Refinement::kOff}, kBin),
               DomainError);
  EXPECT_THROW(match_filter_peak(counts_with(10, {{1, 1}}), {1e-10, 2.0, Refinement::kOff}, kBin),
               DomainError);
}

TEST(MatchFilter, EdgeBinsUseAvailableSupport) {
  const auto c = counts_with(40, {{0, 3}, {39, 2}});
  EXPECT_DOUBLE_EQ(match_filter_peak(c, kFilter, kBin), 0.5 * kBin);
}

TEST(MatchFilter, ShiftCovariance) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto base = synthetic(gen, 400, 150 * kBin, 120e-12, 60, 30);
    for (std::size_t s : {1u, 7u, 50u}) {
      std::vector<std::uint32_t> shifted(400, 0);
      for (std::size_t i = 0; i + s < 400; ++i) shifted[i + s] = base[i];
      // Keep the tail that would fall off so the histograms match exactly.
      bool lost = false;
      for (std::size_t i = 400 - s; i < 400; ++i) lost = lost || base[i] != 0;
      if (lost) continue;
      EXPECT_NEAR(match_filter_peak(shifted, kFilter, kBin),
                  match_filter_peak(base, kFilter, kBin) + s * kBin, 1e-20);
    }
  }
}

TEST(MatchFilter, KernelWidthRobustness) {
  std::mt19937_64 gen(5);
  const double sigma = 150e-12;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = synthetic(gen, 300, 140.3 * kBin, sigma, 400, 0);
    const double ref = match_filter_peak(c, {sigma, 4.0, Refinement::kOff}, kBin);
    for (double w : {0.5, 0.8, 1.5, 2.0}) {
      EXPECT_LE(std::abs(match_filter_peak(c, {w * sigma, 4.0, Refinement::kOff}, kBin) - ref),
                kBin * 1.000001);
    }
  }
}

TEST(MatchFilter, ParabolicRefinementStaysInBin) {
  std::mt19937_64 gen(6);
  const auto c = synthetic(gen, 300, 140.3 * kBin, 150e-12, 2000, 0);
  const double coarse = match_filter_peak(c, {150e-12, 4.0, Refinement::kOff}, kBin);
  const double fine = match_filter_peak(c, {150e-12, 4.0, Refinement::kParabolic}, kBin);
  EXPECT_LE(std::abs(fine - coarse), 0.5 * kBin);
  EXPECT_LT(std::abs(fine - 140.3 * kBin), std::abs(coarse - 140.3 * kBin));
}

TEST(MatchFilter, UnbiasedOnGaussianPlusUniform) {
  std::mt19937_64 gen(8);
  const double sigma = 255e-12;
  const double mu = 2000.37 * kBin;
  const int n = 1000;
  std::vector<double> est;
  for (int k = 0; k < n; ++k) {
    const auto c = synthetic(gen, 4096, mu, sigma, 150, 40);
    est.push_back(match_filter_peak(c, {sigma, 4.0, Refinement::kParabolic}, kBin));
  }
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : est) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1)) / std::sqrt(double(n));
  EXPECT_LT(std::abs(mean - mu), 3.0 * se);
}

HistogramCube toy_cube(std::size_t rows, std::size_t cols) {
  HistogramCube cube;
  cube.rows = rows;
  cube.cols = cols;
  cube.n_bins = 64;
  cube.bin_width = kBin;
  cube.gate_delay = 1e-6;
  cube.acquisition = {5, 1e-6, 1e6};
  cube.pulses_per_frame = 1;
  cube.pixels.assign(rows * cols, Histogram(64));
  cube.status.assign(rows * cols, PixelStatus::kOk);
  for (Histogram& h : cube.pixels) h.n_frames = h.n_empty = 5;
  return cube;
}

TEST(DepthImage, AllEmptyCubeIsAllInvalid) {
  const DepthImage img = depth_image_from_cube(toy_cube(3, 4), kFilter);
  EXPECT_EQ(img.valid_count(), 0u);
  for (PixelStatus s : img.status.values()) EXPECT_EQ(s, PixelStatus::kEmptyHistogram);
}

TEST(DepthImage, SinglePixelReducesToPeak) {
  HistogramCube cube = toy_cube(1, 1);
  cube.pixels[0].counts[20] = 3;
  cube.pixels[0].counts[40] = 1;
  cube.pixels[0].n_empty = 1;
  const DepthImage img = depth_image_from_cube(cube, kFilter);
  ASSERT_TRUE(img.valid[0]);
  const double t = match_filter_peak(cube.pixels[0], kFilter, kBin);
  EXPECT_DOUBLE_EQ(img.depth[0], 0.5 * kLightSpeed * (t + 1e-6));
}

TEST(DepthImage, FlatSceneWithinBound) {
  SystemConfig c = testing::table1();
  c.laser.jitter_std = 0.0;
  c.sensor.sigma_q_start = c.sensor.sigma_q_end = 0.0;
  AcquisitionSpec acq = c.acquisition();
  acq.frames = 200;
  const Scene scene = Scene::uniform(4, 6, 14.73, 0.09);
  MatchFilterSpec f = default_match_filter(c);
  f.refinement = Refinement::kParabolic;
  const DepthImage img = depth_image_from_cube(simulate_histogram_cube(scene, c, acq, 4), f);
  const LikelihoodModel m = make_likelihood(c.laser, c.atmosphere, c.optics, c.sensor, *c.target);
  const double bound = time_to_depth(min_distinguishability(
      crb_sigma_star(fisher_per_pulse(m).info_per_pulse, total_alpha(m).value, acq).value));
  EXPECT_EQ(img.valid_count(), 24u);
  for (double d : img.depth.values()) EXPECT_LT(std::abs(d - 14.73), 3.0 * bound);
}

TEST(Sweep, Schedule) {
  EXPECT_EQ(sweep_schedule(1000, 100).front(), 10);
  EXPECT_EQ(sweep_schedule(1000, 100).back(), 1000);
  EXPECT_EQ(sweep_schedule(200, 10), (std::vector<long>{20, 40, 60, 80, 100, 120, 140, 160, 180, 200}));
  EXPECT_EQ(sweep_schedule(10, 3), (std::vector<long>{3, 6, 9}));
  EXPECT_THROW(sweep_schedule(5, 10), DomainError);
}

SweepSpec small_sweep(const SystemConfig& c) {
  SweepSpec s;
  s.total_frames = 60;
  s.increments = 3;
  s.repeats = 12;
  s.seed = 3;
  s.filter = default_match_filter(c);
  return s;
}

TEST(Sweep, CrbCurveScalesExactly) {
  const SystemConfig c = testing::table1();
  const SweepResult r = distinguishability_sweep(c, *c.target, small_sweep(c));
  AcquisitionSpec acq = c.acquisition();
  acq.frames = 1;
  const LikelihoodModel m = make_likelihood(c.laser, c.atmosphere, c.optics, c.sensor, *c.target);
  const double one = min_distinguishability(
      crb_sigma_star(fisher_per_pulse(m).info_per_pulse, total_alpha(m).value, acq).value);
  for (const CurvePoint& p : r.crb.points) {
    EXPECT_LT(testing::rel(p.value, one / std::sqrt(double(p.frames))), 1e-12);
  }
}

TEST(Sweep, OracleEstimatorGivesZero) {
  const SystemConfig c = testing::table1();
  const LikelihoodModel m = make_likelihood(c.laser, c.atmosphere, c.optics, c.sensor, *c.target);
  const SweepResult r = distinguishability_sweep(
      c, *c.target, small_sweep(c), [&](const Histogram&) { return m.pulse.peak_time; });
  for (const CurvePoint& p : r.histogram.points) {
    EXPECT_FALSE(p.ill_defined);
    EXPECT_LT(p.value, 1e-14 * m.pulse.peak_time);  // rounding in the mean only
  }
}

TEST(Sweep, IllDefinedWhenNothingDetected) {
  SystemConfig c = testing::table1();
  c.sensor.dark_rate = 0.0;
  c.target->reflectivity = 0.0;
  const SweepResult r = distinguishability_sweep(c, *c.target, small_sweep(c));
  for (const CurvePoint& p : r.histogram.points) {
    EXPECT_TRUE(p.ill_defined);
    EXPECT_EQ(p.n_valid, 0);
  }
}

TEST(Sweep, ThreadInvariant) {
  const SystemConfig c = testing::table1();
  const SweepResult a = distinguishability_sweep(c, *c.target, small_sweep(c), {}, 1);
  const SweepResult b = distinguishability_sweep(c, *c.target, small_sweep(c), {}, 3);
  for (std::size_t k = 0; k < a.histogram.points.size(); ++k) {
    EXPECT_EQ(a.histogram.points[k].value, b.histogram.points[k].value);
  }
}

TEST(Sweep, SlopeOfExactPowerLaw) {
  DistinguishabilityCurve c;
  for (long n : {10L, 20L, 40L, 80L}) c.points.push_back({n, 3.0 / std::sqrt(double(n)), 0, 2, 2, false});
  c.points.push_back({160, 0.0, 0, 2, 0, true});
  const SlopeFit f = loglog_slope(c);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_EQ(f.n_points, 4u);
}

DepthImage image_of(std::vector<double> depths) {
  DepthImage img(1, depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i) {
    img.depth[i] = depths[i];
    img.valid[i] = 1;
  }
  return img;
}

TEST(Distribution, UniformImageSingleBar) {
  const DepthDistribution d = depth_distribution(image_of({14.73, 14.73, 14.73}), 0.005);
  ASSERT_EQ(d.counts.size(), 1u);
  EXPECT_EQ(d.counts[0], 3u);
}

TEST(Distribution, TwoPlanesAreaRatio) {
  std::vector<double> v(30, 14.73);
  for (int i = 0; i < 10; ++i) v[i] = 14.60;
  const DepthDistribution d = depth_distribution(image_of(v), 0.01);
  std::vector<std::uint64_t> occupied;
  for (auto c : d.counts) {
    if (c) occupied.push_back(c);
  }
  EXPECT_EQ(occupied, (std::vector<std::uint64_t>{10, 20}));
}

TEST(Distribution, ResolutionTargetModes) {
  const ResolutionTarget t = make_resolution_target();
  DepthImage img(t.scene.rows(), t.scene.cols());
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    img.depth[i] = t.scene.range[i];
    img.valid[i] = 1;
  }
  const DepthDistribution d = depth_distribution(img, 0.005, 14.60, 30);
  for (std::size_t k = 0; k < t.post_heights.size(); ++k) {
    const double face = 14.73 - t.post_heights[k];
    const auto bar = static_cast<std::size_t>((face - 14.60) / 0.005);
    EXPECT_EQ(d.counts[bar], t.post_pixels[k].size()) << "post " << k;
    EXPECT_GT(t.post_pixels[k].size(), 3u);
  }
}

TEST(Distribution, ExplicitRangeCountsOutside) {
  const DepthDistribution d = depth_distribution(image_of({1.0, 2.0, 3.0}), 1.0, 1.5, 1);
  EXPECT_EQ(d.counts[0], 1u);
  EXPECT_EQ(d.outside, 2u);
}

TEST(BarAccuracy, Definition) {
  DepthDistribution a{0.0, 1.0, {10, 0}, 0};
  DepthDistribution b{0.0, 1.0, {5, 0}, 0};
  const BarAccuracy r = per_bar_accuracy(a, b);
  EXPECT_EQ(r.per_bar, (std::vector<double>{0.5, 1.0}));
  EXPECT_DOUBLE_EQ(r.median, 0.75);
  EXPECT_DOUBLE_EQ(per_bar_accuracy(a, a).median, 1.0);
  DepthDistribution c{0.5, 1.0, {5, 0}, 0};
  EXPECT_THROW(per_bar_accuracy(a, c), DomainError);
}

TEST(Separation, FarAndNearGroups) {
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(10.0 + 0.001 * (i % 5));
  for (int i = 0; i < 50; ++i) v.push_back(10.1 + 0.001 * (i % 5));
  const DepthImage img = image_of(v);
  std::vector<std::size_t> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 50);
  EXPECT_TRUE(separation_test(img, a, b).separated());
  std::vector<std::size_t> mixed;
  for (std::size_t i = 0; i < 100; i += 2) mixed.push_back(i);
  EXPECT_FALSE(separation_test(img, a, mixed).separated());
}

}  // namespace
}  // namespace spadsim
