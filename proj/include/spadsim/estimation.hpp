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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spadsim/config.hpp"
#include "spadsim/scene.hpp"
#include "spadsim/spad_sampler.hpp"

namespace spadsim {

enum class Refinement : std::uint8_t { kOff, kParabolic };

struct MatchFilterSpec {
  double kernel_sigma = 0.0;  // s
  double truncation = 4.0;    // kernel support, multiples of kernel_sigma
  Refinement refinement = Refinement::kOff;

  void validate() const;
};

/// Kernel width equal to the configured pulse sigma'.
MatchFilterSpec default_match_filter(const SystemConfig& config);

/// Cross-correlates counts with a Gaussian kernel sampled at bin centres
/// (truncated, no wraparound) and returns the centre time of the highest
/// response, lowest index on ties. Parabolic refinement moves the estimate
/// within +-half a bin. Throws EmptyHistogramError when no counts.
double match_filter_peak(std::span<const std::uint32_t> counts, const MatchFilterSpec& spec,
                         double bin_width);
double match_filter_peak(const Histogram& hist, const MatchFilterSpec& spec, double bin_width);

/// Per-pixel estimate converted to depth, c (t + gate_delay) / 2.
DepthImage depth_image_from_cube(const HistogramCube& cube, const MatchFilterSpec& spec);

struct CurvePoint {
  long frames = 0;            // N
  double value = 0.0;         // distinguishability, s
  double std_error = 0.0;     // s
  long n_repeats = 0;
  long n_valid = 0;           // repeats with a non-empty histogram
  bool ill_defined = false;   // fewer than two usable repeats
};

struct DistinguishabilityCurve {
  SimulationMode mode = SimulationMode::kHistogram;
  std::vector<CurvePoint> points;
};

struct SweepSpec {
  long total_frames = 1000;
  long increments = 100;
  long repeats = 100;
  MatchFilterSpec filter;
  std::uint64_t seed = 0;
};

/// Linear schedule total/increments, 2 total/increments, ..., total.
/// Throws if increments exceeds total.
std::vector<long> sweep_schedule(long total_frames, long increments);

/// Replaces the match filter in a sweep; receives the accumulated histogram.
using PeakEstimator = std::function<double(const Histogram&)>;

struct SweepResult {
  DistinguishabilityCurve histogram;
  DistinguishabilityCurve crb;
};

/// Single-pixel distinguishability versus frames summed. Each repeat is an
/// independent run of total_frames frames; the estimate at N uses its first
/// N frames. Skew is not applied (single pixel, k = 0).
SweepResult distinguishability_sweep(const SystemConfig& config, const TargetPatch& target,
                                     const SweepSpec& spec, const PeakEstimator& estimator = {},
                                     int threads = 1);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;
};

/// Least-squares line through (log N, log value) of the well-defined points.
SlopeFit loglog_slope(const DistinguishabilityCurve& curve);

/// Pixel counts per depth bar. Bar i covers [origin + i w, origin + (i+1) w).
struct DepthDistribution {
  double origin = 0.0;     // m
  double bin_width = 0.0;  // m
  std::vector<std::uint64_t> counts;
  std::uint64_t outside = 0;  // valid pixels beyond an explicit range

  double bar_center(std::size_t i) const {
    return origin + (static_cast<double>(i) + 0.5) * bin_width;
  }
};

/// Range spans the valid depths; origin aligned to a multiple of bin_width.
DepthDistribution depth_distribution(const DepthImage& image, double bin_width);
/// Explicit binning, so that two images can be compared bar by bar.
DepthDistribution depth_distribution(const DepthImage& image, double bin_width, double origin,
                                     std::size_t n_bars);

struct BarAccuracy {
  std::vector<double> per_bar;  // min/max, 1.0 where both bars are empty
  double median = 0.0;
};

BarAccuracy per_bar_accuracy(const DepthDistribution& a, const DepthDistribution& b);

/// Whether two pixel groups are one FWHM apart: |mean_a - mean_b| against
/// 2 sqrt(2 ln 2) times the pooled standard deviation of their depths.
struct Separation {
  double mean_difference = 0.0;  // m
  double fwhm = 0.0;             // m
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  bool separated() const { return mean_difference >= fwhm; }
};

Separation separation_test(const DepthImage& image, std::span<const std::size_t> group_a,
                           std::span<const std::size_t> group_b);

}  // namespace spadsim
