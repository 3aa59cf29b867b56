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
#include <optional>
#include <span>
#include <vector>

#include "spadsim/config.hpp"
#include "spadsim/fisher.hpp"
#include "spadsim/likelihood.hpp"
#include "spadsim/rng.hpp"
#include "spadsim/scene.hpp"

namespace spadsim {

/// Photon counts accumulated over frames. Each frame contributes at most
/// one count (the first photon), or is empty.
struct Histogram {
  std::vector<std::uint32_t> counts;
  std::uint64_t n_frames = 0;
  std::uint64_t n_empty = 0;

  Histogram() = default;
  explicit Histogram(long n_bins) : counts(static_cast<std::size_t>(n_bins), 0) {}

  std::uint64_t total() const;
  bool conserved() const { return total() + n_empty == n_frames; }
  void record(std::optional<long> bin);
  bool operator==(const Histogram&) const = default;
};

struct JitterSpec {
  double mean = 0.0;  // mu_j, s
  double std = 0.0;   // sigma_j, s
};

/// Inter-pixel trigger skew: standard deviation varies linearly from the
/// first to the last column.
struct PixelNoiseProfile {
  double start = 0.0;
  double end = 0.0;
  long cols = 1;

  double sigma_q_at(long col) const;
};

/// Addresses the random draws of one pixel.
struct StreamAddress {
  std::uint64_t seed = 0;
  std::uint32_t pixel = 0;
};

/// Draws one Bernoulli trial per bin, in bin order, and returns the first
/// success (0-based). Stops at the first success; later bins are never
/// observed.
std::optional<long> sample_pulse(const BinProbabilityVector& probs, KeyedStream& rng);

/// Per-pixel first-photon sampler.
///
/// For one pulse, bins outside peak +- 8 sigma' share the constant floor
/// probability p0 = w * (C_dc + C_bckg); their Bernoulli successes are
/// generated as geometric gaps. Inside the window, candidates are generated
/// the same way at an upper-bound probability and thinned to the exact
/// erf-based bin probability. This is the same per-bin Bernoulli process
/// at a cost independent of the number of bins.
///
/// Every draw is keyed by (seed, pixel, frame, pulse, substream), so the
/// streaming and materialising paths see identical variates.
class PixelSampler {
 public:
  PixelSampler(const LikelihoodModel& model, long n_bins, double bin_width, JitterSpec jitter);

  /// First photon of one pulse whose response is displaced by j + skew.
  std::optional<long> first_photon(const StreamAddress& at, std::uint32_t frame,
                                   std::uint32_t pulse, double skew) const;

  /// Writes every success of one pulse into `row` (size n_bins).
  void materialize(const StreamAddress& at, std::uint32_t frame, std::uint32_t pulse,
                   double skew, std::span<std::uint8_t> row) const;

  long n_bins() const { return n_bins_; }
  double bin_width() const { return bin_width_; }
  double floor_probability() const { return p0_; }
  const LikelihoodModel& model() const { return model_; }

 private:
  struct Layout {
    long lo = 0;         // first bin of the window (may be negative)
    long valid_lo = 0;   // window clipped to [0, n_bins)
    long valid_hi = 0;
  };
  template <class Visit>
  void scan(const StreamAddress& at, std::uint32_t frame, std::uint32_t pulse, double skew,
            bool first_only, Visit&& visit) const;
  double bin_probability(long bin, double shift) const;

  LikelihoodModel model_;
  long n_bins_;
  double bin_width_;
  JitterSpec jitter_;
  double p0_;
  double log1m_p0_;
  double half_width_;
  long window_bins_;
  bool whole_row_;
  double bound_;
  double log1m_bound_;
  double floor_none_;
  double window_none_;
};

/// One frame: pulses in order, each with fresh jitter, until the first
/// photon. `skew` is the frame's inter-pixel offset k.
std::optional<long> sample_frame(const PixelSampler& sampler, long pulses_per_frame,
                                 double skew, const StreamAddress& at, std::uint32_t frame);

/// Same frame built the literal way: the full bins x pulses Bernoulli
/// matrix is populated, then scanned for its first non-zero entry.
/// Test-scale only (bins * pulses <= 1e6).
std::optional<long> sample_frame_reference(const PixelSampler& sampler, long pulses_per_frame,
                                           double skew, const StreamAddress& at,
                                           std::uint32_t frame);

/// Frame skew k ~ Normal(0, sigma_q), keyed per (pixel, frame).
double frame_skew(const StreamAddress& at, std::uint32_t frame, double sigma_q);

/// Accumulates `frames` independent frames, starting at frame index
/// `first_frame`.
Histogram build_histogram(const PixelSampler& sampler, long pulses_per_frame, long frames,
                          double sigma_q, const StreamAddress& at, std::uint32_t first_frame = 0);

/// First-photon bin of each of `frames` frames (nullopt for empty frames).
std::vector<std::optional<long>> sample_frames(const PixelSampler& sampler,
                                               long pulses_per_frame, long frames,
                                               double sigma_q, const StreamAddress& at);

struct HistogramCube {
  std::size_t rows = 0;
  std::size_t cols = 0;
  long n_bins = 0;
  double bin_width = 0.0;
  double gate_delay = 0.0;
  AcquisitionSpec acquisition;
  long pulses_per_frame = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
  std::vector<Histogram> pixels;     // row-major
  std::vector<PixelStatus> status;   // row-major

  const Histogram& at(std::size_t row, std::size_t col) const { return pixels[row * cols + col]; }
  void validate() const;
  bool operator==(const HistogramCube&) const = default;
};

/// Simulates every pixel of the scene, handing each finished histogram to
/// `sink(pixel_index, status, histogram)`. Output is identical for any
/// thread count; sink calls are serialised but arrive in arbitrary order.
void for_each_pixel_histogram(
    const Scene& scene, const SystemConfig& config, const AcquisitionSpec& acq,
    std::uint64_t seed, int threads,
    const std::function<void(std::size_t, PixelStatus, Histogram&&)>& sink);

HistogramCube simulate_histogram_cube(const Scene& scene, const SystemConfig& config,
                                      const AcquisitionSpec& acq, std::uint64_t seed,
                                      int threads = 1);

}  // namespace spadsim
