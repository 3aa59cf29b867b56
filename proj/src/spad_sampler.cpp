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

#include "spadsim/spad_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "spadsim/error.hpp"
#include "spadsim/parallel.hpp"

namespace spadsim {
namespace {

constexpr double kWindowSigmas = 8.0;
constexpr std::uint32_t kHeadStream = 0;
constexpr std::uint32_t kFloorStream = 1;
constexpr std::uint32_t kWindowStream = 2;
constexpr double kReferenceLimit = 1e6;

/// Failures before the first success of Bernoulli(p) trials, by inversion;
/// log1m_p = log(1 - p).
double geometric_gap(double u, double log1m_p) {
  if (log1m_p == 0.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(log1m_p)) return 0.0;
  return std::floor(std::log(u) / log1m_p);
}

}  // namespace

std::uint64_t Histogram::total() const {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

void Histogram::record(std::optional<long> bin) {
  ++n_frames;
  if (bin) {
    ++counts[static_cast<std::size_t>(*bin)];
  } else {
    ++n_empty;
  }
}

double PixelNoiseProfile::sigma_q_at(long col) const {
  if (cols <= 1) return start;
  const double f = static_cast<double>(col) / static_cast<double>(cols - 1);
  return std::max(0.0, start + (end - start) * f);
}

std::optional<long> sample_pulse(const BinProbabilityVector& probs, KeyedStream& rng) {
  for (std::size_t i = 0; i < probs.probs.size(); ++i) {
    if (rng.uniform() < probs.probs[i]) return static_cast<long>(i);
  }
  return std::nullopt;
}

PixelSampler::PixelSampler(const LikelihoodModel& model, long n_bins, double bin_width,
                           JitterSpec jitter)
    : model_(model), n_bins_(n_bins), bin_width_(bin_width), jitter_(jitter) {
  model_.validate();
  if (n_bins < 1 || !(bin_width > 0.0)) throw DomainError("need n_bins >= 1 and bin_width > 0");
  if (!(jitter.std >= 0.0) || !std::isfinite(jitter.mean)) {
    throw DomainError("jitter must have finite mean and std >= 0");
  }
  p0_ = std::clamp(bin_width * model_.floor_rate(), 0.0, 1.0);
  log1m_p0_ = std::log1p(-p0_);
  half_width_ = kWindowSigmas * model_.pulse.sigma;
  const double span = 2.0 * half_width_ / bin_width;
  whole_row_ = span + 1.0 >= static_cast<double>(n_bins);
  window_bins_ = whole_row_ ? n_bins : static_cast<long>(std::ceil(span)) + 1;

  const double peak_fraction =
      std::min(1.0, bin_width / (model_.pulse.sigma * std::sqrt(2.0 * std::numbers::pi)));
  bound_ = std::min(1.0, p0_ + model_.signal_ppp * peak_fraction);
  log1m_bound_ = std::log1p(-bound_);

  // u <= threshold means the geometric gap spans the whole region for any
  // window position, so the pulse is empty without drawing its jitter.
  floor_none_ = whole_row_ ? 2.0 : std::exp(static_cast<double>(n_bins) * log1m_p0_);
  window_none_ = std::exp(static_cast<double>(window_bins_) * log1m_bound_);
}

double PixelSampler::bin_probability(long bin, double shift) const {
  return std::clamp(bin_probability_raw(model_, bin, bin_width_, shift), 0.0, 1.0);
}

template <class Visit>
void PixelSampler::scan(const StreamAddress& at, std::uint32_t frame, std::uint32_t pulse,
                        double skew, bool first_only, Visit&& visit) const {
  KeyedStream head(at.seed, at.pixel, frame, pulse, kHeadStream);
  const double u_floor = head.uniform();
  const double u_window = head.uniform();
  const bool floor_possible = u_floor > floor_none_;
  const bool window_possible = u_window > window_none_;
  if (!floor_possible && !window_possible) return;

  double shift = skew + jitter_.mean;
  if (jitter_.std > 0.0) shift += jitter_.std * head.normal();

  Layout w;
  if (whole_row_) {
    w = {0, 0, n_bins_};
  } else {
    const double start = std::floor((model_.pulse.peak_time + shift - half_width_) / bin_width_);
    const double lo = std::clamp(start, -static_cast<double>(window_bins_) - 1.0,
                                 static_cast<double>(n_bins_) + 1.0);
    w.lo = static_cast<long>(lo);
    w.valid_lo = std::clamp(w.lo, 0L, n_bins_);
    w.valid_hi = std::clamp(w.lo + window_bins_, 0L, n_bins_);
  }
  const long inside = w.valid_hi - w.valid_lo;
  const double floor_size = static_cast<double>(n_bins_ - inside);
  auto floor_bin = [&](double x) {
    const long i = static_cast<long>(x);
    return i < w.valid_lo ? i : i + inside;
  };

  // Floor successes outside the window.
  long first_floor = n_bins_;
  if (floor_possible) {
    double x = geometric_gap(u_floor, log1m_p0_);
    if (x < floor_size) {
      first_floor = floor_bin(x);
      if (!first_only) {
        KeyedStream more(at.seed, at.pixel, frame, pulse, kFloorStream);
        while (x < floor_size) {
          visit(floor_bin(x));
          x += 1.0 + geometric_gap(more.uniform(), log1m_p0_);
        }
      }
    }
  }

  // Thinned candidates inside the window.
  if (window_possible) {
    KeyedStream cand(at.seed, at.pixel, frame, pulse, kWindowStream);
    const double limit = static_cast<double>(window_bins_);
    double l = geometric_gap(u_window, log1m_bound_);
    while (l < limit) {
      const long bin = w.lo + static_cast<long>(l);
      if (bin >= n_bins_) break;
      if (first_only && bin >= first_floor) break;
      if (bin >= 0 && cand.uniform() * bound_ < bin_probability(bin, shift)) {
        visit(bin);
        if (first_only) return;
      }
      l += 1.0 + geometric_gap(cand.uniform(), log1m_bound_);
    }
  }
  if (first_only && first_floor < n_bins_) visit(first_floor);
}

std::optional<long> PixelSampler::first_photon(const StreamAddress& at, std::uint32_t frame,
                                               std::uint32_t pulse, double skew) const {
  std::optional<long> out;
  scan(at, frame, pulse, skew, true, [&](long bin) { out = bin; });
  return out;
}

void PixelSampler::materialize(const StreamAddress& at, std::uint32_t frame,
                               std::uint32_t pulse, double skew,
                               std::span<std::uint8_t> row) const {
  if (row.size() != static_cast<std::size_t>(n_bins_)) throw DomainError("row size != n_bins");
  std::fill(row.begin(), row.end(), std::uint8_t{0});
  scan(at, frame, pulse, skew, false, [&](long bin) { row[static_cast<std::size_t>(bin)] = 1; });
}

std::optional<long> sample_frame(const PixelSampler& sampler, long pulses_per_frame,
                                 double skew, const StreamAddress& at, std::uint32_t frame) {
  if (pulses_per_frame < 1) throw DomainError("pulses_per_frame must be >= 1");
  for (long p = 0; p < pulses_per_frame; ++p) {
    if (auto bin = sampler.first_photon(at, frame, static_cast<std::uint32_t>(p), skew)) {
      return bin;
    }
  }
  return std::nullopt;
}

std::optional<long> sample_frame_reference(const PixelSampler& sampler, long pulses_per_frame,
                                           double skew, const StreamAddress& at,
                                           std::uint32_t frame) {
  if (pulses_per_frame < 1) throw DomainError("pulses_per_frame must be >= 1");
  const auto bins = static_cast<std::size_t>(sampler.n_bins());
  if (static_cast<double>(bins) * static_cast<double>(pulses_per_frame) > kReferenceLimit) {
    throw DomainError("reference sampler limited to bins * pulses <= 1e6");
  }
  std::vector<std::uint8_t> cube(bins * static_cast<std::size_t>(pulses_per_frame));
  for (long p = 0; p < pulses_per_frame; ++p) {
    sampler.materialize(at, frame, static_cast<std::uint32_t>(p), skew,
                        std::span(cube).subspan(static_cast<std::size_t>(p) * bins, bins));
  }
  const auto hit = std::find(cube.begin(), cube.end(), std::uint8_t{1});
  if (hit == cube.end()) return std::nullopt;
  return static_cast<long>(static_cast<std::size_t>(hit - cube.begin()) % bins);
}

double frame_skew(const StreamAddress& at, std::uint32_t frame, double sigma_q) {
  if (sigma_q == 0.0) return 0.0;
  KeyedStream rng(at.seed, at.pixel, frame, kSkewStream);
  return sigma_q * rng.normal();
}

Histogram build_histogram(const PixelSampler& sampler, long pulses_per_frame, long frames,
                          double sigma_q, const StreamAddress& at, std::uint32_t first_frame) {
  if (frames < 1) throw DomainError("frames must be >= 1");
  Histogram h(sampler.n_bins());
  for (long f = 0; f < frames; ++f) {
    const auto frame = first_frame + static_cast<std::uint32_t>(f);
    h.record(sample_frame(sampler, pulses_per_frame, frame_skew(at, frame, sigma_q), at, frame));
  }
  return h;
}

std::vector<std::optional<long>> sample_frames(const PixelSampler& sampler,
                                               long pulses_per_frame, long frames,
                                               double sigma_q, const StreamAddress& at) {
  if (frames < 1) throw DomainError("frames must be >= 1");
  std::vector<std::optional<long>> out(static_cast<std::size_t>(frames));
  for (long f = 0; f < frames; ++f) {
    const auto frame = static_cast<std::uint32_t>(f);
    out[static_cast<std::size_t>(f)] =
        sample_frame(sampler, pulses_per_frame, frame_skew(at, frame, sigma_q), at, frame);
  }
  return out;
}

void HistogramCube::validate() const {
  if (pixels.size() != rows * cols || status.size() != rows * cols) {
    throw DomainError("histogram cube pixel count does not match rows*cols");
  }
  if (acquisition.frames < 1) throw DomainError("histogram cube must hold at least one frame");
  for (const Histogram& h : pixels) {
    if (h.counts.size() != static_cast<std::size_t>(n_bins)) {
      throw DomainError("histogram bin count differs from cube n_bins");
    }
    if (h.n_frames != static_cast<std::uint64_t>(acquisition.frames)) {
      throw DomainError("histogram frame count differs from cube acquisition");
    }
    if (!h.conserved()) throw DomainError("histogram violates frame conservation");
  }
}

void for_each_pixel_histogram(
    const Scene& scene, const SystemConfig& config, const AcquisitionSpec& acq,
    std::uint64_t seed, int threads,
    const std::function<void(std::size_t, PixelStatus, Histogram&&)>& sink) {
  scene.validate();
  config.validate();
  acq.validate();
  const long pulses = std::lround(acq.pulses_per_frame());
  const PixelNoiseProfile skew{config.sensor.sigma_q_start, config.sensor.sigma_q_end,
                               static_cast<long>(scene.cols())};
  const JitterSpec jitter{config.laser.jitter_mean, config.laser.jitter_std};
  std::mutex sink_mutex;

  parallel_for(scene.range.size(), threads, [&](std::size_t i) {
    PixelStatus status = PixelStatus::kOk;
    Histogram h(config.sensor.n_bins);
    if (scene.no_return[i]) {
      status = PixelStatus::kNoReturn;
    } else {
      try {
        const LikelihoodModel model =
            make_likelihood(config.laser, config.atmosphere, config.optics, config.sensor,
                            {scene.range[i], scene.reflectivity[i]});
        const PixelSampler sampler(model, config.sensor.n_bins, config.sensor.bin_width, jitter);
        const long col = static_cast<long>(i % scene.cols());
        h = build_histogram(sampler, pulses, acq.frames, skew.sigma_q_at(col),
                            {seed, static_cast<std::uint32_t>(i)});
      } catch (const DomainError&) {
        status = PixelStatus::kInvalidInput;
      }
    }
    if (status != PixelStatus::kOk) {
      h.n_frames = h.n_empty = static_cast<std::uint64_t>(acq.frames);
    }
    std::lock_guard lock(sink_mutex);
    sink(i, status, std::move(h));
  }, 1);
}

HistogramCube simulate_histogram_cube(const Scene& scene, const SystemConfig& config,
                                      const AcquisitionSpec& acq, std::uint64_t seed,
                                      int threads) {
  HistogramCube cube;
  cube.rows = scene.rows();
  cube.cols = scene.cols();
  cube.n_bins = config.sensor.n_bins;
  cube.bin_width = config.sensor.bin_width;
  cube.gate_delay = config.sensor.gate_delay;
  cube.acquisition = acq;
  cube.pulses_per_frame = std::lround(acq.pulses_per_frame());
  cube.seed = seed;
  cube.config_digest = config_digest(config);
  cube.pixels.resize(scene.range.size());
  cube.status.resize(scene.range.size(), PixelStatus::kOk);
  for_each_pixel_histogram(scene, config, acq, seed, threads,
                           [&](std::size_t i, PixelStatus s, Histogram&& h) {
                             cube.pixels[i] = std::move(h);
                             cube.status[i] = s;
                           });
  return cube;
}

}  // namespace spadsim
