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

#include "spadsim/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spadsim/constants.hpp"
#include "spadsim/error.hpp"
#include "spadsim/fisher.hpp"
#include "spadsim/likelihood.hpp"
#include "spadsim/parallel.hpp"

namespace spadsim {

void MatchFilterSpec::validate() const {
  if (!(kernel_sigma > 0.0) || !std::isfinite(kernel_sigma)) {
    throw DomainError("match filter kernel_sigma must be > 0");
  }
  if (!(truncation >= 3.0)) throw DomainError("match filter truncation must be >= 3 sigma");
}

MatchFilterSpec default_match_filter(const SystemConfig& config) {
  return {sigma_from_fwhm(config.laser.pulse_fwhm), 4.0, Refinement::kOff};
}

double match_filter_peak(std::span<const std::uint32_t> counts, const MatchFilterSpec& spec,
                         double bin_width) {
  spec.validate();
  if (!(bin_width > 0.0)) throw DomainError("bin_width must be > 0");
  const long n = static_cast<long>(counts.size());

  const long half = static_cast<long>(std::floor(spec.truncation * spec.kernel_sigma / bin_width));
  std::vector<double> kernel(static_cast<std::size_t>(half) + 1);
  for (long d = 0; d <= half; ++d) {
    const double z = static_cast<double>(d) * bin_width / spec.kernel_sigma;
    kernel[static_cast<std::size_t>(d)] = std::exp(-0.5 * z * z);
  }

  // Scatter each occupied bin into its neighbours; histograms are sparse.
  std::vector<double> response(counts.size(), 0.0);
  bool any = false;
  for (long j = 0; j < n; ++j) {
    const std::uint32_t c = counts[static_cast<std::size_t>(j)];
    if (c == 0) continue;
    any = true;
    const long lo = std::max(0L, j - half);
    const long hi = std::min(n - 1, j + half);
    for (long i = lo; i <= hi; ++i) {
      response[static_cast<std::size_t>(i)] +=
          kernel[static_cast<std::size_t>(std::abs(i - j))] * static_cast<double>(c);
    }
  }
  if (!any) throw EmptyHistogramError("histogram is empty; no depth estimate");

  std::size_t best = 0;
  for (std::size_t i = 1; i < response.size(); ++i) {
    if (response[i] > response[best]) best = i;
  }

  double offset = 0.0;
  if (spec.refinement == Refinement::kParabolic && best > 0 && best + 1 < response.size()) {
    const double ym = response[best - 1];
    const double y0 = response[best];
    const double yp = response[best + 1];
    const double curvature = ym - 2.0 * y0 + yp;
    if (curvature < 0.0) offset = std::clamp(0.5 * (ym - yp) / curvature, -0.5, 0.5);
  }
  return (static_cast<double>(best) + 0.5 + offset) * bin_width;
}

double match_filter_peak(const Histogram& hist, const MatchFilterSpec& spec, double bin_width) {
  return match_filter_peak(std::span<const std::uint32_t>(hist.counts), spec, bin_width);
}

DepthImage depth_image_from_cube(const HistogramCube& cube, const MatchFilterSpec& spec) {
  cube.validate();
  spec.validate();
  DepthImage img(cube.rows, cube.cols);
  img.provenance = {SimulationMode::kHistogram, cube.seed, cube.config_digest, 0};
  for (std::size_t i = 0; i < cube.pixels.size(); ++i) {
    if (cube.status[i] != PixelStatus::kOk) {
      img.status[i] = cube.status[i];
      continue;
    }
    if (cube.pixels[i].total() == 0) {
      img.status[i] = PixelStatus::kEmptyHistogram;
      continue;
    }
    const double t = match_filter_peak(cube.pixels[i], spec, cube.bin_width);
    img.depth[i] = time_to_depth(t + cube.gate_delay);
    img.valid[i] = 1;
  }
  return img;
}

std::vector<long> sweep_schedule(long total_frames, long increments) {
  if (total_frames < 1 || increments < 1) {
    throw DomainError("sweep needs total_frames >= 1 and increments >= 1");
  }
  if (increments > total_frames) throw DomainError("more increments than frames");
  const long step = total_frames / increments;
  std::vector<long> out;
  out.reserve(static_cast<std::size_t>(increments));
  for (long k = 1; k <= increments; ++k) out.push_back(k * step);
  return out;
}

SweepResult distinguishability_sweep(const SystemConfig& config, const TargetPatch& target,
                                     const SweepSpec& spec, const PeakEstimator& estimator,
                                     int threads) {
  config.validate();
  spec.filter.validate();
  if (spec.repeats < 2) throw DomainError("sweep needs at least 2 repeats");
  const std::vector<long> schedule = sweep_schedule(spec.total_frames, spec.increments);

  const LikelihoodModel model =
      make_likelihood(config.laser, config.atmosphere, config.optics, config.sensor, target);
  const PixelSampler sampler(model, config.sensor.n_bins, config.sensor.bin_width,
                             {config.laser.jitter_mean, config.laser.jitter_std});
  const long pulses = config.pulses_per_frame();
  const double bin_width = config.sensor.bin_width;
  const auto estimate = [&](const Histogram& h) {
    return estimator ? estimator(h) : match_filter_peak(h, spec.filter, bin_width);
  };

  // estimates[r][k]: repeat r, schedule point k; NaN when still empty.
  const std::size_t n_points = schedule.size();
  std::vector<double> estimates(static_cast<std::size_t>(spec.repeats) * n_points);
  parallel_for(static_cast<std::size_t>(spec.repeats), threads, [&](std::size_t r) {
    const StreamAddress at{spec.seed, static_cast<std::uint32_t>(r)};
    const auto frames = sample_frames(sampler, pulses, spec.total_frames, 0.0, at);
    Histogram h(config.sensor.n_bins);
    long done = 0;
    for (std::size_t k = 0; k < n_points; ++k) {
      for (; done < schedule[k]; ++done) h.record(frames[static_cast<std::size_t>(done)]);
      estimates[r * n_points + k] =
          h.total() > 0 ? estimate(h) : std::numeric_limits<double>::quiet_NaN();
    }
  }, 1);

  SweepResult out;
  out.histogram.mode = SimulationMode::kHistogram;
  out.crb.mode = SimulationMode::kCrb;
  const double alpha = total_alpha(model, config.tolerances.edge_sigma_guard).value;
  const double info = fisher_per_pulse(model, config.fisher_options()).info_per_pulse;

  for (std::size_t k = 0; k < n_points; ++k) {
    std::vector<double> xs;
    for (long r = 0; r < spec.repeats; ++r) {
      const double x = estimates[static_cast<std::size_t>(r) * n_points + k];
      if (!std::isnan(x)) xs.push_back(x);
    }
    CurvePoint p;
    p.frames = schedule[k];
    p.n_repeats = spec.repeats;
    p.n_valid = static_cast<long>(xs.size());
    if (xs.size() < 2) {
      p.ill_defined = true;
    } else {
      const double n = static_cast<double>(xs.size());
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      const double sd = std::sqrt(ss / (n - 1.0));
      p.value = min_distinguishability(sd);
      p.std_error = p.value / std::sqrt(2.0 * (n - 1.0));
    }
    out.histogram.points.push_back(p);

    AcquisitionSpec acq = config.acquisition();
    acq.frames = schedule[k];
    const CrbBound bound = crb_sigma_star(info, alpha, acq);
    CurvePoint c;
    c.frames = schedule[k];
    c.ill_defined = !bound.estimable();
    c.value = bound.estimable() ? min_distinguishability(bound.value) : 0.0;
    out.crb.points.push_back(c);
  }
  return out;
}

SlopeFit loglog_slope(const DistinguishabilityCurve& curve) {
  std::vector<double> xs, ys;
  for (const CurvePoint& p : curve.points) {
    if (p.ill_defined || !(p.value > 0.0)) continue;
    xs.push_back(std::log(static_cast<double>(p.frames)));
    ys.push_back(std::log(p.value));
  }
  if (xs.size() < 2) throw DomainError("slope needs at least two well-defined points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, xs.size()};
}

DepthDistribution depth_distribution(const DepthImage& image, double bin_width) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < image.depth.size(); ++i) {
    if (!image.valid[i]) continue;
    lo = std::min(lo, image.depth[i]);
    hi = std::max(hi, image.depth[i]);
  }
  if (!std::isfinite(lo)) throw DomainError("depth distribution needs a valid pixel");
  if (!(bin_width > 0.0)) throw DomainError("bin_width must be > 0");
  const double origin = std::floor(lo / bin_width) * bin_width;
  const auto bars = static_cast<std::size_t>(std::floor((hi - origin) / bin_width)) + 1;
  return depth_distribution(image, bin_width, origin, bars);
}

DepthDistribution depth_distribution(const DepthImage& image, double bin_width, double origin,
                                     std::size_t n_bars) {
  if (!(bin_width > 0.0)) throw DomainError("bin_width must be > 0");
  if (n_bars < 1) throw DomainError("need at least one bar");
  if (image.valid_count() == 0) throw DomainError("depth distribution needs a valid pixel");
  DepthDistribution d{origin, bin_width, std::vector<std::uint64_t>(n_bars, 0), 0};
  for (std::size_t i = 0; i < image.depth.size(); ++i) {
    if (!image.valid[i]) continue;
    const double x = std::floor((image.depth[i] - origin) / bin_width);
    if (x >= 0.0 && x < static_cast<double>(n_bars)) {
      ++d.counts[static_cast<std::size_t>(x)];
    } else {
      ++d.outside;
    }
  }
  return d;
}

BarAccuracy per_bar_accuracy(const DepthDistribution& a, const DepthDistribution& b) {
  if (a.origin != b.origin || a.bin_width != b.bin_width || a.counts.size() != b.counts.size()) {
    throw DomainError("distributions have different binning");
  }
  BarAccuracy out;
  out.per_bar.reserve(a.counts.size());
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    const auto lo = std::min(a.counts[i], b.counts[i]);
    const auto hi = std::max(a.counts[i], b.counts[i]);
    out.per_bar.push_back(hi == 0 ? 1.0 : static_cast<double>(lo) / static_cast<double>(hi));
  }
  std::vector<double> sorted = out.per_bar;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  out.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  return out;
}

Separation separation_test(const DepthImage& image, std::span<const std::size_t> group_a,
                           std::span<const std::size_t> group_b) {
  struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double var = 0.0;
  };
  auto moments = [&](std::span<const std::size_t> group) {
    std::vector<double> xs;
    for (std::size_t i : group) {
      if (image.valid[i]) xs.push_back(image.depth[i]);
    }
    if (xs.size() < 2) throw DomainError("separation test needs two valid pixels per group");
    Moments m{xs.size(), 0.0, 0.0};
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(m.n);
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(m.n - 1);
    return m;
  };
  const Moments a = moments(group_a);
  const Moments b = moments(group_b);
  const double pooled = ((static_cast<double>(a.n) - 1.0) * a.var +
                         (static_cast<double>(b.n) - 1.0) * b.var) /
                        static_cast<double>(a.n + b.n - 2);
  return {std::abs(a.mean - b.mean), min_distinguishability(std::sqrt(pooled)), a.n, b.n};
}

}  // namespace spadsim
