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

#include "spadsim/crb_imager.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "spadsim/constants.hpp"
#include "spadsim/error.hpp"
#include "spadsim/likelihood.hpp"
#include "spadsim/parallel.hpp"
#include "spadsim/rng.hpp"

namespace spadsim {
namespace {

constexpr double kMemoStep = 1e-3;
constexpr std::int64_t kZeroRate = INT64_MIN;

std::int64_t quantise(double value) {
  if (value <= 0.0) return kZeroRate;
  return std::llround(std::log(value) / std::log1p(kMemoStep));
}

double dequantise(std::int64_t key) {
  if (key == kZeroRate) return 0.0;
  return std::exp(static_cast<double>(key) * std::log1p(kMemoStep));
}

struct PixelPrep {
  PixelStatus status = PixelStatus::kOk;
  LikelihoodModel model;
  double alpha = 0.0;
  bool exact = false;  // near the window edge: bypass the memo
  std::pair<std::int64_t, std::int64_t> key{};
};

}  // namespace

CrbPlan plan_crb(const Scene& scene, const SystemConfig& config, const AcquisitionSpec& acq,
                 int threads) {
  scene.validate();
  config.validate();
  acq.validate();

  const std::size_t n = scene.range.size();
  std::vector<PixelPrep> prep(n);
  std::map<std::pair<std::int64_t, std::int64_t>, double> memo;

  for (std::size_t i = 0; i < n; ++i) {
    PixelPrep& p = prep[i];
    if (scene.no_return[i]) {
      p.status = PixelStatus::kNoReturn;
      continue;
    }
    const TargetPatch target{scene.range[i], scene.reflectivity[i]};
    try {
      p.model = make_likelihood(config.laser, config.atmosphere, config.optics, config.sensor,
                                target);
    } catch (const DomainError&) {
      p.status = PixelStatus::kInvalidInput;
      continue;
    }
    const Alpha a = total_alpha(p.model, config.tolerances.edge_sigma_guard);
    p.alpha = a.value;
    if (p.model.pulse.peak_time < 0.0 || p.model.pulse.peak_time > p.model.window) {
      p.status = PixelStatus::kOutOfWindow;
    } else if (a.value >= 1.0) {
      p.status = PixelStatus::kSaturated;
    } else if (p.model.signal_ppp == 0.0) {
      p.status = PixelStatus::kNotEstimable;
    } else if (a.near_edge) {
      p.exact = true;
    } else {
      p.key = {quantise(p.model.signal_ppp), quantise(p.model.background_rate)};
      memo.emplace(p.key, 0.0);
    }
  }

  // Memoised information at the bucket's representative rates with the
  // peak at the window centre, where F is translation invariant.
  const LikelihoodModel base = [&] {
    LikelihoodModel m;
    m.dark_rate = config.sensor.dark_rate;
    m.pulse.sigma = sigma_from_fwhm(config.laser.pulse_fwhm);
    m.window = config.sensor.window();
    m.pulse.peak_time = 0.5 * m.window;
    return m;
  }();
  std::vector<std::pair<const std::pair<std::int64_t, std::int64_t>, double>*> slots;
  slots.reserve(memo.size());
  for (auto& entry : memo) slots.push_back(&entry);
  std::vector<std::uint8_t> memo_failed(slots.size(), 0);
  parallel_for(slots.size(), threads, [&](std::size_t k) {
    LikelihoodModel m = base;
    m.signal_ppp = dequantise(slots[k]->first.first);
    m.background_rate = dequantise(slots[k]->first.second);
    try {
      slots[k]->second = fisher_per_pulse(m, config.fisher_options()).info_per_pulse;
    } catch (const NonConvergenceError&) {
      memo_failed[k] = 1;
    }
  }, 1);
  std::map<std::pair<std::int64_t, std::int64_t>, bool> failed_keys;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (memo_failed[k]) failed_keys[slots[k]->first] = true;
  }

  CrbPlan plan{Grid<double>(scene.rows(), scene.cols(), 0.0),
               Grid<PixelStatus>(scene.rows(), scene.cols(), PixelStatus::kOk), memo.size(),
               config_digest(config)};
  parallel_for(n, threads, [&](std::size_t i) {
    PixelPrep& p = prep[i];
    if (p.status != PixelStatus::kOk) {
      plan.status[i] = p.status;
      return;
    }
    double info = 0.0;
    if (p.exact) {
      try {
        info = fisher_per_pulse(p.model, config.fisher_options()).info_per_pulse;
      } catch (const NonConvergenceError&) {
        plan.status[i] = PixelStatus::kNonConvergence;
        return;
      }
    } else {
      if (failed_keys.contains(p.key)) {
        plan.status[i] = PixelStatus::kNonConvergence;
        return;
      }
      info = memo.at(p.key);
    }
    const CrbBound bound = crb_sigma_star(info, p.alpha, acq);
    if (!bound.estimable()) {
      plan.status[i] = PixelStatus::kNotEstimable;
      return;
    }
    plan.sigma[i] = min_distinguishability(bound.value);
  });
  return plan;
}

DepthImage render_crb(const CrbPlan& plan, const Scene& scene, std::uint64_t seed,
                      std::uint64_t image_index, int threads) {
  if (!plan.sigma.same_shape(scene.range)) throw DomainError("plan does not match scene");
  DepthImage img(scene.rows(), scene.cols());
  img.provenance = {SimulationMode::kCrb, seed, plan.config_digest, image_index};
  const auto frame = static_cast<std::uint32_t>(image_index);
  parallel_for(scene.range.size(), threads, [&](std::size_t i) {
    img.status[i] = plan.status[i];
    if (plan.status[i] != PixelStatus::kOk) {
      img.depth[i] = kInvalidDepth;
      return;
    }
    KeyedStream rng(seed, static_cast<std::uint32_t>(i), frame, kCrbNoiseStream);
    const double dt = plan.sigma[i] * rng.normal();
    img.depth[i] = scene.range[i] + time_to_depth(dt);
    img.valid[i] = 1;
  }, 4096);
  return img;
}

DepthImage simulate_crb_image(const Scene& scene, const SystemConfig& config,
                              const AcquisitionSpec& acq, std::uint64_t seed) {
  return render_crb(plan_crb(scene, config, acq), scene, seed, 0);
}

void simulate_crb_batch(const Scene& scene, const SystemConfig& config,
                        const AcquisitionSpec& acq, std::size_t n_images, std::uint64_t seed,
                        const std::function<void(DepthImage&&)>& sink, int threads) {
  if (n_images < 1) throw DomainError("n_images must be >= 1");
  const CrbPlan plan = plan_crb(scene, config, acq, threads);
  for (std::size_t k = 0; k < n_images; ++k) sink(render_crb(plan, scene, seed, k, threads));
}

std::vector<DepthImage> simulate_crb_batch(const Scene& scene, const SystemConfig& config,
                                           const AcquisitionSpec& acq, std::size_t n_images,
                                           std::uint64_t seed, int threads) {
  std::vector<DepthImage> out;
  out.reserve(n_images);
  simulate_crb_batch(scene, config, acq, n_images, seed,
                     [&](DepthImage&& img) { out.push_back(std::move(img)); }, threads);
  return out;
}

}  // namespace spadsim
