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
#include <vector>

#include "spadsim/config.hpp"
#include "spadsim/fisher.hpp"
#include "spadsim/scene.hpp"

namespace spadsim {

/// Per-pixel noise levels for the fast image mode. `sigma` is the minimum
/// distinguishability in round-trip time (s); the emitted depth noise has
/// standard deviation c/2 * sigma.
struct CrbPlan {
  Grid<double> sigma;
  Grid<PixelStatus> status;
  std::size_t fisher_evaluations = 0;  // distinct quadratures performed
  std::uint64_t config_digest = 0;
};

/// Computes sigma for every pixel. Fisher information is memoised on
/// (P_pp, C_bckg) quantised to a relative step of 1e-3; pixels whose return
/// lies within the edge guard of the window get an exact evaluation.
CrbPlan plan_crb(const Scene& scene, const SystemConfig& config, const AcquisitionSpec& acq,
                 int threads = 1);

/// Noises the ground truth once with the plan. The draw for each pixel is
/// keyed by (seed, pixel, image_index), so images are reproducible
/// individually and independent of thread count.
DepthImage render_crb(const CrbPlan& plan, const Scene& scene, std::uint64_t seed,
                      std::uint64_t image_index, int threads = 1);

DepthImage simulate_crb_image(const Scene& scene, const SystemConfig& config,
                              const AcquisitionSpec& acq, std::uint64_t seed);

/// Streams n_images images to `sink` in index order, planning once.
void simulate_crb_batch(const Scene& scene, const SystemConfig& config,
                        const AcquisitionSpec& acq, std::size_t n_images, std::uint64_t seed,
                        const std::function<void(DepthImage&&)>& sink, int threads = 1);

std::vector<DepthImage> simulate_crb_batch(const Scene& scene, const SystemConfig& config,
                                           const AcquisitionSpec& acq, std::size_t n_images,
                                           std::uint64_t seed, int threads = 1);

}  // namespace spadsim
