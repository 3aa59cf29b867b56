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

#include "spadsim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spadsim/error.hpp"

namespace spadsim {

void Scene::validate() const {
  if (!range.same_shape(reflectivity) || !range.same_shape(no_return)) {
    throw DomainError("scene grids must share dimensions");
  }
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) {
      const double g = reflectivity(r, c);
      if (!(g >= 0.0 && g <= 1.0)) {
        throw DomainError("reflectivity outside [0, 1] at row " + std::to_string(r) + ", col " +
                          std::to_string(c));
      }
      if (!no_return(r, c) && !(range(r, c) > 0.0 && std::isfinite(range(r, c)))) {
        throw DomainError("non-positive range at row " + std::to_string(r) + ", col " +
                          std::to_string(c));
      }
    }
  }
}

Scene Scene::uniform(std::size_t rows, std::size_t cols, double range, double reflectivity) {
  return Scene{Grid<double>(rows, cols, range), Grid<double>(rows, cols, reflectivity),
               Grid<std::uint8_t>(rows, cols, 0)};
}

ResolutionTarget make_resolution_target(const ResolutionTargetSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw DomainError("target needs rows, cols >= 1");
  if (!(spec.pixel_pitch > 0.0)) throw DomainError("pixel_pitch must be > 0");
  double widths = 0.0;
  for (double d : spec.post_sizes) {
    if (!(d > 0.0 && d < spec.backplane_range)) throw DomainError("post size out of range");
    widths += d;
  }
  const double width = static_cast<double>(spec.cols) * spec.pixel_pitch;
  const double height = static_cast<double>(spec.rows) * spec.pixel_pitch;
  const double gap = (width - widths) / static_cast<double>(spec.post_sizes.size() + 1);
  if (gap <= 0.0 || spec.post_sizes.empty() ||
      *std::max_element(spec.post_sizes.begin(), spec.post_sizes.end()) > height) {
    throw DomainError("posts do not fit in the field of view");
  }

  ResolutionTarget t;
  t.scene = Scene::uniform(spec.rows, spec.cols, spec.backplane_range, spec.reflectivity);
  t.post_heights = spec.post_sizes;
  t.post_pixels.resize(spec.post_sizes.size());
  t.surround.resize(spec.post_sizes.size());

  double left = gap;
  for (std::size_t k = 0; k < spec.post_sizes.size(); ++k) {
    const double d = spec.post_sizes[k];
    const double cx = left + 0.5 * d;
    const double cy = 0.5 * height;
    const double ring = 0.5 * d + std::max(0.5 * d, 4.0 * spec.pixel_pitch);
    for (std::size_t r = 0; r < spec.rows; ++r) {
      for (std::size_t c = 0; c < spec.cols; ++c) {
        const double x = (static_cast<double>(c) + 0.5) * spec.pixel_pitch - cx;
        const double y = (static_cast<double>(r) + 0.5) * spec.pixel_pitch - cy;
        const double dist = std::hypot(x, y);
        const std::size_t i = r * spec.cols + c;
        if (dist <= 0.5 * d) {
          t.scene.range[i] = spec.backplane_range - d;
          t.post_pixels[k].push_back(i);
        } else if (dist <= ring) {
          t.surround[k].push_back(i);
        }
      }
    }
    left += d + gap;
  }
  // A wide ring may reach a neighbouring post.
  for (auto& ring : t.surround) {
    std::erase_if(ring, [&](std::size_t i) { return t.scene.range[i] != spec.backplane_range; });
  }
  return t;
}

std::string_view to_string(PixelStatus status) {
  switch (status) {
    case PixelStatus::kOk: return "ok";
    case PixelStatus::kNoReturn: return "no_return";
    case PixelStatus::kInvalidInput: return "invalid_input";
    case PixelStatus::kOutOfWindow: return "out_of_window";
    case PixelStatus::kSaturated: return "saturated";
    case PixelStatus::kNotEstimable: return "not_estimable";
    case PixelStatus::kEmptyHistogram: return "empty_histogram";
    case PixelStatus::kNonConvergence: return "non_convergence";
  }
  return "unknown";
}

std::string_view to_string(SimulationMode mode) {
  switch (mode) {
    case SimulationMode::kCrb: return "crb";
    case SimulationMode::kHistogram: return "histogram";
    case SimulationMode::kMeasured: return "measured";
  }
  return "unknown";
}

std::size_t DepthImage::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid.values()) n += v ? 1 : 0;
  return n;
}

}  // namespace spadsim
