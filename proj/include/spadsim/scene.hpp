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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spadsim/grid.hpp"

namespace spadsim {

/// Ground-truth range and reflectivity per pixel. `no_return` marks pixels
/// that see nothing (sky); range is ignored there.
struct Scene {
  Grid<double> range;          // m
  Grid<double> reflectivity;   // [0, 1]
  Grid<std::uint8_t> no_return;

  std::size_t rows() const { return range.rows(); }
  std::size_t cols() const { return range.cols(); }
  void validate() const;

  static Scene uniform(std::size_t rows, std::size_t cols, double range, double reflectivity);
};

/// Flat backplane with a row of cylindrical posts facing the sensor, each
/// as tall as it is wide. Pixel pitch is measured at the backplane.
struct ResolutionTargetSpec {
  std::size_t rows = 128;
  std::size_t cols = 192;
  double backplane_range = 14.73;  // m
  double pixel_pitch = 2.5e-3;     // m
  double reflectivity = 0.09;
  std::vector<double> post_sizes{0.09, 0.07, 0.05, 0.03, 0.01};  // m
};

struct ResolutionTarget {
  Scene scene;
  std::vector<double> post_heights;                   // m
  std::vector<std::vector<std::size_t>> post_pixels;  // row-major indices
  std::vector<std::vector<std::size_t>> surround;     // backplane ring per post
};

ResolutionTarget make_resolution_target(const ResolutionTargetSpec& spec = {});

/// Why a pixel carries no depth estimate.
enum class PixelStatus : std::uint8_t {
  kOk = 0,
  kNoReturn,        // masked in the scene
  kInvalidInput,    // range or reflectivity violates its invariant
  kOutOfWindow,     // return falls outside the TCSPC window
  kSaturated,       // alpha >= 1
  kNotEstimable,    // zero Fisher information or no detection probability
  kEmptyHistogram,  // no photon recorded in any frame
  kNonConvergence,  // quadrature failed
};

std::string_view to_string(PixelStatus status);

enum class SimulationMode : std::uint8_t { kCrb, kHistogram, kMeasured };
std::string_view to_string(SimulationMode mode);

struct Provenance {
  SimulationMode mode = SimulationMode::kCrb;
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
  std::uint64_t image_index = 0;
};

/// Depth stored (and written) for pixels without an estimate.
inline constexpr double kInvalidDepth = -1.0;

/// Estimated or simulated depths (m). Invalid pixels carry a status code.
struct DepthImage {
  Grid<double> depth;
  Grid<std::uint8_t> valid;
  Grid<PixelStatus> status;
  std::string units = "m";
  Provenance provenance;

  DepthImage() = default;
  DepthImage(std::size_t rows, std::size_t cols)
      : depth(rows, cols, kInvalidDepth), valid(rows, cols, 0), status(rows, cols, PixelStatus::kOk) {}

  std::size_t rows() const { return depth.rows(); }
  std::size_t cols() const { return depth.cols(); }
  std::size_t valid_count() const;
};

}  // namespace spadsim
