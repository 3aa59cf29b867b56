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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "spadsim/estimation.hpp"
#include "spadsim/grid.hpp"
#include "spadsim/scene.hpp"
#include "spadsim/spad_sampler.hpp"

namespace spadsim {

enum class ValueKind : std::uint32_t { kDepth = 0, kReflectivity = 1, kCounts = 2 };
enum class GridFormat { kCsv, kGridBinary };

GridFormat parse_grid_format(std::string_view name);

/// Comma-separated rows, '#' lines ignored. Errors name the row and column.
Grid<double> read_csv_grid(std::istream& in, const std::string& source = "<stream>");
void write_csv_grid(std::ostream& out, const Grid<double>& grid);
Grid<double> load_csv_grid(const std::filesystem::path& path);
void save_csv_grid(const std::filesystem::path& path, const Grid<double>& grid);

/// Little-endian grid with a 64-byte header; layout in docs/formats.md.
struct GridFile {
  ValueKind kind = ValueKind::kDepth;
  std::string units;  // at most 15 bytes
  Grid<double> values;
};
void save_grid_binary(const std::filesystem::path& path, const GridFile& file);
GridFile load_grid_binary(const std::filesystem::path& path);

/// Reads either format, chosen by the file's leading bytes.
Grid<double> load_grid_any(const std::filesystem::path& path);

/// Depth cells equal to `invalid_sentinel` become no-return pixels.
Scene load_scene(const std::filesystem::path& depth_path,
                 const std::filesystem::path& reflectivity_path,
                 double invalid_sentinel = kInvalidDepth);

/// Invalid pixels are written as kInvalidDepth.
void save_depth_image(const DepthImage& image, const std::filesystem::path& path,
                      GridFormat format);
DepthImage load_depth_image(const std::filesystem::path& path);

void save_histogram_cube(const HistogramCube& cube, const std::filesystem::path& path);
HistogramCube load_histogram_cube(const std::filesystem::path& path);

/// Both sweep curves, one row per schedule point.
void save_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);
void save_distribution_csv(const DepthDistribution& dist, const std::filesystem::path& path);

}  // namespace spadsim
