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
#include <optional>
#include <string>
#include <vector>

#include "spadsim/fisher.hpp"
#include "spadsim/radiometry.hpp"

namespace spadsim {

struct Tolerances {
  double quadrature_rel = 1e-6;
  double edge_sigma_guard = 5.0;
};

/// Every parameter of the optical system, the acquisition, and the run.
struct SystemConfig {
  LaserSpec laser;
  AtmosphereSpec atmosphere;
  OpticsSpec optics;
  SensorSpec sensor;
  long frames = 1;          // N
  double exposure = 0.0;    // eta, s
  std::uint64_t seed = 0;
  Tolerances tolerances;
  std::optional<TargetPatch> target;  // single-point analyses

  AcquisitionSpec acquisition() const { return {frames, exposure, laser.rep_rate}; }
  /// Pulses simulated per frame: eta*nu rounded to the nearest integer.
  long pulses_per_frame() const;
  FisherOptions fisher_options() const { return {tolerances.quadrature_rel, 1'000'000}; }

  /// Throws DomainError on the first violated invariant.
  void validate() const;
};

/// Parses the sectioned key-value format. Throws ConfigError naming the
/// offending key on missing, unknown or malformed entries.
SystemConfig parse_config(const std::string& text);
SystemConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const SystemConfig& config);

/// FNV-1a hash of the canonical text; identifies a configuration in outputs.
std::uint64_t config_digest(const SystemConfig& config);

struct Finding {
  enum class Severity { kError, kWarning };
  Severity severity = Severity::kError;
  std::string field;
  std::string message;
};

/// Checks every invariant, and, when a target is present, alpha < 1 and
/// the edge guard around the TCSPC window.
std::vector<Finding> check_config(const SystemConfig& config);

}  // namespace spadsim
