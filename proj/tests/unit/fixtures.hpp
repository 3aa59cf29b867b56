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

#include <string>

#include "spadsim/config.hpp"

namespace spadsim::testing {

inline SystemConfig table1() {
  return load_config(std::string(SPADSIM_PRESETS) + "/table1_resolution_target.ini");
}

inline SystemConfig table2() {
  return load_config(std::string(SPADSIM_PRESETS) + "/table2_landrover.ini");
}

/// Relative difference, for golden-value comparisons.
inline double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace spadsim::testing
