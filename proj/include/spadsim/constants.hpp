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

namespace spadsim {

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kLightSpeed = 299792458.0;    // m/s

// Denominator of the Lambertian photon channel (surface scatter and the
// return path treated as separate processes). Alternate scattering models
// replace this value.
inline constexpr double LAMBERTIAN_SPLIT_FACTOR = 8.0;

// FWHM = kFwhmPerSigma * sigma for a Gaussian.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

/// Round-trip time to range.
constexpr double time_to_depth(double seconds) { return 0.5 * kLightSpeed * seconds; }
/// Range to round-trip time.
constexpr double depth_to_time(double meters) { return 2.0 * meters / kLightSpeed; }

}  // namespace spadsim
