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

#include <optional>

namespace spadsim {

// All quantities are SI.

struct LaserSpec {
  double pulse_energy = 0.0;   // E0, J
  double rep_rate = 0.0;       // nu, Hz
  double wavelength = 0.0;     // lambda, m
  double pulse_fwhm = 0.0;     // s
  double jitter_mean = 0.0;    // mu_j, s
  double jitter_std = 0.0;     // sigma_j, s

  void validate() const;
};

struct AtmosphereSpec {
  double attenuation_length = 0.0;  // C_atm, m
  double solar_irradiance = 0.0;    // W_bckg, W/m^2

  void validate() const;
};

struct OpticsSpec {
  double f_number = 0.0;
  double divergence = 0.0;                 // full beam divergence theta, rad
  std::optional<double> focal_length;      // m; cancels out of the photon count

  void validate() const;
};

struct SensorSpec {
  double pixel_width = 0.0;          // m
  double pixel_height = 0.0;         // m
  double quantum_efficiency = 0.0;   // [0, 1]
  double dark_rate = 0.0;            // C_dc, Hz
  long n_bins = 0;
  double bin_width = 0.0;            // omega, s
  long rows = 0;
  long cols = 0;
  double sigma_q_start = 0.0;        // inter-pixel trigger skew std at col 0, s
  double sigma_q_end = 0.0;          // ... at col cols-1, s
  double gate_delay = 0.0;           // round-trip time at TCSPC bin 0, s

  double window() const { return static_cast<double>(n_bins) * bin_width; }
  void validate() const;
};

struct TargetPatch {
  double range = 0.0;          // R, m
  double reflectivity = 0.0;   // Gamma, [0, 1]

  void validate() const;
};

/// Expected signal photons detected per pulse per pixel. Not clamped.
double photons_per_pulse(const LaserSpec& laser, const AtmosphereSpec& atm,
                         const OpticsSpec& optics, const SensorSpec& sensor,
                         const TargetPatch& target);

/// Solar background count rate (Hz). Sunlight crosses the atmosphere once
/// on its way from the target to the sensor.
double background_rate(const LaserSpec& laser, const AtmosphereSpec& atm,
                       const OpticsSpec& optics, const SensorSpec& sensor,
                       const TargetPatch& target);

/// Signal to background-noise ratio. `infinite` is set when there is no
/// background (value is then +inf).
struct Sbnr {
  double value = 0.0;
  bool infinite = false;
};
Sbnr sbnr(const LaserSpec& laser, const AtmosphereSpec& atm, const OpticsSpec& optics,
          const TargetPatch& target);

/// Intermediates of the photon channel: energy density at the target,
/// energy reaching a pixel's footprint, scattered energy at the aperture,
/// captured energy, and the resulting photon count.
struct EnergyChain {
  double rho_e = 0.0;   // J/m^2
  double e1 = 0.0;      // J
  double e2 = 0.0;      // J
  double e3 = 0.0;      // J
  double photons = 0.0;
};

/// Requires optics.focal_length; throws DomainError otherwise.
EnergyChain energy_chain(const LaserSpec& laser, const AtmosphereSpec& atm,
                         const OpticsSpec& optics, const SensorSpec& sensor,
                         const TargetPatch& target);

}  // namespace spadsim
