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

#include "spadsim/radiometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "spadsim/constants.hpp"
#include "spadsim/error.hpp"

namespace spadsim {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void LaserSpec::validate() const {
  require(finite_nonneg(pulse_energy), "laser.pulse_energy must be >= 0");
  require(finite_nonneg(rep_rate), "laser.rep_rate must be >= 0");
  require(std::isfinite(wavelength) && wavelength > 0.0, "laser.wavelength must be > 0");
  require(std::isfinite(pulse_fwhm) && pulse_fwhm > 0.0, "laser.pulse_fwhm must be > 0");
  require(finite_nonneg(jitter_mean), "laser.jitter_mean must be >= 0");
  require(finite_nonneg(jitter_std), "laser.jitter_std must be >= 0");
}

void AtmosphereSpec::validate() const {
  // +inf attenuation length is a vacuum.
  require(attenuation_length > 0.0 && !std::isnan(attenuation_length),
          "atmosphere.attenuation_length must be > 0");
  require(finite_nonneg(solar_irradiance), "atmosphere.solar_irradiance must be >= 0");
}

void OpticsSpec::validate() const {
  require(std::isfinite(f_number) && f_number > 0.0, "optics.f_number must be > 0");
  require(divergence > 0.0 && divergence < std::numbers::pi / 2.0,
          "optics.divergence must lie in (0, pi/2)");
  if (focal_length) {
    require(std::isfinite(*focal_length) && *focal_length > 0.0,
            "optics.focal_length must be > 0");
  }
}

void SensorSpec::validate() const {
  require(std::isfinite(pixel_width) && pixel_width > 0.0, "sensor.pixel_width must be > 0");
  require(std::isfinite(pixel_height) && pixel_height > 0.0, "sensor.pixel_height must be > 0");
  require(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0,
          "sensor.quantum_efficiency must lie in [0, 1]");
  require(finite_nonneg(dark_rate), "sensor.dark_rate must be >= 0");
  require(n_bins >= 1, "sensor.n_bins must be >= 1");
  require(std::isfinite(bin_width) && bin_width > 0.0, "sensor.bin_width must be > 0");
  require(rows >= 1 && cols >= 1, "sensor.rows and sensor.cols must be >= 1");
  require(finite_nonneg(sigma_q_start), "sensor.sigma_q_start must be >= 0");
  require(finite_nonneg(sigma_q_end), "sensor.sigma_q_end must be >= 0");
  require(std::isfinite(gate_delay), "sensor.gate_delay must be finite");
}

void TargetPatch::validate() const {
  require(std::isfinite(range) && range > 0.0, "target.range must be > 0");
  require(reflectivity >= 0.0 && reflectivity <= 1.0, "target.reflectivity must lie in [0, 1]");
}

double photons_per_pulse(const LaserSpec& laser, const AtmosphereSpec& atm,
                         const OpticsSpec& optics, const SensorSpec& sensor,
                         const TargetPatch& target) {
  laser.validate();
  atm.validate();
  optics.validate();
  sensor.validate();
  target.validate();

  const double r = target.range;
  const double tan_theta = std::tan(optics.divergence);
  const double photons_per_joule = laser.wavelength / (kPlanck * kLightSpeed);
  const double channel = sensor.quantum_efficiency * target.reflectivity *
                         std::exp(-2.0 * r / atm.attenuation_length) / LAMBERTIAN_SPLIT_FACTOR;
  const double geometry = sensor.pixel_width * sensor.pixel_height /
                          (optics.f_number * optics.f_number * std::numbers::pi * r * r *
                           tan_theta * tan_theta);
  return photons_per_joule * laser.pulse_energy * channel * geometry;
}

double background_rate(const LaserSpec& laser, const AtmosphereSpec& atm,
                       const OpticsSpec& optics, const SensorSpec& sensor,
                       const TargetPatch& target) {
  laser.validate();
  atm.validate();
  optics.validate();
  sensor.validate();
  target.validate();

  const double photons_per_joule = laser.wavelength / (kPlanck * kLightSpeed);
  const double channel = sensor.quantum_efficiency * target.reflectivity *
                         std::exp(-target.range / atm.attenuation_length) /
                         (LAMBERTIAN_SPLIT_FACTOR * optics.f_number * optics.f_number);
  return photons_per_joule * channel * atm.solar_irradiance * sensor.pixel_width *
         sensor.pixel_height;
}

Sbnr sbnr(const LaserSpec& laser, const AtmosphereSpec& atm, const OpticsSpec& optics,
          const TargetPatch& target) {
  laser.validate();
  atm.validate();
  optics.validate();
  target.validate();

  if (atm.solar_irradiance == 0.0) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  const double r = target.range;
  const double tan_theta = std::tan(optics.divergence);
  const double value = laser.pulse_energy * std::exp(-r / atm.attenuation_length) /
                       (atm.solar_irradiance * std::numbers::pi * r * r * tan_theta * tan_theta);
  return {value, false};
}

EnergyChain energy_chain(const LaserSpec& laser, const AtmosphereSpec& atm,
                         const OpticsSpec& optics, const SensorSpec& sensor,
                         const TargetPatch& target) {
  laser.validate();
  atm.validate();
  optics.validate();
  sensor.validate();
  target.validate();
  if (!optics.focal_length) {
    throw DomainError("energy_chain requires optics.focal_length");
  }

  const double r = target.range;
  const double f = *optics.focal_length;
  const double tan_theta = std::tan(optics.divergence);
  const double one_way = std::exp(-r / atm.attenuation_length);

  EnergyChain out;
  out.rho_e = laser.pulse_energy * one_way / (std::numbers::pi * r * r * tan_theta * tan_theta);
  out.e1 = out.rho_e * (r * r * sensor.pixel_width * sensor.pixel_height / (f * f));
  out.e2 = target.reflectivity * out.e1 * one_way / (2.0 * std::numbers::pi * r * r);
  const double aperture_radius = f / (2.0 * optics.f_number);
  out.e3 = sensor.quantum_efficiency * out.e2 * std::numbers::pi * aperture_radius *
           aperture_radius;
  out.photons = out.e3 * laser.wavelength / (kPlanck * kLightSpeed);
  return out;
}

}  // namespace spadsim
