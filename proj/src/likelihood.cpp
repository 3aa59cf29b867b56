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

#include "spadsim/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spadsim/constants.hpp"
#include "spadsim/error.hpp"

namespace spadsim {

void LikelihoodModel::validate() const {
  if (!(dark_rate >= 0.0) || !(background_rate >= 0.0) || !(signal_ppp >= 0.0)) {
    throw DomainError("likelihood rates must be >= 0");
  }
  if (!std::isfinite(dark_rate) || !std::isfinite(background_rate) ||
      !std::isfinite(signal_ppp)) {
    throw DomainError("likelihood rates must be finite");
  }
  if (!(window > 0.0) || !std::isfinite(window)) {
    throw DomainError("likelihood window must be > 0");
  }
  if (!(pulse.sigma > 0.0) || !std::isfinite(pulse.sigma)) {
    throw DomainError("pulse sigma must be > 0");
  }
  if (!std::isfinite(pulse.peak_time)) throw DomainError("pulse peak time must be finite");
}

double sigma_from_fwhm(double fwhm) {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw DomainError("fwhm must be > 0");
  return fwhm / kFwhmPerSigma;
}

LikelihoodModel make_likelihood(const LaserSpec& laser, const AtmosphereSpec& atm,
                                const OpticsSpec& optics, const SensorSpec& sensor,
                                const TargetPatch& target) {
  LikelihoodModel m;
  m.dark_rate = sensor.dark_rate;
  m.background_rate = background_rate(laser, atm, optics, sensor, target);
  m.signal_ppp = photons_per_pulse(laser, atm, optics, sensor, target);
  m.pulse.peak_time = depth_to_time(target.range) - sensor.gate_delay;
  m.pulse.sigma = sigma_from_fwhm(laser.pulse_fwhm);
  m.window = sensor.window();
  return m;
}

double likelihood_at(const LikelihoodModel& model, double t) {
  const double z = (t - model.pulse.peak_time) / model.pulse.sigma;
  return model.floor_rate() + model.signal_ppp /
                                  (model.pulse.sigma * std::sqrt(2.0 * std::numbers::pi)) *
                                  std::exp(-0.5 * z * z);
}

Alpha total_alpha(const LikelihoodModel& model, double edge_sigmas) {
  model.validate();
  const double guard = edge_sigmas * model.pulse.sigma;
  const double mu = model.pulse.peak_time;
  Alpha a;
  a.value = model.window * model.floor_rate() + model.signal_ppp;
  a.near_edge = mu < guard || mu > model.window - guard;
  return a;
}

double pulse_mass(double peak, double sigma, double t0, double t1) {
  const double scale = 1.0 / (sigma * std::numbers::sqrt2);
  const double a = (t0 - peak) * scale;
  const double b = (t1 - peak) * scale;
  if (a >= 0.0) return 0.5 * (std::erfc(a) - std::erfc(b));
  if (b <= 0.0) return 0.5 * (std::erfc(-b) - std::erfc(-a));
  return 0.5 * (std::erf(b) - std::erf(a));
}

BinProbabilityVector bin_probabilities(const LikelihoodModel& model, long n_bins,
                                       double bin_width, double shift) {
  model.validate();
  if (n_bins < 1 || !(bin_width > 0.0)) throw DomainError("need n_bins >= 1 and bin_width > 0");
  const double total = static_cast<double>(n_bins) * bin_width;
  if (std::abs(total - model.window) > 1e-9 * model.window) {
    throw DomainError("n_bins * bin_width must equal the TCSPC window");
  }
  BinProbabilityVector out;
  out.probs.resize(static_cast<std::size_t>(n_bins));
  for (long i = 0; i < n_bins; ++i) {
    const double p = bin_probability_raw(model, i, bin_width, shift);
    const double c = std::clamp(p, 0.0, 1.0);
    out.clamped = out.clamped || c != p;
    out.probs[static_cast<std::size_t>(i)] = c;
  }
  return out;
}

}  // namespace spadsim
