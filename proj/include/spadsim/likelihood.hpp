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

#include <vector>

#include "spadsim/radiometry.hpp"

namespace spadsim {

/// Gaussian impulse response of laser pulse and detector.
struct PulseResponse {
  double peak_time = 0.0;  // mu, s (relative to TCSPC bin 0)
  double sigma = 0.0;      // sigma', s
};

/// Photon arrival-rate function over one TCSPC interval [0, window].
struct LikelihoodModel {
  double dark_rate = 0.0;        // C_dc, Hz
  double background_rate = 0.0;  // C_bckg, Hz
  double signal_ppp = 0.0;       // P_pp
  PulseResponse pulse;
  double window = 0.0;           // T, s

  double floor_rate() const { return dark_rate + background_rate; }
  void validate() const;
};

/// Standard deviation of a Gaussian with the given full width at half maximum.
double sigma_from_fwhm(double fwhm);

/// Builds the per-pixel model for one target patch. The peak sits at the
/// round-trip time minus the sensor gate delay; T = n_bins * bin_width.
LikelihoodModel make_likelihood(const LaserSpec& laser, const AtmosphereSpec& atm,
                                const OpticsSpec& optics, const SensorSpec& sensor,
                                const TargetPatch& target);

/// Arrival-rate density at time t (counts/s).
double likelihood_at(const LikelihoodModel& model, double t);

/// Expected counts per pulse over the window, closed form.
struct Alpha {
  double value = 0.0;
  /// Peak lies within `edge_sigmas` sigma' of a window edge, so the closed
  /// form over-counts the truncated Gaussian.
  bool near_edge = false;
};
Alpha total_alpha(const LikelihoodModel& model, double edge_sigmas = 5.0);

struct BinProbabilityVector {
  std::vector<double> probs;   // storage index i holds bin [i*w, (i+1)*w)
  bool clamped = false;
};

/// Probability of a detection in each half-open bin for one pulse whose
/// response is displaced by `shift` (jitter plus pixel skew). Each value is
/// clamped into [0, 1]. Requires n_bins * bin_width == window to 1e-9.
BinProbabilityVector bin_probabilities(const LikelihoodModel& model, long n_bins,
                                       double bin_width, double shift = 0.0);

/// Mass of the unit-area Gaussian pulse falling in [t0, t1). Computed with
/// erfc on the far side of the peak to avoid cancellation in the tails.
double pulse_mass(double peak, double sigma, double t0, double t1);

/// Unclamped probability for storage bin `index` (0-based).
inline double bin_probability_raw(const LikelihoodModel& model, long index, double bin_width,
                                  double shift) {
  const double t0 = static_cast<double>(index) * bin_width;
  return bin_width * model.floor_rate() +
         model.signal_ppp *
             pulse_mass(model.pulse.peak_time + shift, model.pulse.sigma, t0, t0 + bin_width);
}

}  // namespace spadsim
