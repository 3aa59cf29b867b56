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

#include <cmath>
#include <cstddef>

#include "spadsim/likelihood.hpp"

namespace spadsim {

struct FisherResult {
  double info_per_pulse = 0.0;   // F, 1/s^2
  double abs_error = 0.0;        // quadrature error estimate, 1/s^2
  std::size_t evaluations = 0;
};

struct AcquisitionSpec {
  long frames = 1;              // N
  double exposure = 0.0;        // eta, s
  double rep_rate = 0.0;        // nu, Hz

  double pulses_per_frame() const { return exposure * rep_rate; }
  void validate() const;
  bool operator==(const AcquisitionSpec&) const = default;
};

struct FisherOptions {
  double rel_tol = 1e-6;
  std::size_t max_evaluations = 1'000'000;
};

/// Fisher information about the peak position carried by one detected
/// photon, integrated numerically over [0, T] (no closed form exists).
/// Zero when the model has no signal.
FisherResult fisher_per_pulse(const LikelihoodModel& model, const FisherOptions& opts = {});

/// Probability that a frame of eta*nu pulses records at least one photon,
/// 1 - (1 - alpha)^(eta*nu). Requires 0 <= alpha < 1.
double success_probability(double alpha, const AcquisitionSpec& acq);

/// Cramer-Rao lower bound on the peak-time standard deviation after
/// acq.frames frames. `value` is +inf when depth is not estimable
/// (zero information or zero detection probability).
struct CrbBound {
  double value = 0.0;  // s
  bool estimable() const { return std::isfinite(value); }
};
CrbBound crb_sigma_star(double info_per_pulse, double alpha, const AcquisitionSpec& acq);

/// One-FWHM separation criterion: sigma_star * 2 sqrt(2 ln 2).
double min_distinguishability(double sigma_star);

}  // namespace spadsim
