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

#include "spadsim/fisher.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>
#include <vector>

#include "spadsim/constants.hpp"
#include "spadsim/error.hpp"
#include "spadsim/quadrature.hpp"

namespace spadsim {

void AcquisitionSpec::validate() const {
  if (frames < 1) throw DomainError("acquisition.frames must be >= 1");
  if (!(exposure > 0.0) || !std::isfinite(exposure)) {
    throw DomainError("acquisition.exposure must be > 0");
  }
  if (!(pulses_per_frame() >= 1.0)) {
    throw DomainError("acquisition must contain at least one pulse per frame (eta*nu >= 1)");
  }
}

FisherResult fisher_per_pulse(const LikelihoodModel& model, const FisherOptions& opts) {
  model.validate();
  const double ppp = model.signal_ppp;
  if (ppp == 0.0) return {};

  const double alpha = total_alpha(model).value;
  const double mu = model.pulse.peak_time;
  const double sigma = model.pulse.sigma;
  const double floor = model.floor_rate();
  const double peak_density = ppp / (sigma * std::sqrt(2.0 * std::numbers::pi));

  // (dL/dmu)^2 / L / alpha, written so that it stays finite when the floor
  // rate is zero and the Gaussian underflows.
  auto integrand = [=](double t) {
    const double d = t - mu;
    const double z = d / sigma;
    const double s = peak_density * std::exp(-0.5 * z * z);
    if (s == 0.0) return 0.0;
    const double dl = s * d / (sigma * sigma);
    return dl * (dl / (floor + s)) / alpha;
  };

  // The integrand has two lobes around mu; coarse initial panels can agree
  // by accident between the Simpson estimates, so seed every sigma/2.
  std::vector<double> pts{0.0, model.window};
  for (int k = -16; k <= 16; ++k) {
    const double t = mu + 0.5 * k * sigma;
    if (t > 0.0 && t < model.window) pts.push_back(t);
  }
  std::sort(pts.begin(), pts.end());

  QuadratureOptions q;
  q.rel_tol = opts.rel_tol;
  q.max_evaluations = opts.max_evaluations;
  const QuadratureResult r = integrate_adaptive(integrand, pts, q);
  return {std::max(r.value, 0.0), r.abs_error, r.evaluations};
}

double success_probability(double alpha, const AcquisitionSpec& acq) {
  acq.validate();
  if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
  if (alpha >= 1.0) {
    throw DomainError(
        "alpha >= 1: expected counts per pulse exceed one, the saturated regime where "
        "(1 - alpha)^(eta*nu) is undefined; reduce pulse energy or aperture");
  }
  return -std::expm1(acq.pulses_per_frame() * std::log1p(-alpha));
}

CrbBound crb_sigma_star(double info_per_pulse, double alpha, const AcquisitionSpec& acq) {
  if (!(info_per_pulse >= 0.0)) throw DomainError("Fisher information must be >= 0");
  const double success = success_probability(alpha, acq);
  const double events = static_cast<double>(acq.frames) * success;
  if (info_per_pulse == 0.0 || events == 0.0) {
    return {std::numeric_limits<double>::infinity()};
  }
  return {1.0 / std::sqrt(events * info_per_pulse)};
}

double min_distinguishability(double sigma_star) {
  if (!(sigma_star >= 0.0)) throw DomainError("sigma_star must be >= 0");
  return sigma_star * kFwhmPerSigma;
}

}  // namespace spadsim
