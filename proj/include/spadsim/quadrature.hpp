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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "spadsim/error.hpp"

namespace spadsim {

struct QuadratureOptions {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  std::size_t max_evaluations = 1'000'000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
};

/// Globally adaptive Simpson integration over the consecutive intervals
/// defined by `breakpoints` (sorted, at least two). The panel with the
/// largest error estimate is bisected until the summed estimate drops below
/// max(abs_tol, rel_tol * |value|). Throws NonConvergenceError when the
/// evaluation budget runs out first.
template <class F>
QuadratureResult integrate_adaptive(F&& f, std::span<const double> breakpoints,
                                    const QuadratureOptions& opts = {}) {
  if (breakpoints.size() < 2) throw DomainError("quadrature needs at least two breakpoints");

  struct Panel {
    double a, b;
    double fa, fm, fb;
    double whole;    // Simpson over [a, b]
    double refined;  // composite Simpson over the two halves
    double fl, fr;   // midpoints of the halves
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };

  std::size_t evals = 0;
  auto eval = [&](double x) {
    ++evals;
    return static_cast<double>(f(x));
  };
  auto make = [&](double a, double b, double fa, double fm, double fb) {
    Panel p{a, b, fa, fm, fb, 0, 0, 0, 0, 0};
    const double m = 0.5 * (a + b);
    p.fl = eval(0.5 * (a + m));
    p.fr = eval(0.5 * (m + b));
    const double h = b - a;
    p.whole = h / 6.0 * (fa + 4.0 * fm + fb);
    p.refined = h / 12.0 * (fa + 4.0 * p.fl + 2.0 * fm + 4.0 * p.fr + fb);
    p.error = std::abs(p.refined - p.whole) / 15.0;
    return p;
  };

  std::priority_queue<Panel> heap;
  std::vector<Panel> settled;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b >= a)) throw DomainError("quadrature breakpoints must be sorted");
    if (b == a) continue;
    Panel p = make(a, b, eval(a), eval(0.5 * (a + b)), eval(b));
    value += p.refined + (p.refined - p.whole) / 15.0;
    error += p.error;
    heap.push(p);
  }

  while (!heap.empty() && error > std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
    if (evals + 4 > opts.max_evaluations) {
      throw NonConvergenceError("adaptive quadrature exceeded its evaluation budget");
    }
    Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      // Panel cannot be split further in floating point; accept it.
      settled.push_back(p);
      continue;
    }
    value -= p.refined + (p.refined - p.whole) / 15.0;
    error -= p.error;
    Panel left = make(p.a, m, p.fa, p.fl, p.fm);
    Panel right = make(m, p.b, p.fm, p.fr, p.fb);
    for (const Panel* q : {&left, &right}) {
      value += q->refined + (q->refined - q->whole) / 15.0;
      error += q->error;
      heap.push(*q);
    }
  }
  // The running error sum accumulates cancellation noise; recompute it.
  double total_error = 0.0;
  double total_value = 0.0;
  for (const Panel& p : settled) {
    total_error += p.error;
    total_value += p.refined + (p.refined - p.whole) / 15.0;
  }
  while (!heap.empty()) {
    total_error += heap.top().error;
    total_value += heap.top().refined + (heap.top().refined - heap.top().whole) / 15.0;
    heap.pop();
  }
  return {total_value, total_error, evals};
}

}  // namespace spadsim
