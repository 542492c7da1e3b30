// Copyright 2026 The Puffer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "puffer/error.hpp"

namespace puffer {

struct BisectionOptions {
  double tolerance = 1e-10;     // on the bracket width
  int max_iterations = 200;
  int max_expansions = 64;      // doublings of the bracket width per side
};

struct RootResult {
  double root;
  int iterations;
};

// Root of a nonincreasing function. Starting from [lo, hi], the bracket is
// widened by doubling its width until f(lo) >= 0 >= f(hi), then bisected.
// Returns the upper end of the final bracket, so f(root) <= 0 always holds.
template <class F>
RootResult bisect_decreasing(F&& f, double lo, double hi, const BisectionOptions& opts = {}) {
  if (!(lo < hi)) throw NumericError("bisection: empty initial bracket");
  double f_lo = f(lo);
  double f_hi = f(hi);
  for (int k = 0; f_lo < 0.0; ++k) {
    if (k == opts.max_expansions) {
      std::ostringstream msg;
      msg << "bisection: no sign change below " << lo << " (f = " << f_lo << ") after "
          << opts.max_expansions << " expansions";
      throw NumericError(msg.str());
    }
    const double width = hi - lo;
    hi = lo;
    f_hi = f_lo;
    lo -= 2.0 * width;
    f_lo = f(lo);
  }
  for (int k = 0; f_hi > 0.0; ++k) {
    if (k == opts.max_expansions) {
      std::ostringstream msg;
      msg << "bisection: no sign change above " << hi << " (f = " << f_hi << ") after "
          << opts.max_expansions << " expansions";
      throw NumericError(msg.str());
    }
    const double width = hi - lo;
    lo = hi;
    f_lo = f_hi;
    hi += 2.0 * width;
    f_hi = f(hi);
  }
  if (f_hi == 0.0) return {hi, 0};
  if (f_lo == 0.0) return {lo, 0};
  int it = 0;
  while (hi - lo > opts.tolerance) {
    if (it == opts.max_iterations) {
      throw NumericError("bisection: iteration cap reached with bracket width " +
                         std::to_string(hi - lo));
    }
    ++it;
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (std::isnan(f_mid)) throw NumericError("bisection: objective returned NaN");
    if (f_mid == 0.0) return {mid, it};
    if (f_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {hi, it};
}

}  // namespace puffer
