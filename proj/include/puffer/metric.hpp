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
#include <functional>
#include <string>
#include <utility>

#include "puffer/error.hpp"

namespace puffer {

// Distance on the real line expressed as d(x - x'). Convexity is declared
// by whoever builds the metric; it is not inferred.
class Metric {
 public:
  Metric(std::string name, std::function<double(double)> distance, bool convex)
      : name_(std::move(name)), distance_(std::move(distance)), convex_(convex) {
    if (!distance_) throw ValidationError("metric: empty distance function");
  }

  // d(z) = |z|
  static Metric absolute() {
    return Metric("l1", [](double z) { return std::abs(z); }, true);
  }

  // d(z) = scale * |z|
  static Metric scaled_absolute(double scale) {
    if (!(scale > 0.0)) throw ValidationError("metric: scale must be positive");
    return Metric(
        "l1*" + std::to_string(scale), [scale](double z) { return scale * std::abs(z); }, true);
  }

  // d(z) = 1 for z != 0. A metric, but not convex.
  static Metric discrete() {
    return Metric("discrete", [](double z) { return z == 0.0 ? 0.0 : 1.0; }, false);
  }

  double operator()(double z) const { return distance_(z); }
  const std::string& name() const { return name_; }
  bool convex() const { return convex_; }

 private:
  std::string name_;
  std::function<double(double)> distance_;
  bool convex_;
};

}  // namespace puffer
