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

#include <vector>

#include "puffer/distribution.hpp"
#include "puffer/pair.hpp"

namespace puffer::reference {

// Two small conditional-distribution pairs on {1, ..., 4} and {1, ..., 5}
// used throughout the tests and by `puffer tables`.

inline DiscriminativePair four_point_pair() {
  const std::vector<double> x{1, 2, 3, 4};
  return DiscriminativePair(
      "s_i", "s_j",
      DiscreteDistribution::from_weights(x, {1.0 / 3, 1.0 / 6, 1.0 / 3, 1.0 / 6}),
      DiscreteDistribution::from_weights(x, {1.0 / 4, 1.0 / 4, 1.0 / 6, 1.0 / 3}), "example-1");
}

inline DiscriminativePair five_point_pair() {
  const std::vector<double> x{1, 2, 3, 4, 5};
  return DiscriminativePair("s_i", "s_j",
                            DiscreteDistribution::from_weights(x, {0.2, 0.225, 0.5, 0.075, 0.0}),
                            DiscreteDistribution::from_weights(x, {0.0, 0.075, 0.5, 0.225, 0.2}),
                            "example-2");
}

}  // namespace puffer::reference
