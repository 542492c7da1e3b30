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

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "puffer/pair.hpp"
#include "puffer/tabular.hpp"

namespace puffer::fixture {

inline std::string data_path(const std::string& name) { return std::string(PUFFER_DATA_DIR) + "/" + name; }

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

inline CountTable adult_counts() { return count_table_from_json(read_json(data_path("adult_education_by_race.json"))); }

inline std::map<std::string, DiscreteDistribution> adult_conditionals() {
  return empirical_conditionals(adult_counts());
}

// Rows conditioned on `White`, columns on `Asian-Pac-Islander`.
inline DiscriminativePair adult_pair() {
  auto c = adult_conditionals();
  return DiscriminativePair("White", "Asian-Pac-Islander", c.at("White"), c.at("Asian-Pac-Islander"),
                            "adult");
}

// Reference Laplace variance against ε for the Adult pair, strict and relaxed.
struct VarianceSeries {
  std::vector<double> epsilon;
  std::vector<double> strict;
  std::vector<double> relaxed;
};

inline VarianceSeries adult_variance_series() {
  return {{0.8, 1.3, 1.8, 2.3, 2.8, 3.3, 3.8, 4.3, 4.8, 5.3, 5.8},
          {12.5, 4.73372781065089, 2.46913580246914, 1.51228733459357, 1.02040816326531,
           0.734618916437098, 0.554016620498615, 0.432666306111412, 0.347222222222222,
           0.284798860804557, 0.237812128418549},
          {3.125, 1.18343195266272, 0.617283950617284, 0.397579269785382, 0.305394110969956,
           0.244884060038036, 0.202304351924927, 0.170824401238967, 0.146680137698887,
           0.127631329335633, 0.112262755234664}};
}

}  // namespace puffer::fixture
