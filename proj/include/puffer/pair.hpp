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

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "puffer/distribution.hpp"
#include "puffer/error.hpp"

namespace puffer {

// Two secrets that must stay indistinguishable, with the data distribution
// conditioned on each under one adversary prior.
struct DiscriminativePair {
  std::string first_secret;
  std::string second_secret;
  DiscreteDistribution first;
  DiscreteDistribution second;
  std::string prior = "default";

  DiscriminativePair(std::string s_i, std::string s_j, DiscreteDistribution p,
                     DiscreteDistribution q, std::string prior_tag = "default")
      : first_secret(std::move(s_i)),
        second_secret(std::move(s_j)),
        first(std::move(p)),
        second(std::move(q)),
        prior(std::move(prior_tag)) {
    if (first_secret == second_secret) {
      throw ValidationError("discriminative pair: secrets must differ, got '" + first_secret +
                            "' twice");
    }
  }

  DiscriminativePair swapped() const {
    return DiscriminativePair(second_secret, first_secret, second, first, prior);
  }
};

inline void to_json(nlohmann::json& j, const DiscriminativePair& pair) {
  j = nlohmann::json{{"s_i", pair.first_secret},
                     {"s_j", pair.second_secret},
                     {"prior", pair.prior},
                     {"p", pair.first},
                     {"q", pair.second}};
}

inline DiscriminativePair pair_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("pair JSON must be an object");
  for (const char* key : {"s_i", "s_j", "p", "q"}) {
    if (!j.contains(key)) throw ValidationError(std::string("pair JSON missing \"") + key + "\"");
  }
  return DiscriminativePair(j.at("s_i").get<std::string>(), j.at("s_j").get<std::string>(),
                            distribution_from_json(j.at("p")), distribution_from_json(j.at("q")),
                            j.value("prior", std::string("default")));
}

}  // namespace puffer
