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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "puffer/distribution.hpp"
#include "puffer/error.hpp"
#include "puffer/metric.hpp"
#include "puffer/pair.hpp"

namespace puffer {

// X = Σ_i f_i(S_i). outputs[i][a] is f_i(a) for alphabet index a of user i.
class SeparableQuery {
 public:
  explicit SeparableQuery(std::vector<std::vector<double>> outputs) : outputs_(std::move(outputs)) {
    for (std::size_t i = 0; i < outputs_.size(); ++i) {
      for (double v : outputs_[i]) {
        if (!std::isfinite(v)) {
          throw ValidationError("query: non-finite output for user " + std::to_string(i));
        }
      }
    }
  }

  // f_i(a) = a on alphabets {0, ..., k_i - 1}.
  static SeparableQuery counting(const std::vector<std::size_t>& alphabet_sizes) {
    std::vector<std::vector<double>> outputs;
    for (std::size_t k : alphabet_sizes) {
      std::vector<double> row(k);
      for (std::size_t a = 0; a < k; ++a) row[a] = static_cast<double>(a);
      outputs.push_back(std::move(row));
    }
    return SeparableQuery(std::move(outputs));
  }

  double operator()(std::size_t user, std::size_t value) const { return outputs_.at(user).at(value); }
  const std::vector<double>& outputs(std::size_t user) const { return outputs_.at(user); }
  std::size_t users() const { return outputs_.size(); }

 private:
  std::vector<std::vector<double>> outputs_;
};

// V users with independent values S_i over alphabets {0, ..., k_i - 1}.
// priors[i][a] = P(S_i = a).
class UserSystem {
 public:
  UserSystem(std::vector<std::vector<double>> priors, SeparableQuery query)
      : priors_(std::move(priors)), query_(std::move(query)) {
    if (priors_.empty()) throw ValidationError("user system: needs at least one user");
    if (query_.users() != priors_.size()) {
      throw ValidationError("user system: query covers " + std::to_string(query_.users()) +
                            " users but priors cover " + std::to_string(priors_.size()));
    }
    for (std::size_t i = 0; i < priors_.size(); ++i) {
      const auto& p = priors_[i];
      if (p.empty() || p.size() != query_.outputs(i).size()) {
        throw ValidationError("user system: user " + std::to_string(i) +
                              " prior and query alphabet sizes differ");
      }
      double total = 0.0;
      for (double v : p) {
        if (!(v >= 0.0)) throw ValidationError("user system: negative prior for user " + std::to_string(i));
        total += v;
      }
      if (std::abs(total - 1.0) > kNormalizationTolerance) {
        throw ValidationError("user system: prior of user " + std::to_string(i) + " sums to " +
                              std::to_string(total));
      }
    }
  }

  // Every user Bernoulli(p_i) on {0, 1} under the counting query.
  static UserSystem bernoulli_counting(const std::vector<double>& p) {
    std::vector<std::vector<double>> priors;
    for (double pi : p) {
      if (!(pi >= 0.0 && pi <= 1.0)) throw ValidationError("user system: p outside [0, 1]");
      priors.push_back({1.0 - pi, pi});
    }
    return UserSystem(std::move(priors),
                      SeparableQuery::counting(std::vector<std::size_t>(p.size(), 2)));
  }

  std::size_t users() const { return priors_.size(); }
  std::size_t alphabet_size(std::size_t user) const { return priors_.at(user).size(); }
  const std::vector<double>& prior(std::size_t user) const { return priors_.at(user); }
  const SeparableQuery& query() const { return query_; }

  // Distribution of f_i(S_i) under user i's prior.
  DiscreteDistribution pushforward(std::size_t user) const {
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t a = 0; a < alphabet_size(user); ++a) {
      atoms.emplace_back(query_(user, a), priors_[user][a]);
    }
    return detail::collapse_atoms(std::move(atoms));
  }

 private:
  std::vector<std::vector<double>> priors_;
  SeparableQuery query_;
};

// S_i = a, or user i absent (S_i = ⊥_i).
struct SecretEvent {
  std::size_t user;
  std::optional<std::size_t> value;

  static SecretEvent value_of(std::size_t user, std::size_t a) { return {user, a}; }
  static SecretEvent absent(std::size_t user) { return {user, std::nullopt}; }

  std::string label() const {
    return "S" + std::to_string(user) + "=" + (value ? std::to_string(*value) : std::string("absent"));
  }
};

inline constexpr std::size_t kMaxConvolutionAtoms = 10000;

namespace detail {

// Law of Σ_{i' != skip} f_{i'}(S_{i'}).
inline DiscreteDistribution others_sum(const UserSystem& sys, std::size_t skip) {
  auto acc = DiscreteDistribution::dirac(0.0);
  for (std::size_t u = 0; u < sys.users(); ++u) {
    if (u == skip) continue;
    acc = convolve(acc, sys.pushforward(u));
    if (acc.size() > kMaxConvolutionAtoms) {
      throw ValidationError("scenario: running convolution exceeds " +
                            std::to_string(kMaxConvolutionAtoms) + " atoms");
    }
  }
  return acc;
}

}  // namespace detail

// P_{X|S_i}(· | event). A value event shifts the law of the other users'
// sum by f_i(a); absence mixes the value events under user i's prior.
inline DiscreteDistribution conditional_output_dist(const UserSystem& sys, const SecretEvent& event) {
  if (event.user >= sys.users()) {
    throw ValidationError("scenario: user index " + std::to_string(event.user) + " out of range");
  }
  if (event.value && *event.value >= sys.alphabet_size(event.user)) {
    throw ValidationError("scenario: value " + std::to_string(*event.value) +
                          " not in the alphabet of user " + std::to_string(event.user));
  }
  const auto rest = detail::others_sum(sys, event.user);
  if (event.value) return shift(rest, sys.query()(event.user, *event.value));

  std::vector<DiscreteDistribution> parts;
  for (std::size_t a = 0; a < sys.alphabet_size(event.user); ++a) {
    parts.push_back(shift(rest, sys.query()(event.user, a)));
  }
  return mixture(std::span<const DiscreteDistribution>(parts),
                 std::span<const double>(sys.prior(event.user)));
}

enum class PairMode { values, absence };

// Values mode: every unordered alphabet pair (S_i=a, S_i=b), a < b.
// Absence mode: (S_i=a, S_i=⊥_i) for every a.
inline std::vector<DiscriminativePair> discriminative_pairs(const UserSystem& sys, std::size_t user,
                                                            PairMode mode,
                                                            const std::string& prior_tag = "scenario") {
  if (user >= sys.users()) {
    throw ValidationError("scenario: user index " + std::to_string(user) + " out of range");
  }
  const std::size_t k = sys.alphabet_size(user);
  std::vector<DiscreteDistribution> by_value;
  for (std::size_t a = 0; a < k; ++a) {
    by_value.push_back(conditional_output_dist(sys, SecretEvent::value_of(user, a)));
  }
  std::vector<DiscriminativePair> out;
  if (mode == PairMode::values) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        out.emplace_back(SecretEvent::value_of(user, a).label(), SecretEvent::value_of(user, b).label(),
                         by_value[a], by_value[b], prior_tag);
      }
    }
  } else {
    const auto absent = conditional_output_dist(sys, SecretEvent::absent(user));
    for (std::size_t a = 0; a < k; ++a) {
      out.emplace_back(SecretEvent::value_of(user, a).label(), SecretEvent::absent(user).label(),
                       by_value[a], absent, prior_tag);
    }
  }
  return out;
}

// max_{a,b} d(f_i(a) - f_i(b)). Does not depend on the priors. Absence pairs
// are bounded by the same value, so both modes return it.
inline double query_sensitivity(const UserSystem& sys, std::size_t user, const Metric& d,
                                PairMode /*mode*/ = PairMode::values) {
  if (user >= sys.users()) {
    throw ValidationError("scenario: user index " + std::to_string(user) + " out of range");
  }
  const auto& f = sys.query().outputs(user);
  double worst = 0.0;
  for (double fa : f) {
    for (double fb : f) worst = std::max(worst, d(fa - fb));
  }
  return worst;
}

// {"V": n, "priors": [[...], ...] or [p, ...] (Bernoulli shorthand),
//  "query": "counting" | [[f_0(0), f_0(1), ...], ...]}
inline UserSystem user_system_from_json(const nlohmann::json& j) {
  try {
    const auto users = j.at("V").get<std::size_t>();
    const auto& jp = j.at("priors");
    std::vector<std::vector<double>> priors;
    if (jp.is_array() && !jp.empty() && jp.front().is_number()) {
      for (double p : jp.get<std::vector<double>>()) priors.push_back({1.0 - p, p});
    } else {
      priors = jp.get<std::vector<std::vector<double>>>();
    }
    if (priors.size() == 1 && users > 1) priors.resize(users, priors.front());
    if (priors.size() != users) {
      throw ValidationError("scenario JSON: \"priors\" has " + std::to_string(priors.size()) +
                            " users, \"V\" says " + std::to_string(users));
    }
    const auto& jq = j.value("query", nlohmann::json("counting"));
    if (jq.is_string()) {
      if (jq.get<std::string>() != "counting") {
        throw ValidationError("scenario JSON: unknown query '" + jq.get<std::string>() + "'");
      }
      std::vector<std::size_t> sizes;
      for (const auto& p : priors) sizes.push_back(p.size());
      return UserSystem(std::move(priors), SeparableQuery::counting(sizes));
    }
    auto tables = jq.get<std::vector<std::vector<double>>>();
    if (tables.size() == 1 && users > 1) tables.resize(users, tables.front());
    return UserSystem(std::move(priors), SeparableQuery(std::move(tables)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario JSON: ") + e.what());
  }
}

}  // namespace puffer
