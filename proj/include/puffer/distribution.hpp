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
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "puffer/error.hpp"

namespace puffer {

inline constexpr double kNormalizationTolerance = 1e-12;

// Finite distribution on the real line. Support is strictly increasing and
// masses sum to one. Zero-mass atoms are allowed and kept until pruned().
class DiscreteDistribution {
 public:
  // Normalizes `weights` and sorts atoms by support value.
  static DiscreteDistribution from_weights(std::span<const double> support,
                                           std::span<const double> weights) {
    if (support.empty()) throw ValidationError("distribution: empty support");
    if (support.size() != weights.size()) {
      throw ValidationError("distribution: support has " +
                            std::to_string(support.size()) +
                            " values but weights has " +
                            std::to_string(weights.size()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!std::isfinite(support[i])) {
        throw ValidationError("distribution: non-finite support value at index " +
                              std::to_string(i));
      }
      if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
        throw ValidationError("distribution: negative or non-finite weight at index " +
                              std::to_string(i));
      }
      total += weights[i];
    }
    if (!(total > 0.0)) throw ValidationError("distribution: weights sum to zero");

    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
    std::vector<double> sorted_support;
    std::vector<double> mass;
    sorted_support.reserve(order.size());
    mass.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k > 0 && support[order[k]] == support[order[k - 1]]) {
        throw ValidationError("distribution: duplicate support value at index " +
                              std::to_string(order[k]));
      }
      sorted_support.push_back(support[order[k]]);
      mass.push_back(weights[order[k]] / total);
    }
    return DiscreteDistribution(std::move(sorted_support), std::move(mass));
  }

  static DiscreteDistribution from_weights(const std::vector<double>& support,
                                           const std::vector<double>& weights) {
    return from_weights(std::span<const double>(support), std::span<const double>(weights));
  }

  // Takes masses as given (no renormalization) so serialized values
  // round-trip bit for bit. Support must already be strictly increasing.
  static DiscreteDistribution from_masses(std::vector<double> support, std::vector<double> mass) {
    if (support.empty()) throw ValidationError("distribution: empty support");
    if (support.size() != mass.size()) {
      throw ValidationError("distribution: support and mass lengths differ");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (!std::isfinite(support[i])) {
        throw ValidationError("distribution: non-finite support value at index " +
                              std::to_string(i));
      }
      if (!std::isfinite(mass[i]) || mass[i] < 0.0) {
        throw ValidationError("distribution: negative or non-finite mass at index " +
                              std::to_string(i));
      }
      if (i > 0 && !(support[i] > support[i - 1])) {
        throw ValidationError(support[i] == support[i - 1]
                                  ? "distribution: duplicate support value at index " +
                                        std::to_string(i)
                                  : "distribution: support not increasing at index " +
                                        std::to_string(i));
      }
      total += mass[i];
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      throw ValidationError("distribution: masses sum to " + std::to_string(total) +
                            ", expected 1");
    }
    return DiscreteDistribution(std::move(support), std::move(mass));
  }

  static DiscreteDistribution dirac(double at) { return DiscreteDistribution({at}, {1.0}); }

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& mass() const { return mass_; }
  std::size_t size() const { return support_.size(); }
  double min() const { return support_.front(); }
  double max() const { return support_.back(); }

  // Mass of the atom located exactly at `x`, zero when `x` is not an atom.
  double mass_at(double x) const {
    auto it = std::lower_bound(support_.begin(), support_.end(), x);
    if (it == support_.end() || *it != x) return 0.0;
    return mass_[static_cast<std::size_t>(it - support_.begin())];
  }

  // Right-continuous: includes the atom at `x`.
  double cdf(double x) const {
    auto end = std::upper_bound(support_.begin(), support_.end(), x);
    if (end == support_.end()) return 1.0;
    double acc = 0.0;
    for (auto it = support_.begin(); it != end; ++it) {
      acc += mass_[static_cast<std::size_t>(it - support_.begin())];
    }
    return std::min(acc, 1.0);
  }

  // Cumulative mass at each atom; the last entry is pinned to exactly 1.
  std::vector<double> cumulative() const {
    std::vector<double> out(mass_.size());
    std::partial_sum(mass_.begin(), mass_.end(), out.begin());
    out.back() = 1.0;
    return out;
  }

  DiscreteDistribution pruned() const {
    std::vector<double> s;
    std::vector<double> m;
    for (std::size_t i = 0; i < size(); ++i) {
      if (mass_[i] > 0.0) {
        s.push_back(support_[i]);
        m.push_back(mass_[i]);
      }
    }
    return DiscreteDistribution(std::move(s), std::move(m));
  }

  double mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < size(); ++i) acc += support_[i] * mass_[i];
    return acc;
  }

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  DiscreteDistribution(std::vector<double> support, std::vector<double> mass)
      : support_(std::move(support)), mass_(std::move(mass)) {}

  std::vector<double> support_;
  std::vector<double> mass_;
};

inline double cdf(const DiscreteDistribution& dist, double x) { return dist.cdf(x); }

// Law of a sum of independent Bernoulli(p_i), on {0, ..., V}.
inline DiscreteDistribution poisson_binomial(std::span<const double> probabilities) {
  std::vector<double> pmf{1.0};
  pmf.reserve(probabilities.size() + 1);
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("poisson_binomial: probability at index " + std::to_string(i) +
                            " is outside [0, 1]");
    }
    pmf.push_back(0.0);
    for (std::size_t k = pmf.size() - 1; k > 0; --k) {
      pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
    }
    pmf[0] *= 1.0 - p;
  }
  std::vector<double> support(pmf.size());
  std::iota(support.begin(), support.end(), 0.0);
  return DiscreteDistribution::from_weights(support, pmf);
}

inline DiscreteDistribution poisson_binomial(const std::vector<double>& probabilities) {
  return poisson_binomial(std::span<const double>(probabilities));
}

namespace detail {

// Atoms closer than this are treated as one point when combining
// distributions whose support is not on an integer grid.
inline constexpr double kAtomMergeTolerance = 1e-9;

inline bool all_integral(const std::vector<double>& values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return v == std::nearbyint(v) && std::abs(v) < 1e15; });
}

// Collapses (value, mass) pairs into a distribution, merging equal values on
// integer grids and near-equal values otherwise.
inline DiscreteDistribution collapse_atoms(std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end());
  std::vector<double> support;
  std::vector<double> mass;
  for (const auto& [value, m] : atoms) {
    if (!support.empty() && value - support.back() <= kAtomMergeTolerance) {
      mass.back() += m;
    } else {
      support.push_back(value);
      mass.push_back(m);
    }
  }
  return DiscreteDistribution::from_weights(support, mass);
}

}  // namespace detail

// Law of X + Y for independent X ~ a, Y ~ b.
inline DiscreteDistribution convolve(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  if (detail::all_integral(a.support()) && detail::all_integral(b.support())) {
    const auto lo = static_cast<long long>(a.min() + b.min());
    const auto hi = static_cast<long long>(a.max() + b.max());
    std::vector<double> pmf(static_cast<std::size_t>(hi - lo + 1), 0.0);
    std::vector<bool> present(pmf.size(), false);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        const auto k = static_cast<std::size_t>(
            static_cast<long long>(a.support()[i] + b.support()[j]) - lo);
        pmf[k] += a.mass()[i] * b.mass()[j];
        present[k] = true;
      }
    }
    std::vector<double> support;
    std::vector<double> mass;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      if (!present[k]) continue;
      support.push_back(static_cast<double>(lo + static_cast<long long>(k)));
      mass.push_back(pmf[k]);
    }
    return DiscreteDistribution::from_weights(support, mass);
  }
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      atoms.emplace_back(a.support()[i] + b.support()[j], a.mass()[i] * b.mass()[j]);
    }
  }
  return detail::collapse_atoms(std::move(atoms));
}

inline DiscreteDistribution shift(const DiscreteDistribution& dist, double offset) {
  std::vector<double> support = dist.support();
  for (double& v : support) v += offset;
  return DiscreteDistribution::from_weights(support, dist.mass());
}

// Σ_k w_k · components[k]; weights must be nonnegative and sum to one.
inline DiscreteDistribution mixture(std::span<const DiscreteDistribution> components,
                                    std::span<const double> weights) {
  if (components.empty() || components.size() != weights.size()) {
    throw ValidationError("mixture: component and weight counts differ or are zero");
  }
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t k = 0; k < components.size(); ++k) {
    for (std::size_t i = 0; i < components[k].size(); ++i) {
      atoms.emplace_back(components[k].support()[i], weights[k] * components[k].mass()[i]);
    }
  }
  return detail::collapse_atoms(std::move(atoms));
}

inline void to_json(nlohmann::json& j, const DiscreteDistribution& d) {
  j = nlohmann::json{{"support", d.support()}, {"mass", d.mass()}};
}

// {"support", "mass"} is read exactly; {"support", "weights"} is normalized.
inline DiscreteDistribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("support") || !(j.contains("mass") || j.contains("weights"))) {
    throw ValidationError("distribution JSON needs \"support\" and \"mass\" (or \"weights\") arrays");
  }
  try {
    const auto support = j.at("support").get<std::vector<double>>();
    if (!j.contains("mass")) {
      return DiscreteDistribution::from_weights(support, j.at("weights").get<std::vector<double>>());
    }
    return DiscreteDistribution::from_masses(support, j.at("mass").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("distribution JSON: ") + e.what());
  }
}

}  // namespace puffer
