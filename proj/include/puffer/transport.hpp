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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "puffer/distribution.hpp"
#include "puffer/error.hpp"
#include "puffer/metric.hpp"

namespace puffer {

struct PlanEntry {
  std::size_t row;
  std::size_t col;
  double mass;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

// Sparse coupling between two discrete distributions. Rows index the atoms
// of the first distribution, columns those of the second. Only strictly
// positive entries are stored, sorted by (row, col).
class TransportPlan {
 public:
  TransportPlan(DiscreteDistribution rows, DiscreteDistribution cols,
                std::vector<PlanEntry> entries)
      : rows_(std::move(rows)), cols_(std::move(cols)), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const PlanEntry& a, const PlanEntry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
  }

  const std::vector<double>& row_support() const { return rows_.support(); }
  const std::vector<double>& col_support() const { return cols_.support(); }
  const std::vector<PlanEntry>& entries() const { return entries_; }
  const DiscreteDistribution& row_distribution() const { return rows_; }
  const DiscreteDistribution& col_distribution() const { return cols_; }

  double row_value(const PlanEntry& e) const { return rows_.support()[e.row]; }
  double col_value(const PlanEntry& e) const { return cols_.support()[e.col]; }

  // Mass at (x, x') by support value; zero when absent.
  double mass_at(double x, double x_prime) const {
    for (const auto& e : entries_) {
      if (row_value(e) == x && col_value(e) == x_prime) return e.mass;
    }
    return 0.0;
  }

  std::vector<double> row_marginals() const {
    std::vector<double> out(rows_.size(), 0.0);
    for (const auto& e : entries_) out[e.row] += e.mass;
    return out;
  }

  std::vector<double> col_marginals() const {
    std::vector<double> out(cols_.size(), 0.0);
    for (const auto& e : entries_) out[e.col] += e.mass;
    return out;
  }

  double total_mass() const {
    double acc = 0.0;
    for (const auto& e : entries_) acc += e.mass;
    return acc;
  }

  TransportPlan transposed() const {
    std::vector<PlanEntry> t;
    t.reserve(entries_.size());
    for (const auto& e : entries_) t.push_back({e.col, e.row, e.mass});
    return TransportPlan(cols_, rows_, std::move(t));
  }

  // Largest marginal deviation from the source distributions.
  double marginal_error() const {
    double worst = 0.0;
    const auto r = row_marginals();
    const auto c = col_marginals();
    for (std::size_t i = 0; i < r.size(); ++i) worst = std::max(worst, std::abs(r[i] - rows_.mass()[i]));
    for (std::size_t j = 0; j < c.size(); ++j) worst = std::max(worst, std::abs(c[j] - cols_.mass()[j]));
    return worst;
  }

 private:
  DiscreteDistribution rows_;
  DiscreteDistribution cols_;
  std::vector<PlanEntry> entries_;
};

inline constexpr double kPlanEntryFloor = 1e-15;
inline constexpr double kMarginalTolerance = 1e-10;

// Comonotone (quantile) coupling. Walks both cumulative mass sequences in
// step, north-west-corner style: entry (k, l) is the overlap of the CDF
// intervals (F[k-1], F[k]] and (G[l-1], G[l]], i.e. the second difference
// of min{F(x), G(x')}. Optimal for every convex cost d(x - x').
inline TransportPlan optimal_plan(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  const auto f = p.cumulative();
  const auto g = q.cumulative();
  std::vector<PlanEntry> entries;
  entries.reserve(p.size() + q.size());
  std::size_t k = 0;
  std::size_t l = 0;
  double f_prev = 0.0;
  double g_prev = 0.0;
  while (k < f.size() && l < g.size()) {
    const double overlap = std::min(f[k], g[l]) - std::max(f_prev, g_prev);
    if (overlap > kPlanEntryFloor) entries.push_back({k, l, overlap});
    if (f[k] < g[l]) {
      f_prev = f[k++];
    } else if (g[l] < f[k]) {
      g_prev = g[l++];
    } else {
      f_prev = f[k++];
      g_prev = g[l++];
    }
  }
  TransportPlan plan(p, q, std::move(entries));
  if (const double err = plan.marginal_error(); err > kMarginalTolerance) {
    throw NumericError("optimal_plan: marginal error " + std::to_string(err) +
                       " exceeds tolerance after dropping sub-floor entries");
  }
  return plan;
}

// max d(x - x') over the stored plan entries.
inline double plan_sensitivity(const TransportPlan& plan, const Metric& d) {
  double worst = 0.0;
  for (const auto& e : plan.entries()) {
    worst = std::max(worst, d(plan.row_value(e) - plan.col_value(e)));
  }
  return worst;
}

inline double plan_sensitivity(const TransportPlan& plan) {
  return plan_sensitivity(plan, Metric::absolute());
}

// Expected transport cost of `plan` under d.
inline double transport_cost(const TransportPlan& plan, const Metric& d) {
  double acc = 0.0;
  for (const auto& e : plan.entries()) acc += e.mass * d(plan.row_value(e) - plan.col_value(e));
  return acc;
}

// Kantorovich optimal cost. The closed-form plan is only optimal for convex
// d, so non-convex metrics are refused.
inline double w1_distance(const DiscreteDistribution& p, const DiscreteDistribution& q,
                          const Metric& d) {
  if (!d.convex()) {
    throw ValidationError("w1_distance: metric '" + d.name() + "' is not declared convex");
  }
  return transport_cost(optimal_plan(p, q), d);
}

// Sensitivity over the full supports: max d(x - x') for x in supp(p),
// x' in supp(q). Zero-mass atoms are ignored.
inline double support_sensitivity(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                  const Metric& d = Metric::absolute()) {
  const auto pp = p.pruned();
  const auto qq = q.pruned();
  double worst = 0.0;
  for (double x : pp.support()) {
    for (double y : qq.support()) worst = std::max(worst, d(x - y));
  }
  return worst;
}

inline void to_json(nlohmann::json& j, const TransportPlan& plan) {
  auto entries = nlohmann::json::array();
  for (const auto& e : plan.entries()) entries.push_back({e.row, e.col, e.mass});
  j = nlohmann::json{{"row_support", plan.row_support()},
                     {"col_support", plan.col_support()},
                     {"entries", std::move(entries)}};
}

}  // namespace puffer
