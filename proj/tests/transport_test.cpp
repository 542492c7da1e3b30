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

#include "puffer/transport.hpp"

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "puffer/reference_cases.hpp"
#include "support/oracles.hpp"

namespace puffer {
namespace {

struct RandomPair {
  DiscreteDistribution p;
  DiscreteDistribution q;
};

RandomPair random_pair(std::mt19937_64& gen, int max_atoms, bool integer_support) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto make = [&] {
    const int n = 1 + static_cast<int>(gen() % static_cast<unsigned>(max_atoms));
    std::vector<double> s, w;
    double x = unif(gen) * 3.0;
    for (int i = 0; i < n; ++i) {
      x += integer_support ? 1.0 + static_cast<double>(gen() % 3) : 0.1 + unif(gen) * 2.0;
      s.push_back(integer_support ? std::round(x) : x);
      w.push_back(unif(gen) < 0.15 ? 0.0 : unif(gen));
    }
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[0] = 1.0;
    return DiscreteDistribution::from_weights(s, w);
  };
  auto p = make();
  auto q = make();
  return {p, q};
}

TEST(OptimalPlan, ReproducesFourPointTable) {
  const auto pair = reference::four_point_pair();
  const auto plan = optimal_plan(pair.first, pair.second);
  ASSERT_EQ(plan.entries().size(), 6u);
  EXPECT_NEAR(plan.mass_at(1, 1), 1.0 / 4, 1e-12);
  EXPECT_NEAR(plan.mass_at(1, 2), 1.0 / 12, 1e-12);
  EXPECT_NEAR(plan.mass_at(2, 2), 1.0 / 6, 1e-12);
  EXPECT_NEAR(plan.mass_at(3, 3), 1.0 / 6, 1e-12);
  EXPECT_NEAR(plan.mass_at(3, 4), 1.0 / 6, 1e-12);
  EXPECT_NEAR(plan.mass_at(4, 4), 1.0 / 6, 1e-12);
  EXPECT_DOUBLE_EQ(plan_sensitivity(plan, Metric::absolute()), 1.0);
}

TEST(OptimalPlan, ReproducesFivePointTable) {
  const auto pair = reference::five_point_pair();
  const auto plan = optimal_plan(pair.first, pair.second);
  ASSERT_EQ(plan.entries().size(), 7u);
  EXPECT_NEAR(plan.mass_at(1, 2), 0.075, 1e-12);
  EXPECT_NEAR(plan.mass_at(1, 3), 0.125, 1e-12);
  EXPECT_NEAR(plan.mass_at(2, 3), 0.225, 1e-12);
  EXPECT_NEAR(plan.mass_at(3, 3), 0.15, 1e-12);
  EXPECT_NEAR(plan.mass_at(3, 4), 0.225, 1e-12);
  EXPECT_NEAR(plan.mass_at(3, 5), 0.125, 1e-12);
  EXPECT_NEAR(plan.mass_at(4, 5), 0.075, 1e-12);
  EXPECT_DOUBLE_EQ(plan_sensitivity(plan, Metric::absolute()), 2.0);
}

TEST(OptimalPlan, IdenticalMarginalsGiveDiagonal) {
  auto p = DiscreteDistribution::from_weights({-1, 0.5, 2, 7}, {0.1, 0.2, 0.3, 0.4});
  const auto plan = optimal_plan(p, p);
  ASSERT_EQ(plan.entries().size(), 4u);
  for (const auto& e : plan.entries()) {
    EXPECT_EQ(e.row, e.col);
    EXPECT_NEAR(e.mass, p.mass()[e.row], 1e-15);
  }
  EXPECT_EQ(plan_sensitivity(plan, Metric::absolute()), 0.0);
}

TEST(OptimalPlan, AgreesWithCmfSecondDifference) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto [p, q] = random_pair(gen, 8, true);
    const auto plan = optimal_plan(p, q);
    const auto dense = oracle::plan_by_cmf_difference(p.mass(), q.mass());
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < q.size(); ++j) {
        double got = 0.0;
        for (const auto& e : plan.entries()) {
          if (e.row == i && e.col == j) got = e.mass;
        }
        EXPECT_NEAR(got, std::max(dense[i][j], 0.0), 1e-12);
      }
    }
  }
}

TEST(OptimalPlan, CostMatchesLinearProgram) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 60; ++trial) {
    auto [p, q] = random_pair(gen, 6, trial % 2 == 0);
    const double got = transport_cost(optimal_plan(p, q), Metric::absolute());
    const double lp = oracle::transport_lp_cost(p.support(), p.mass(), q.support(), q.mass());
    EXPECT_NEAR(got, lp, 1e-9) << "trial " << trial;
    // Convex but not a metric: the same plan is still optimal.
    const auto sq = Metric("sq", [](double z) { return z * z; }, true);
    EXPECT_NEAR(transport_cost(optimal_plan(p, q), sq),
                oracle::transport_lp_cost(p.support(), p.mass(), q.support(), q.mass(), 2.0), 1e-9);
  }
}

TEST(OptimalPlan, StructuralInvariants) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 300; ++trial) {
    auto [p, q] = random_pair(gen, 10, trial % 3 != 0);
    const auto plan = optimal_plan(p, q);
    // Marginal conservation.
    EXPECT_LE(plan.marginal_error(), 1e-10);
    EXPECT_NEAR(plan.total_mass(), 1.0, 1e-10);
    // Comonotone support.
    double prev_col = -1e300;
    for (const auto& e : plan.entries()) {
      EXPECT_GT(e.mass, 0.0);
      EXPECT_GE(plan.col_value(e), prev_col);
      prev_col = plan.col_value(e);
    }
    // Dominance over the naive support sensitivity.
    EXPECT_LE(plan_sensitivity(plan, Metric::absolute()),
              support_sensitivity(p, q, Metric::absolute()));
    // Transpose symmetry.
    const auto back = optimal_plan(q, p).transposed();
    ASSERT_EQ(back.entries().size(), plan.entries().size());
    for (std::size_t k = 0; k < back.entries().size(); ++k) {
      EXPECT_EQ(back.entries()[k].row, plan.entries()[k].row);
      EXPECT_EQ(back.entries()[k].col, plan.entries()[k].col);
      EXPECT_NEAR(back.entries()[k].mass, plan.entries()[k].mass, 1e-12);
    }
  }
}

TEST(W1Distance, Examples) {
  const auto pair = reference::four_point_pair();
  const auto l1 = Metric::absolute();
  const double expected = oracle::w1_by_cdf_difference(pair.first.support(), pair.first.mass(),
                                                       pair.second.support(), pair.second.mass());
  EXPECT_NEAR(expected, 0.25, 1e-12);
  EXPECT_NEAR(w1_distance(pair.first, pair.second, l1), 0.25, 1e-12);
  EXPECT_EQ(w1_distance(pair.first, pair.first, l1), 0.0);
  EXPECT_DOUBLE_EQ(w1_distance(DiscreteDistribution::dirac(0), DiscreteDistribution::dirac(3), l1), 3.0);
}

TEST(W1Distance, RandomPairsMatchCdfRoute) {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 100; ++trial) {
    auto [p, q] = random_pair(gen, 9, false);
    EXPECT_NEAR(w1_distance(p, q, Metric::absolute()),
                oracle::w1_by_cdf_difference(p.support(), p.mass(), q.support(), q.mass()), 1e-12);
  }
}

TEST(W1Distance, RefusesNonConvexMetric) {
  const auto pair = reference::four_point_pair();
  EXPECT_THROW(w1_distance(pair.first, pair.second, Metric::discrete()), ValidationError);
}

TEST(SupportSensitivity, Examples) {
  const auto pair = reference::four_point_pair();
  EXPECT_EQ(support_sensitivity(pair.first, pair.second, Metric::absolute()), 3.0);
  EXPECT_EQ(support_sensitivity(DiscreteDistribution::dirac(2.5), DiscreteDistribution::dirac(-1),
                                Metric::absolute()),
            3.5);
  const auto five = reference::five_point_pair();
  EXPECT_EQ(support_sensitivity(five.first, five.second, Metric::absolute()), 4.0);
  // Zero-mass atoms are not in the support.
  const auto padded = DiscreteDistribution::from_weights({1, 2, 10}, {1, 1, 0});
  EXPECT_EQ(support_sensitivity(padded, DiscreteDistribution::dirac(1), Metric::absolute()), 1.0);
}

TEST(PlanSensitivity, ScaledMetric) {
  const auto five = reference::five_point_pair();
  const auto plan = optimal_plan(five.first, five.second);
  EXPECT_DOUBLE_EQ(plan_sensitivity(plan, Metric::scaled_absolute(0.5)), 1.0);
}

TEST(PlanJson, ExportsTriplets) {
  const auto pair = reference::four_point_pair();
  nlohmann::json j = optimal_plan(pair.first, pair.second);
  EXPECT_EQ(j.at("row_support").size(), 4u);
  ASSERT_EQ(j.at("entries").size(), 6u);
  EXPECT_EQ(j.at("entries")[1][0], 0);
  EXPECT_EQ(j.at("entries")[1][1], 1);
  EXPECT_NEAR(j.at("entries")[1][2].get<double>(), 1.0 / 12, 1e-12);
}

}  // namespace
}  // namespace puffer
