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

#include "puffer/distribution.hpp"

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace puffer {
namespace {

TEST(FromWeights, NormalizesFourPointExample) {
  auto d = DiscreteDistribution::from_weights({1, 2, 3, 4}, {1.0 / 3, 1.0 / 6, 1.0 / 3, 1.0 / 6});
  const std::vector<double> expected{1.0 / 3, 1.0 / 6, 1.0 / 3, 1.0 / 6};
  ASSERT_EQ(d.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(d.mass()[i], expected[i], 1e-12);
}

TEST(FromWeights, SingleAtomIsDirac) {
  auto d = DiscreteDistribution::from_weights({0.0}, {5.0});
  EXPECT_EQ(d.support(), std::vector<double>{0.0});
  EXPECT_EQ(d.mass(), std::vector<double>{1.0});
}

TEST(FromWeights, SortsAndNormalizes) {
  auto d = DiscreteDistribution::from_weights({3, 1, 2}, {1, 1, 2});
  EXPECT_EQ(d.support(), (std::vector<double>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(d.mass()[0], 0.25);
  EXPECT_DOUBLE_EQ(d.mass()[1], 0.5);
  EXPECT_DOUBLE_EQ(d.mass()[2], 0.25);
}

TEST(FromWeights, RejectsBadInput) {
  EXPECT_THROW(DiscreteDistribution::from_weights(std::vector<double>{}, std::vector<double>{}),
               ValidationError);
  EXPECT_THROW(DiscreteDistribution::from_weights({1, 2}, {1}), ValidationError);
  EXPECT_THROW(DiscreteDistribution::from_weights({1, 2}, {0, 0}), ValidationError);
  try {
    DiscreteDistribution::from_weights({1, 2, 3}, {1, -1, 1});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos);
  }
  try {
    DiscreteDistribution::from_weights({4, 1, 4}, {1, 1, 1});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
  }
}

TEST(FromWeights, KeepsZeroAtomsUntilPruned) {
  auto d = DiscreteDistribution::from_weights({1, 2, 3}, {1, 0, 1});
  EXPECT_EQ(d.size(), 3u);
  auto p = d.pruned();
  EXPECT_EQ(p.support(), (std::vector<double>{1, 3}));
}

TEST(Cdf, FourPointExamples) {
  auto p = DiscreteDistribution::from_weights({1, 2, 3, 4}, {1.0 / 3, 1.0 / 6, 1.0 / 3, 1.0 / 6});
  auto q = DiscreteDistribution::from_weights({1, 2, 3, 4}, {1.0 / 4, 1.0 / 4, 1.0 / 6, 1.0 / 3});
  EXPECT_NEAR(cdf(p, 2.0), 0.5, 1e-12);
  EXPECT_NEAR(cdf(q, 3.0), 1.0 / 4 + 1.0 / 4 + 1.0 / 6, 1e-12);
  EXPECT_EQ(cdf(p, 4.0), 1.0);
  EXPECT_EQ(cdf(q, 4.0), 1.0);
  EXPECT_EQ(cdf(p, 0.999), 0.0);
  EXPECT_NEAR(cdf(p, 2.5), 0.5, 1e-12);
}

TEST(Cdf, MonotoneAndNormalizedOnRandomDistributions) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 12);
    std::vector<double> s, w;
    for (int i = 0; i < n; ++i) {
      s.push_back(i * 1.5 + unif(gen));
      w.push_back(unif(gen));
    }
    auto d = DiscreteDistribution::from_weights(s, w);
    double sum = 0.0;
    for (double m : d.mass()) sum += m;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(d.cdf(d.min() - 1.0), 0.0);
    double prev = 0.0;
    for (double x = d.min() - 1.0; x <= d.max() + 1.0; x += 0.05) {
      const double c = d.cdf(x);
      EXPECT_GE(c, prev);
      prev = c;
    }
    EXPECT_EQ(d.cdf(d.max()), 1.0);
  }
}

TEST(PoissonBinomial, HomogeneousMatchesBinomial) {
  auto d = poisson_binomial(std::vector<double>(25, 0.7));
  ASSERT_EQ(d.size(), 26u);
  // Binomial(25, 0.7) series of the V = 25 absence distribution.
  EXPECT_NEAR(d.mass_at(17), 0.165079581131525, 1e-12);
  EXPECT_NEAR(d.mass_at(0), 8.47288609443003e-14, 1e-12);
  EXPECT_NEAR(d.mass_at(20), 0.103016523533929, 1e-12);
  for (unsigned k = 0; k <= 25; ++k) {
    EXPECT_NEAR(d.mass_at(k), oracle::binomial_pmf(25, k, 0.7), 1e-12) << k;
  }
}

TEST(PoissonBinomial, DeterministicTrial) {
  auto d = poisson_binomial(std::vector<double>{1.0});
  EXPECT_EQ(d.mass_at(1), 1.0);
  EXPECT_EQ(d.pruned().support(), std::vector<double>{1.0});
}

TEST(PoissonBinomial, MatchesEnumeration) {
  const std::vector<double> small{0.2, 0.5, 0.9};
  auto d = poisson_binomial(small);
  auto ref = oracle::poisson_binomial_by_enumeration(small);
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(d.mass_at(k), ref[k], 1e-12);

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t v = 1; v <= 12; ++v) {
    std::vector<double> p(v);
    for (auto& x : p) x = unif(gen);
    auto got = poisson_binomial(p);
    auto want = oracle::poisson_binomial_by_enumeration(p);
    for (std::size_t k = 0; k <= v; ++k) EXPECT_NEAR(got.mass_at(k), want[k], 1e-12) << v << "/" << k;
  }
}

TEST(PoissonBinomial, RejectsOutOfRange) {
  EXPECT_THROW(poisson_binomial(std::vector<double>{0.5, 1.2}), ValidationError);
  EXPECT_THROW(poisson_binomial(std::vector<double>{-0.1}), ValidationError);
}

TEST(Convolve, IntegerAndRealGrids) {
  auto a = DiscreteDistribution::from_weights({0, 1}, {0.5, 0.5});
  auto two = convolve(a, a);
  EXPECT_EQ(two.support(), (std::vector<double>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(two.mass()[1], 0.5);

  auto r = DiscreteDistribution::from_weights({0.1, 0.2}, {0.5, 0.5});
  auto rr = convolve(r, r);
  // 0.1 + 0.2 and 0.2 + 0.1 land on one atom even with rounding noise.
  EXPECT_EQ(rr.size(), 3u);
  EXPECT_NEAR(rr.mass()[1], 0.5, 1e-15);
}

TEST(Json, RoundTripsBitIdentically) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s, w;
    for (int i = 0; i < 9; ++i) {
      s.push_back(i + unif(gen) * 1e-3);
      w.push_back(unif(gen));
    }
    auto d = DiscreteDistribution::from_weights(s, w);
    nlohmann::json j = d;
    auto back = distribution_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back, d);
  }
  EXPECT_THROW(distribution_from_json(nlohmann::json{{"support", {1, 2}}, {"mass", {0.5, 0.6}}}),
               ValidationError);
  EXPECT_THROW(distribution_from_json(nlohmann::json{{"support", {2, 1}}, {"mass", {0.5, 0.5}}}),
               ValidationError);
}

}  // namespace
}  // namespace puffer
