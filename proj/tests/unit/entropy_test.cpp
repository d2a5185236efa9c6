// Copyright 2026 The Triage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "triage/active_learning.hpp"
#include "triage/naive_bayes.hpp"

namespace triage {
namespace {

TEST(Entropy, UniformDistributionGivesLogK) {
  for (std::size_t k : {2u, 3u, 6u, 11u}) {
    const std::vector<double> p(k, 1.0 / static_cast<double>(k));
    EXPECT_NEAR(entropy(p), std::log(static_cast<double>(k)), 1e-9) << "k=" << k;
  }
}

TEST(Entropy, DeterministicDistributionGivesZero) {
  EXPECT_EQ(entropy(std::vector<double>{0.0, 1.0, 0.0}), 0.0);
  EXPECT_EQ(entropy(std::vector<double>{1.0}), 0.0);
}

TEST(Entropy, ZeroTimesLogZeroCountsAsZero) {
  EXPECT_NEAR(entropy(std::vector<double>{0.5, 0.5, 0.0, 0.0}), std::log(2.0), 1e-12);
  EXPECT_FALSE(std::isnan(entropy(std::vector<double>{0.0, 0.0, 1.0})));
}

TEST(Entropy, HandComputedTwoPointValue) {
  // -(0.25 ln 0.25 + 0.75 ln 0.75)
  EXPECT_NEAR(entropy(std::vector<double>{0.25, 0.75}), 0.5623351446188083, 1e-12);
}

TEST(Entropy, InvariantUnderPermutation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(7);
    for (auto& v : p) v = u(rng);
    normalize_distribution(p);
    const double h = entropy(p);
    std::shuffle(p.begin(), p.end(), rng);
    EXPECT_NEAR(entropy(p), h, 1e-12);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(7.0) + 1e-12);
  }
}

TEST(EntropyTable, SerialAndParallelAgreeAndNullModelIsUniform) {
  Dataset ds;
  ds.class_names = std::vector<std::string>(kNumRiskClasses, "c");
  ds.X = Matrix(0, 2);
  for (int i = 0; i < 60; ++i) {
    const double row[2] = {static_cast<double>(i % 6) + 0.1 * i, static_cast<double>(i % 3)};
    ds.X.append_row(row);
    ds.y.push_back(i % 6);
  }
  const auto nb = GaussianNaiveBayes::fit(ds);
  const std::array<const Classifier*, kNumExpertTargets> models = {&nb, nullptr, nullptr};
  const Matrix a = entropy_table(models, ds.X, Execution::serial);
  const Matrix b = entropy_table(models, ds.X, Execution::parallel);
  EXPECT_EQ(a, b);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    EXPECT_NEAR(a(r, 1), std::log(11.0), 1e-12);
    EXPECT_NEAR(a(r, 2), std::log(11.0), 1e-12);
  }
}

}  // namespace
}  // namespace triage
