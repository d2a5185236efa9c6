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

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "triage/eval.hpp"
#include "triage/gbt.hpp"
#include "triage/mlp.hpp"
#include "triage/model.hpp"
#include "triage/naive_bayes.hpp"
#include "triage/random_forest.hpp"
#include "triage/svm.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

const std::vector<ModelKind> kAllKinds = {ModelKind::naive_bayes, ModelKind::random_forest, ModelKind::svm,
                                          ModelKind::mlp, ModelKind::gbt};

class AllClassifiers : public ::testing::TestWithParam<ModelKind> {};

TEST_P(AllClassifiers, ReachHighF1OnTwoGaussians) {
  const auto [train, test] = testing::shuffle_split(testing::two_gaussians(500, 2, 3.0, 1), 0.7, 2);
  auto params = default_params(GetParam());
  set_seed(params, 3);
  const auto model = fit_classifier(train, params);
  const auto pred = predict_batch(*model, test.X);
  EXPECT_GE(weighted_f1(test.y, pred, 2).weighted_f1, 0.9) << to_string(GetParam());
}

TEST_P(AllClassifiers, ProbabilitiesAreDistributions) {
  Dataset ds = testing::two_gaussians(60, 3, 2.0, 4);
  ds.class_names = {"a", "b", "c"};
  for (std::size_t i = 0; i < ds.size(); i += 3) ds.y[i] = 2;
  auto params = default_params(GetParam());
  set_seed(params, 5);
  const auto model = fit_classifier(ds, params);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x = {n(rng), n(rng), i % 10 == 0 ? 1e12 : n(rng)};
    const auto p = model->predict_proba(x);
    ASSERT_EQ(p.size(), 3u);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      EXPECT_FALSE(std::isnan(v));
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST_P(AllClassifiers, SaveLoadRoundTripIsBitStable) {
  const Dataset ds = testing::two_gaussians(40, 4, 1.0, 7);
  auto params = default_params(GetParam());
  set_seed(params, 8);
  const auto model = fit_classifier(ds, params);
  const ModelMetadata meta{"0123456789abcdef", "risk", {"a", "b"}};
  const std::string blob = save_model(*model, meta);
  const auto loaded = load_model(blob, GetParam());
  EXPECT_EQ(save_model(*loaded.model, loaded.meta), blob);
  EXPECT_EQ(loaded.meta.feature_spec_hash, meta.feature_spec_hash);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    EXPECT_EQ(loaded.model->predict_proba(ds.X.row(r)), model->predict_proba(ds.X.row(r)));
  }
}

TEST_P(AllClassifiers, SerialAndParallelAgree) {
  const Dataset ds = testing::two_gaussians(80, 3, 1.0, 9);
  auto params = default_params(GetParam());
  set_seed(params, 10);
  const auto a = fit_classifier(ds, params, Execution::serial);
  const auto b = fit_classifier(ds, params, Execution::parallel);
  EXPECT_EQ(a->to_json(), b->to_json());
  EXPECT_EQ(predict_proba_batch(*a, ds.X, Execution::serial), predict_proba_batch(*a, ds.X, Execution::parallel));
}

INSTANTIATE_TEST_SUITE_P(Kinds, AllClassifiers, ::testing::ValuesIn(kAllKinds),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// ---------------------------------------------------------------------------

double normal_pdf(double x, double mean, double var) {
  return std::exp(-(x - mean) * (x - mean) / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
}

TEST(NaiveBayes, PosteriorMatchesClosedFormInOneDimension) {
  Dataset ds;
  ds.class_names = {"low", "high"};
  ds.X = Matrix(0, 1);
  for (double v : {0.0, 1.0, 2.0, 4.0, 5.0, 6.0, 7.0}) {
    const double row[1] = {v};
    ds.X.append_row(row);
    ds.y.push_back(v < 3 ? 0 : 1);
  }
  const auto nb = GaussianNaiveBayes::fit(ds);
  // Class 0: mean 1, variance 2/3. Class 1: mean 5.5, variance 1.25.
  // Smoothing adds 1e-9 times the variance of all seven values.
  const double all_mean = 25.0 / 7.0;
  double all_var = 0.0;
  for (double v : {0.0, 1.0, 2.0, 4.0, 5.0, 6.0, 7.0}) all_var += (v - all_mean) * (v - all_mean) / 7.0;
  const double eps = 1e-9 * all_var;
  for (double x : {-1.0, 0.5, 2.5, 3.0, 3.7, 8.0}) {
    const double a = 3.0 / 7.0 * normal_pdf(x, 1.0, 2.0 / 3.0 + eps);
    const double b = 4.0 / 7.0 * normal_pdf(x, 5.5, 1.25 + eps);
    const auto p = nb.predict_proba(std::vector<double>{x});
    EXPECT_NEAR(p[0], a / (a + b), 1e-6) << "x=" << x;
    EXPECT_NEAR(p[1], b / (a + b), 1e-6) << "x=" << x;
  }
}

// ---------------------------------------------------------------------------
// Brute-force split oracles

Dataset random_dataset(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset ds;
  for (std::size_t c = 0; c < k; ++c) ds.class_names.push_back(std::to_string(c));
  ds.X = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) ds.X(i, j) = u(rng);
    // Label depends on the features so that splits are informative.
    const double s = ds.X(i, 0) + 0.5 * ds.X(i, d - 1) + 0.3 * u(rng);
    ds.y.push_back(static_cast<int>(std::min<double>(static_cast<double>(k) - 1, std::floor(s * static_cast<double>(k) / 1.8))));
  }
  return ds;
}

double impurity(const std::vector<double>& counts, SplitCriterion c) {
  double n = 0.0;
  for (double v : counts) n += v;
  if (n == 0) return 0.0;
  double out = c == SplitCriterion::gini ? 1.0 : 0.0;
  for (double v : counts) {
    const double p = v / n;
    if (c == SplitCriterion::gini) {
      out -= p * p;
    } else if (p > 0) {
      out -= p * std::log2(p);
    }
  }
  return out;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
};

// Every feature, every midpoint between consecutive distinct values; the
// weighted child impurity is minimized.
Split oracle_class_split(const Dataset& ds, SplitCriterion crit) {
  const std::size_t k = ds.num_classes();
  Split best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < ds.num_features(); ++f) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < ds.size(); ++i) vals.push_back(ds.X(i, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
      const double thr = (vals[v] + vals[v + 1]) / 2;
      std::vector<double> l(k, 0.0), r(k, 0.0);
      for (std::size_t i = 0; i < ds.size(); ++i) (ds.X(i, f) <= thr ? l : r)[ds.y[i]] += 1;
      double nl = 0, nr = 0;
      for (std::size_t c = 0; c < k; ++c) {
        nl += l[c];
        nr += r[c];
      }
      const double score = nl * impurity(l, crit) + nr * impurity(r, crit);
      if (score < best_score - 1e-12) {
        best_score = score;
        best = {static_cast<int>(f), thr};
      }
    }
  }
  return best;
}

TEST(RandomForest, DepthOneSplitEqualsBruteForceOracle) {
  for (auto crit : {SplitCriterion::gini, SplitCriterion::entropy}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Dataset ds = random_dataset(120, 4, 3, seed);
      RandomForestParams p;
      p.n_estimators = 1;
      p.max_depth = 1;
      p.max_features = MaxFeatures::all;
      p.bootstrap = false;
      p.criterion = crit;
      const auto rf = RandomForest::fit(ds, p);
      const auto& root = rf.trees().at(0).nodes().at(0);
      const Split want = oracle_class_split(ds, crit);
      EXPECT_EQ(root.feature, want.feature) << "seed " << seed;
      EXPECT_DOUBLE_EQ(root.threshold, want.threshold) << "seed " << seed;
    }
  }
}

TEST(RandomForest, UnboundedTreeMemorizesTrainingData) {
  const Dataset ds = random_dataset(80, 3, 4, 3);
  RandomForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  p.max_features = MaxFeatures::all;
  const auto rf = RandomForest::fit(ds, p);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto prob = rf.predict_proba(ds.X.row(i));
    EXPECT_EQ(prob[static_cast<std::size_t>(ds.y[i])], 1.0);
  }
}

TEST(RandomForest, DepthLimitAndFeatureCounts) {
  const Dataset ds = random_dataset(200, 9, 3, 4);
  RandomForestParams p;
  p.max_depth = 3;
  p.n_estimators = 5;
  const auto rf = RandomForest::fit(ds, p);
  for (const auto& t : rf.trees()) EXPECT_LE(t.depth(), 3u);
  EXPECT_EQ(p.features_per_split(9), 3u);
  p.max_features = MaxFeatures::log2;
  EXPECT_EQ(p.features_per_split(9), 3u);
  p.max_features = MaxFeatures::all;
  EXPECT_EQ(p.features_per_split(9), 9u);
}

TEST(GradientBoosting, OneRoundStumpsEqualResidualSplitOracle) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Dataset ds = random_dataset(90, 3, 3, 100 + seed);
    GbtParams p;
    p.n_rounds = 1;
    p.max_depth = 1;
    const auto gbt = GradientBoostedTrees::fit(ds, p);
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < 3; ++c) {
      // Residuals of the prior model: indicator minus class frequency.
      const double prior = static_cast<double>(counts[c]) / static_cast<double>(ds.size());
      std::vector<double> r(ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i) r[i] = (ds.y[i] == static_cast<int>(c) ? 1.0 : 0.0) - prior;
      Split want;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t f = 0; f < 3; ++f) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < ds.size(); ++i) vals.push_back(ds.X(i, f));
        std::sort(vals.begin(), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
          const double thr = (vals[v] + vals[v + 1]) / 2;
          double sl = 0, sr = 0, nl = 0, nr = 0;
          for (std::size_t i = 0; i < ds.size(); ++i) {
            if (ds.X(i, f) <= thr) {
              sl += r[i];
              nl += 1;
            } else {
              sr += r[i];
              nr += 1;
            }
          }
          // Maximizing this is minimizing the children's squared error.
          const double gain = sl * sl / nl + sr * sr / nr;
          if (gain > best + 1e-12) {
            best = gain;
            want = {static_cast<int>(f), thr};
          }
        }
      }
      const auto& root = gbt.trees().at(0).at(c).nodes().at(0);
      EXPECT_EQ(root.feature, want.feature) << "seed " << seed << " class " << c;
      EXPECT_DOUBLE_EQ(root.threshold, want.threshold) << "seed " << seed << " class " << c;
    }
  }
}

TEST(GradientBoosting, ZeroLearningRateGivesClassPriors) {
  const Dataset ds = random_dataset(50, 2, 3, 7);
  GbtParams p;
  p.learning_rate = 0.0;
  p.n_rounds = 3;
  const auto gbt = GradientBoostedTrees::fit(ds, p);
  const auto counts = ds.class_counts();
  const auto prob = gbt.predict_proba(ds.X.row(0));
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(prob[c], static_cast<double>(counts[c]) / 50.0, 1e-12);
  }
}

TEST(GradientBoosting, TrainingLossDecreasesWithRounds) {
  const Dataset ds = random_dataset(150, 3, 3, 8);
  double last = std::numeric_limits<double>::infinity();
  for (int rounds : {1, 5, 20}) {
    GbtParams p;
    p.n_rounds = rounds;
    const double loss = log_loss(GradientBoostedTrees::fit(ds, p), ds);
    EXPECT_LT(loss, last);
    last = loss;
  }
}

// ---------------------------------------------------------------------------

class MlpGradient : public ::testing::TestWithParam<std::pair<Activation, std::size_t>> {};

TEST_P(MlpGradient, AnalyticMatchesCentralDifferences) {
  const auto [act, hidden] = GetParam();
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t rows = 12, d = 4, k = 3;
  Matrix X(rows, d);
  std::vector<int> y(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) X(i, j) = n(rng);
    y[i] = static_cast<int>(i % k);
  }
  const MlpShape shape{d, hidden, k, act};
  std::vector<double> theta(shape.num_parameters());
  for (auto& t : theta) t = 0.5 * n(rng);
  std::vector<double> grad;
  mlp_loss_and_gradient(shape, theta, X, y, 0.3, &grad);
  ASSERT_EQ(grad.size(), theta.size());
  double diff2 = 0.0, norm2 = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = 1e-6;
    auto plus = theta, minus = theta;
    plus[i] += h;
    minus[i] -= h;
    const double fd = (mlp_loss_and_gradient(shape, plus, X, y, 0.3, nullptr) -
                       mlp_loss_and_gradient(shape, minus, X, y, 0.3, nullptr)) /
                      (2 * h);
    diff2 += (fd - grad[i]) * (fd - grad[i]);
    norm2 += std::max(fd * fd, grad[i] * grad[i]);
    EXPECT_NEAR(grad[i], fd, 1e-4 * std::max(1.0, std::abs(fd))) << "parameter " << i;
  }
  EXPECT_LE(std::sqrt(diff2 / norm2), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Activations, MlpGradient,
                         ::testing::Values(std::pair{Activation::relu, std::size_t{5}},
                                           std::pair{Activation::logistic, std::size_t{5}},
                                           std::pair{Activation::tanh, std::size_t{5}},
                                           std::pair{Activation::relu, std::size_t{0}}));

TEST(Mlp, EverySolverLearnsTwoGaussians) {
  const auto [train, test] = testing::shuffle_split(testing::two_gaussians(200, 2, 3.0, 12), 0.7, 13);
  for (auto solver : {Solver::lbfgs, Solver::sgd, Solver::adam}) {
    MlpParams p;
    p.solver = solver;
    p.hidden_layer_sizes = 8;
    p.seed = 14;
    p.learning_rate_init = solver == Solver::adam ? 1e-2 : 1e-1;
    const auto m = Mlp::fit(train, p);
    EXPECT_GE(weighted_f1(test.y, predict_batch(m, test.X), 2).weighted_f1, 0.9) << to_string(solver);
  }
}

TEST(Svm, PlattSigmoidIsDecreasingInAForSeparatedScores) {
  const auto platt = fit_platt({-3, -2, -1.5, -1, 1, 1.5, 2, 3}, {0, 0, 0, 0, 1, 1, 1, 1});
  EXPECT_LT(platt.a, 0.0);
  EXPECT_GT(platt(2.0), 0.5);
  EXPECT_LT(platt(-2.0), 0.5);
}

TEST(Svm, MarginsSeparateClasses) {
  const Dataset ds = testing::two_gaussians(100, 2, 4.0, 15);
  const auto svm = LinearSvm::fit(ds);
  int agree = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto m = svm.decision_function(ds.X.row(i));
    agree += (m[1] > m[0]) == (ds.y[i] == 1);
  }
  EXPECT_GE(agree, 190);
}

TEST(ClassifierHelpers, ArgmaxAndNormalize) {
  EXPECT_EQ(argmax(std::vector<double>{0.2, 0.4, 0.4}), 1u);
  std::vector<double> z = {0, 0, 0, 0};
  normalize_distribution(z);
  EXPECT_EQ(z, std::vector<double>(4, 0.25));
  EXPECT_EQ(model_kind_from_string("xgboost"), ModelKind::gbt);
  EXPECT_EQ(model_kind_from_string("nb"), ModelKind::naive_bayes);
}

}  // namespace
}  // namespace triage
