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

#include "triage/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

const char* to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::auto_: return "auto";
    case MaxFeatures::sqrt: return "sqrt";
    case MaxFeatures::log2: return "log2";
    case MaxFeatures::all: return "all";
  }
  return "?";
}

MaxFeatures max_features_from_string(const std::string& s) {
  if (s == "auto") return MaxFeatures::auto_;
  if (s == "sqrt") return MaxFeatures::sqrt;
  if (s == "log2") return MaxFeatures::log2;
  if (s == "all" || s == "none") return MaxFeatures::all;
  throw ConfigError("unknown max_features '" + s + "'");
}

const char* to_string(SplitCriterion c) { return c == SplitCriterion::gini ? "gini" : "entropy"; }

SplitCriterion criterion_from_string(const std::string& s) {
  if (s == "gini") return SplitCriterion::gini;
  if (s == "entropy") return SplitCriterion::entropy;
  throw ConfigError("unknown split criterion '" + s + "'");
}

std::size_t RandomForestParams::features_per_split(std::size_t d) const {
  if (d == 0) return 0;
  double m = static_cast<double>(d);
  switch (max_features) {
    case MaxFeatures::auto_:
    case MaxFeatures::sqrt: m = std::sqrt(static_cast<double>(d)); break;
    case MaxFeatures::log2: m = std::log2(static_cast<double>(d)); break;
    case MaxFeatures::all: break;
  }
  return std::clamp<std::size_t>(static_cast<std::size_t>(m), 1, d);
}

namespace {

double impurity(std::span<const double> counts, double total, SplitCriterion criterion) {
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  if (criterion == SplitCriterion::gini) {
    for (double c : counts) {
      const double p = c / total;
      acc += p * p;
    }
    return 1.0 - acc;
  }
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    acc -= p * std::log2(p);
  }
  return acc;
}

}  // namespace

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const std::vector<double>& weights, const RandomForestParams& params,
              std::uint64_t seed)
      : data_(data), weights_(weights), params_(params), rng_(seed), k_(data.num_classes()) {}

  DecisionTree build() {
    tree_.num_classes_ = k_;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (weights_[i] > 0.0) rows.push_back(i);
    }
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  int grow(const std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes_.size());
    tree_.nodes_.push_back({});
    tree_.values_.resize(tree_.values_.size() + k_, 0.0);

    std::vector<double> counts(k_, 0.0);
    double total = 0.0;
    for (std::size_t r : rows) {
      counts[static_cast<std::size_t>(data_.y[r])] += weights_[r];
      total += weights_[r];
    }
    for (std::size_t c = 0; c < k_; ++c) {
      tree_.values_[static_cast<std::size_t>(id) * k_ + c] = total > 0.0 ? counts[c] / total : 0.0;
    }

    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    const bool depth_exhausted = params_.max_depth && depth >= *params_.max_depth;
    if (pure || depth_exhausted || total < 2.0) return id;

    const Split split = find_split(rows, counts, total);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (data_.X(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    }
    const int l = grow(left, depth + 1);
    const int rt = grow(right, depth + 1);
    auto& node = tree_.nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rt;
    return id;
  }

  // Visits features in a per-node random order and evaluates the first m; if
  // none of them admits a split, keeps going until one does.
  Split find_split(const std::vector<std::size_t>& rows, const std::vector<double>& parent_counts,
                   double total) {
    const std::size_t d = data_.num_features();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t m = params_.features_per_split(d);
    if (m < d) {
      for (std::size_t i = d; i > 1; --i) std::swap(order[i - 1], order[rng_() % i]);
    }
    Split best;
    std::vector<std::pair<double, std::size_t>> values(rows.size());
    std::vector<double> left(k_), right(k_);
    std::size_t examined = 0;
    for (std::size_t f : order) {
      if (examined >= m && best.feature >= 0) break;
      ++examined;
      for (std::size_t i = 0; i < rows.size(); ++i) values[i] = {data_.X(rows[i], f), rows[i]};
      std::sort(values.begin(), values.end());
      if (values.front().first == values.back().first) continue;
      std::fill(left.begin(), left.end(), 0.0);
      right = parent_counts;
      double wl = 0.0;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const std::size_t r = values[i].second;
        const double w = weights_[r];
        const auto c = static_cast<std::size_t>(data_.y[r]);
        left[c] += w;
        right[c] -= w;
        wl += w;
        const double a = values[i].first;
        const double b = values[i + 1].first;
        if (a == b) continue;
        const double wr = total - wl;
        const double score = (wl * impurity(left, wl, params_.criterion) +
                              wr * impurity(right, wr, params_.criterion)) /
                             total;
        if (score < best.score) {
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best = {static_cast<int>(f), t, score};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const std::vector<double>& weights_;
  const RandomForestParams& params_;
  std::mt19937_64 rng_;
  std::size_t k_;
  DecisionTree tree_;
};

DecisionTree DecisionTree::fit(const Dataset& data, const std::vector<double>& weights,
                               const RandomForestParams& params, std::uint64_t seed) {
  return TreeBuilder(data, weights, params, seed).build();
}

std::span<const double> DecisionTree::leaf_distribution(std::span<const double> x) const {
  std::size_t n = 0;
  while (nodes_[n].feature >= 0) {
    const auto& node = nodes_[n];
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                             : node.right);
  }
  return {values_.data() + n * num_classes_, num_classes_};
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t out = 0;
  // Children are always created after their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
    out = std::max(out, d[i]);
  }
  return out;
}

nlohmann::json DecisionTree::to_json() const {
  std::vector<int> feature, left, right;
  std::vector<double> threshold;
  for (const auto& n : nodes_) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", values_}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j, std::size_t num_classes) {
  DecisionTree t;
  t.num_classes_ = num_classes;
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  t.values_ = j.at("value").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
      t.values_.size() != n * num_classes) {
    throw ModelFormatError("decision tree: inconsistent node arrays");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                            left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n))) {
      throw ModelFormatError("decision tree: bad child index");
    }
    t.nodes_.push_back({feature[i], threshold[i], left[i], right[i]});
  }
  return t;
}

RandomForest RandomForest::fit(const Dataset& data, const RandomForestParams& params, Execution exec) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("random forest: empty dataset");
  if (params.n_estimators < 1) throw std::invalid_argument("random forest: n_estimators must be >= 1");
  if (params.max_depth && *params.max_depth < 1) throw std::invalid_argument("random forest: max_depth must be >= 1");

  RandomForest rf;
  rf.params_ = params;
  rf.num_classes_ = data.num_classes();
  rf.num_features_ = data.num_features();
  rf.trees_.resize(static_cast<std::size_t>(params.n_estimators));

  const std::size_t n = data.size();
  // Each tree draws its bootstrap sample and feature subsets from its own
  // stream, so the forest does not depend on the thread schedule.
  auto build = [&](std::ptrdiff_t t) {
    const std::uint64_t stream = mix_seed(params.seed, static_cast<std::uint64_t>(t));
    std::vector<double> weights(n, 1.0);
    if (params.bootstrap) {
      std::mt19937_64 rng(stream);
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) weights[rng() % n] += 1.0;
    }
    rf.trees_[static_cast<std::size_t>(t)] = DecisionTree::fit(data, weights, params, mix_seed(stream, 1));
  };
  const auto count = static_cast<std::ptrdiff_t>(rf.trees_.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t t = 0; t < count; ++t) build(t);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < count; ++t) build(t);
  }
  return rf;
}

std::vector<double> RandomForest::predict_proba(std::span<const double> x) const {
  std::vector<double> p(num_classes_, 0.0);
  for (const auto& tree : trees_) {
    const auto leaf = tree.leaf_distribution(x);
    for (std::size_t c = 0; c < num_classes_; ++c) p[c] += leaf[c];
  }
  normalize_distribution(p);
  return p;
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  nlohmann::json params{{"max_depth", params_.max_depth ? nlohmann::json(*params_.max_depth) : nlohmann::json(nullptr)},
                        {"max_features", to_string(params_.max_features)},
                        {"n_estimators", params_.n_estimators},
                        {"criterion", to_string(params_.criterion)},
                        {"bootstrap", params_.bootstrap},
                        {"seed", params_.seed}};
  return {{"classes", num_classes_}, {"features", num_features_}, {"params", params}, {"trees", trees}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  RandomForest rf;
  rf.num_classes_ = j.at("classes").get<std::size_t>();
  rf.num_features_ = j.at("features").get<std::size_t>();
  const auto& p = j.at("params");
  if (!p.at("max_depth").is_null()) rf.params_.max_depth = p.at("max_depth").get<int>();
  rf.params_.max_features = max_features_from_string(p.at("max_features").get<std::string>());
  rf.params_.n_estimators = p.at("n_estimators").get<int>();
  rf.params_.criterion = criterion_from_string(p.at("criterion").get<std::string>());
  rf.params_.bootstrap = p.at("bootstrap").get<bool>();
  rf.params_.seed = p.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("trees")) rf.trees_.push_back(DecisionTree::from_json(t, rf.num_classes_));
  if (rf.trees_.empty()) throw ModelFormatError("random forest: no trees");
  return rf;
}

}  // namespace triage
