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

#include "triage/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].value;
}

nlohmann::json RegressionTree::to_json() const {
  nlohmann::json f = nlohmann::json::array(), t = nlohmann::json::array(), l = nlohmann::json::array(),
                 r = nlohmann::json::array(), v = nlohmann::json::array();
  for (const auto& n : nodes_) {
    f.push_back(n.feature);
    t.push_back(n.threshold);
    l.push_back(n.left);
    r.push_back(n.right);
    v.push_back(n.value);
  }
  return {{"feature", f}, {"threshold", t}, {"left", l}, {"right", r}, {"value", v}};
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
  const auto f = j.at("feature").get<std::vector<int>>();
  const auto t = j.at("threshold").get<std::vector<double>>();
  const auto l = j.at("left").get<std::vector<int>>();
  const auto r = j.at("right").get<std::vector<int>>();
  const auto v = j.at("value").get<std::vector<double>>();
  const std::size_t n = f.size();
  if (n == 0 || t.size() != n || l.size() != n || r.size() != n || v.size() != n) {
    throw ModelFormatError("regression tree: inconsistent node arrays");
  }
  RegressionTree tree;
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] >= 0 && (l[i] <= static_cast<int>(i) || r[i] <= static_cast<int>(i) || l[i] >= static_cast<int>(n) ||
                      r[i] >= static_cast<int>(n))) {
      throw ModelFormatError("regression tree: bad child index");
    }
    tree.nodes_.push_back({f[i], t[i], l[i], r[i], v[i]});
  }
  return tree;
}

class RegressionTreeBuilder {
 public:
  // `sorted[f]` lists all rows ordered by feature f (ties by row index).
  RegressionTreeBuilder(const Matrix& X, const std::vector<double>& residual, const std::vector<double>& hess,
                        const std::vector<std::vector<std::uint32_t>>& sorted, int max_depth, double leaf_scale)
      : X_(X), r_(residual), h_(hess), sorted_(sorted), max_depth_(max_depth), leaf_scale_(leaf_scale) {}

  RegressionTree build() {
    side_.assign(X_.rows(), 0);
    grow(sorted_, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  double leaf_value(const std::vector<std::uint32_t>& rows) const {
    double num = 0.0, den = 0.0;
    for (auto i : rows) {
      num += r_[i];
      den += h_[i];
    }
    return den < 1e-150 ? 0.0 : leaf_scale_ * num / den;
  }

  Split best_split(const std::vector<std::vector<std::uint32_t>>& rows) const {
    Split best;
    const auto& any = rows[0];
    const double n = static_cast<double>(any.size());
    double total = 0.0;
    for (auto i : any) total += r_[i];
    const double base = total * total / n;
    for (std::size_t f = 0; f < rows.size(); ++f) {
      const auto& order = rows[f];
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        left_sum += r_[order[k]];
        const double a = X_(order[k], f);
        const double b = X_(order[k + 1], f);
        if (!(a < b)) continue;
        const double nl = static_cast<double>(k + 1);
        const double nr = n - nl;
        const double right_sum = total - left_sum;
        // SSE reduction of the split.
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - base;
        if (gain > best.gain + 1e-12) {
          best.feature = static_cast<int>(f);
          best.threshold = a + (b - a) / 2.0;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::vector<std::uint32_t>>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes_.size());
    tree_.nodes_.push_back({});
    tree_.nodes_[static_cast<std::size_t>(id)].value = leaf_value(rows[0]);
    if (depth >= max_depth_ || rows[0].size() < 2) return id;
    const Split s = best_split(rows);
    if (s.feature < 0) return id;

    for (auto i : rows[0]) side_[i] = X_(i, static_cast<std::size_t>(s.feature)) <= s.threshold ? 1 : 2;
    std::vector<std::vector<std::uint32_t>> left(rows.size()), right(rows.size());
    for (std::size_t f = 0; f < rows.size(); ++f) {
      for (auto i : rows[f]) (side_[i] == 1 ? left[f] : right[f]).push_back(i);
    }
    auto& node = tree_.nodes_[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_.nodes_[static_cast<std::size_t>(id)].left = l;
    tree_.nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Matrix& X_;
  const std::vector<double>& r_;
  const std::vector<double>& h_;
  const std::vector<std::vector<std::uint32_t>>& sorted_;
  int max_depth_;
  double leaf_scale_;
  std::vector<std::uint8_t> side_;
  RegressionTree tree_;
};

namespace {

void softmax_inplace(std::span<double> s) {
  const double m = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double& v : s) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : s) v /= sum;
}

}  // namespace

GradientBoostedTrees GradientBoostedTrees::fit(const Dataset& data, const GbtParams& params, Execution exec) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("gbt: empty dataset");
  if (params.n_rounds < 0 || params.max_depth < 1 || params.learning_rate < 0.0) {
    throw std::invalid_argument("gbt: n_rounds >= 0, max_depth >= 1 and learning_rate >= 0 required");
  }
  const std::size_t n = data.size();
  const std::size_t d = data.num_features();
  const std::size_t k = data.num_classes();

  GradientBoostedTrees model;
  model.learning_rate_ = params.learning_rate;
  model.num_features_ = d;
  const auto counts = data.class_counts();
  model.init_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    model.init_[c] = counts[c] > 0 ? std::log(static_cast<double>(counts[c]) / static_cast<double>(n))
                                   : -std::numeric_limits<double>::infinity();
  }
  // Classes absent from training keep a finite but negligible score so that
  // softmax stays well defined.
  for (double& v : model.init_) {
    if (!std::isfinite(v)) v = -700.0;
  }

  std::vector<std::vector<std::uint32_t>> sorted(d, std::vector<std::uint32_t>(n));
  for (std::size_t f = 0; f < d; ++f) {
    auto& o = sorted[f];
    std::iota(o.begin(), o.end(), 0u);
    std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return data.X(a, f) < data.X(b, f); });
  }
  if (d == 0) {
    // A single constant column lets the builder run; it never splits.
    sorted.assign(1, std::vector<std::uint32_t>(n));
    std::iota(sorted[0].begin(), sorted[0].end(), 0u);
  }

  Matrix F(n, k);
  for (std::size_t i = 0; i < n; ++i) std::copy(model.init_.begin(), model.init_.end(), F.row(i).begin());
  const double leaf_scale = k > 1 ? static_cast<double>(k - 1) / static_cast<double>(k) : 1.0;
  const Matrix noX = d == 0 ? Matrix(n, 1) : Matrix();
  const Matrix& X = d == 0 ? noX : data.X;

  for (int round = 0; round < params.n_rounds; ++round) {
    Matrix P = F;
    for (std::size_t i = 0; i < n; ++i) softmax_inplace(P.row(i));
    std::vector<RegressionTree> trees(k);
    auto fit_class = [&](std::ptrdiff_t ci) {
      const auto c = static_cast<std::size_t>(ci);
      std::vector<double> r(n), h(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double y = data.y[i] == static_cast<int>(c) ? 1.0 : 0.0;
        r[i] = y - P(i, c);
        h[i] = std::abs(r[i]) * (1.0 - std::abs(r[i]));
      }
      trees[c] = RegressionTreeBuilder(X, r, h, sorted, params.max_depth, leaf_scale).build();
    };
    const auto kk = static_cast<std::ptrdiff_t>(k);
    if (exec == Execution::serial) {
      for (std::ptrdiff_t c = 0; c < kk; ++c) fit_class(c);
    } else {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t c = 0; c < kk; ++c) fit_class(c);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) F(i, c) += params.learning_rate * trees[c].predict(X.row(i));
    }
    model.trees_.push_back(std::move(trees));
  }
  return model;
}

std::vector<double> GradientBoostedTrees::raw_scores(std::span<const double> x) const {
  std::vector<double> s = init_;
  const std::vector<double> zero(1, 0.0);
  const std::span<const double> in = num_features_ == 0 ? std::span<const double>(zero) : x;
  for (const auto& round : trees_) {
    for (std::size_t c = 0; c < round.size(); ++c) s[c] += learning_rate_ * round[c].predict(in);
  }
  return s;
}

std::vector<double> GradientBoostedTrees::predict_proba(std::span<const double> x) const {
  auto s = raw_scores(x);
  softmax_inplace(s);
  normalize_distribution(s);
  return s;
}

nlohmann::json GradientBoostedTrees::to_json() const {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& round : trees_) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& t : round) r.push_back(t.to_json());
    rounds.push_back(std::move(r));
  }
  return {{"features", num_features_}, {"learning_rate", learning_rate_}, {"init", init_}, {"rounds", rounds}};
}

GradientBoostedTrees GradientBoostedTrees::from_json(const nlohmann::json& j) {
  GradientBoostedTrees m;
  m.num_features_ = j.at("features").get<std::size_t>();
  m.learning_rate_ = j.at("learning_rate").get<double>();
  m.init_ = j.at("init").get<std::vector<double>>();
  if (m.init_.empty()) throw ModelFormatError("gbt: no classes");
  for (const auto& r : j.at("rounds")) {
    std::vector<RegressionTree> round;
    for (const auto& t : r) round.push_back(RegressionTree::from_json(t));
    if (round.size() != m.init_.size()) throw ModelFormatError("gbt: tree count does not match classes");
    m.trees_.push_back(std::move(round));
  }
  return m;
}

double log_loss(const Classifier& model, const Dataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = model.predict_proba(data.X.row(i));
    total -= std::log(std::max(p[static_cast<std::size_t>(data.y[i])], 1e-300));
  }
  return data.size() == 0 ? 0.0 : total / static_cast<double>(data.size());
}

}  // namespace triage
