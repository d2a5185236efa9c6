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

#include "triage/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

double PlattScaling::operator()(double f) const {
  const double z = a * f + b;
  // Evaluated in the numerically safe direction.
  return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

PlattScaling fit_platt(const std::vector<double>& scores, const std::vector<int>& labels) {
  // Lin, Lin & Weng's formulation of Platt's algorithm.
  const std::size_t n = scores.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (int l : labels) (l == 1 ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == 1 ? hi : lo;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  const double sigma = 1e-12;
  auto objective = [&](double aa, double bb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scores[i] * aa + bb;
      f += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };
  double fval = objective(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = scores[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    if (!moved) break;
  }
  return {a, b};
}

namespace {

std::vector<double> standardize(std::span<const double> x, const std::vector<double>& mean,
                                const std::vector<double>& scale) {
  std::vector<double> z(x.size() + 1);
  for (std::size_t f = 0; f < x.size(); ++f) z[f] = (x[f] - mean[f]) / scale[f];
  z.back() = 1.0;
  return z;
}

// Stratified split: from each class, the first `fraction` of a seeded
// permutation goes to calibration.
void calibration_split(const Dataset& data, double fraction, std::uint64_t seed,
                       std::vector<std::size_t>& train, std::vector<std::size_t>& calib) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> by_class(data.num_classes());
  for (std::size_t i = 0; i < data.size(); ++i) by_class[static_cast<std::size_t>(data.y[i])].push_back(i);
  for (auto& rows : by_class) {
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng() % i]);
    const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows.size())));
    calib.insert(calib.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
    train.insert(train.end(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(calib.begin(), calib.end());
}

}  // namespace

LinearSvm LinearSvm::fit(const Dataset& data, const SvmParams& params) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("svm: empty dataset");
  if (params.lambda <= 0.0 || params.epochs < 1 || params.batch_size < 1) {
    throw std::invalid_argument("svm: lambda, epochs and batch_size must be positive");
  }
  const std::size_t n = data.size();
  const std::size_t d = data.num_features();
  const std::size_t k = data.num_classes();

  LinearSvm svm;
  svm.mean_.assign(d, 0.0);
  svm.scale_.assign(d, 1.0);
  for (std::size_t f = 0; f < d; ++f) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += data.X(i, f);
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (data.X(i, f) - m) * (data.X(i, f) - m);
    const double sd = std::sqrt(v / static_cast<double>(n));
    svm.mean_[f] = m;
    svm.scale_[f] = sd > 1e-12 ? sd : 1.0;
  }
  Matrix Z(n, d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = standardize(data.X.row(i), svm.mean_, svm.scale_);
    std::copy(z.begin(), z.end(), Z.row(i).begin());
  }

  std::vector<std::size_t> train, calib;
  if (n >= 10 && params.calibration_fraction > 0.0) {
    calibration_split(data, params.calibration_fraction, mix_seed(params.seed, 0), train, calib);
  }
  if (calib.empty() || train.empty()) {
    train.resize(n);
    std::iota(train.begin(), train.end(), 0);
    calib = train;
  }

  svm.weights_ = Matrix(k, d + 1, 0.0);
  svm.platt_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::mt19937_64 rng(mix_seed(params.seed, c + 1));
    std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0), grad(d + 1);
    std::vector<std::size_t> order = train;
    std::uint64_t t = 0;
    std::uint64_t averaged = 0;
    const auto total_steps = static_cast<std::uint64_t>(params.epochs) *
                             ((order.size() + static_cast<std::size_t>(params.batch_size) - 1) /
                              static_cast<std::size_t>(params.batch_size));
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(params.batch_size)) {
        ++t;
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(params.batch_size));
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t b = start; b < end; ++b) {
          const std::size_t r = order[b];
          const double yi = data.y[r] == static_cast<int>(c) ? 1.0 : -1.0;
          const auto z = Z.row(r);
          double margin = 0.0;
          for (std::size_t f = 0; f <= d; ++f) margin += w[f] * z[f];
          if (yi * margin < 1.0) {
            for (std::size_t f = 0; f <= d; ++f) grad[f] += yi * z[f];
          }
        }
        const double eta = 1.0 / (params.lambda * static_cast<double>(t));
        const double shrink = 1.0 - eta * params.lambda;
        const double scale = eta / static_cast<double>(end - start);
        for (std::size_t f = 0; f <= d; ++f) w[f] = shrink * w[f] + scale * grad[f];
        // Average the second half of the iterates.
        if (2 * t > total_steps) {
          ++averaged;
          for (std::size_t f = 0; f <= d; ++f) avg[f] += (w[f] - avg[f]) / static_cast<double>(averaged);
        }
      }
    }
    if (averaged == 0) avg = w;
    std::copy(avg.begin(), avg.end(), svm.weights_.row(c).begin());

    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t r : calib) {
      const auto z = Z.row(r);
      double s = 0.0;
      for (std::size_t f = 0; f <= d; ++f) s += avg[f] * z[f];
      scores.push_back(s);
      labels.push_back(data.y[r] == static_cast<int>(c) ? 1 : 0);
    }
    svm.platt_[c] = fit_platt(scores, labels);
  }
  return svm;
}

std::vector<double> LinearSvm::decision_function(std::span<const double> x) const {
  const auto z = standardize(x, mean_, scale_);
  std::vector<double> out(weights_.rows(), 0.0);
  for (std::size_t c = 0; c < weights_.rows(); ++c) {
    const auto w = weights_.row(c);
    for (std::size_t f = 0; f < z.size(); ++f) out[c] += w[f] * z[f];
  }
  return out;
}

std::vector<double> LinearSvm::predict_proba(std::span<const double> x) const {
  const auto scores = decision_function(x);
  std::vector<double> p(scores.size());
  for (std::size_t c = 0; c < scores.size(); ++c) p[c] = platt_[c](scores[c]);
  normalize_distribution(p);
  return p;
}

nlohmann::json LinearSvm::to_json() const {
  std::vector<double> a, b;
  for (const auto& p : platt_) {
    a.push_back(p.a);
    b.push_back(p.b);
  }
  return {{"classes", num_classes()}, {"features", num_features()}, {"mean", mean_},   {"scale", scale_},
          {"weights", weights_.data()}, {"platt_a", a},             {"platt_b", b}};
}

LinearSvm LinearSvm::from_json(const nlohmann::json& j) {
  LinearSvm svm;
  const auto k = j.at("classes").get<std::size_t>();
  const auto d = j.at("features").get<std::size_t>();
  svm.mean_ = j.at("mean").get<std::vector<double>>();
  svm.scale_ = j.at("scale").get<std::vector<double>>();
  svm.weights_ = Matrix(k, d + 1);
  svm.weights_.data() = j.at("weights").get<std::vector<double>>();
  const auto a = j.at("platt_a").get<std::vector<double>>();
  const auto b = j.at("platt_b").get<std::vector<double>>();
  if (svm.mean_.size() != d || svm.scale_.size() != d || svm.weights_.data().size() != k * (d + 1) ||
      a.size() != k || b.size() != k) {
    throw ModelFormatError("svm: parameter shape mismatch");
  }
  for (std::size_t c = 0; c < k; ++c) svm.platt_.push_back({a[c], b[c]});
  return svm;
}

}  // namespace triage
