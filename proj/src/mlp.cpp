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

#include "triage/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::logistic: return "logistic";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "logistic") return Activation::logistic;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

const char* to_string(Solver s) {
  switch (s) {
    case Solver::lbfgs: return "lbfgs";
    case Solver::sgd: return "sgd";
    case Solver::adam: return "adam";
  }
  return "?";
}

Solver solver_from_string(const std::string& s) {
  if (s == "lbfgs") return Solver::lbfgs;
  if (s == "sgd") return Solver::sgd;
  if (s == "adam") return Solver::adam;
  throw ConfigError("unknown solver '" + s + "'");
}

std::size_t MlpShape::num_parameters() const {
  if (hidden == 0) return inputs * outputs + outputs;
  return inputs * hidden + hidden + hidden * outputs + outputs;
}

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::logistic: return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    case Activation::tanh: return std::tanh(z);
  }
  return z;
}

// Derivative expressed through the pre-activation z and output a.
double activate_prime(Activation act, double z, double a) {
  switch (act) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::logistic: return a * (1.0 - a);
    case Activation::tanh: return 1.0 - a * a;
  }
  return 1.0;
}

// Writes softmax(logits) into `p` and returns log p[label] (or 0 if label < 0).
double softmax_log(std::span<const double> logits, std::span<double> p, int label) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - m);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return label < 0 ? 0.0 : logits[static_cast<std::size_t>(label)] - m - std::log(sum);
}

struct Layout {
  std::size_t w1, b1, w2, b2;  // offsets
};

Layout layout(const MlpShape& s) {
  if (s.hidden == 0) return {0, s.inputs * s.outputs, 0, 0};
  const std::size_t b1 = s.inputs * s.hidden;
  const std::size_t w2 = b1 + s.hidden;
  return {0, b1, w2, w2 + s.hidden * s.outputs};
}

double weight_norm2(const MlpShape& s, std::span<const double> theta) {
  const Layout L = layout(s);
  double acc = 0.0;
  if (s.hidden == 0) {
    for (std::size_t i = 0; i < L.b1; ++i) acc += theta[i] * theta[i];
    return acc;
  }
  for (std::size_t i = L.w1; i < L.b1; ++i) acc += theta[i] * theta[i];
  for (std::size_t i = L.w2; i < L.b2; ++i) acc += theta[i] * theta[i];
  return acc;
}

void forward(const MlpShape& s, std::span<const double> theta, std::span<const double> x, std::vector<double>& z,
             std::vector<double>& a, std::vector<double>& logits) {
  const Layout L = layout(s);
  logits.assign(s.outputs, 0.0);
  if (s.hidden == 0) {
    for (std::size_t c = 0; c < s.outputs; ++c) logits[c] = theta[L.b1 + c];
    for (std::size_t f = 0; f < s.inputs; ++f) {
      const double xf = x[f];
      if (xf == 0.0) continue;
      for (std::size_t c = 0; c < s.outputs; ++c) logits[c] += xf * theta[f * s.outputs + c];
    }
    return;
  }
  z.assign(s.hidden, 0.0);
  a.resize(s.hidden);
  for (std::size_t j = 0; j < s.hidden; ++j) z[j] = theta[L.b1 + j];
  for (std::size_t f = 0; f < s.inputs; ++f) {
    const double xf = x[f];
    if (xf == 0.0) continue;
    const double* w = theta.data() + L.w1 + f * s.hidden;
    for (std::size_t j = 0; j < s.hidden; ++j) z[j] += xf * w[j];
  }
  for (std::size_t j = 0; j < s.hidden; ++j) a[j] = activate(s.activation, z[j]);
  for (std::size_t c = 0; c < s.outputs; ++c) logits[c] = theta[L.b2 + c];
  for (std::size_t j = 0; j < s.hidden; ++j) {
    const double* w = theta.data() + L.w2 + j * s.outputs;
    for (std::size_t c = 0; c < s.outputs; ++c) logits[c] += a[j] * w[c];
  }
}

double loss_on_rows(const MlpShape& s, std::span<const double> theta, const Matrix& X, std::span<const int> y,
                    std::span<const std::size_t> rows, double alpha, std::vector<double>* grad) {
  const Layout L = layout(s);
  const double n = static_cast<double>(rows.size());
  if (grad) grad->assign(theta.size(), 0.0);
  std::vector<double> z, a, logits, p(s.outputs), dh(s.hidden);
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto x = X.row(r);
    forward(s, theta, x, z, a, logits);
    loss -= softmax_log(logits, p, y[r]);
    if (!grad) continue;
    auto& g = *grad;
    p[static_cast<std::size_t>(y[r])] -= 1.0;
    for (double& v : p) v /= n;
    if (s.hidden == 0) {
      for (std::size_t f = 0; f < s.inputs; ++f) {
        const double xf = x[f];
        if (xf == 0.0) continue;
        for (std::size_t c = 0; c < s.outputs; ++c) g[f * s.outputs + c] += xf * p[c];
      }
      for (std::size_t c = 0; c < s.outputs; ++c) g[L.b1 + c] += p[c];
      continue;
    }
    for (std::size_t c = 0; c < s.outputs; ++c) g[L.b2 + c] += p[c];
    for (std::size_t j = 0; j < s.hidden; ++j) {
      const double* w = theta.data() + L.w2 + j * s.outputs;
      double* gw = g.data() + L.w2 + j * s.outputs;
      double back = 0.0;
      for (std::size_t c = 0; c < s.outputs; ++c) {
        gw[c] += a[j] * p[c];
        back += w[c] * p[c];
      }
      dh[j] = back * activate_prime(s.activation, z[j], a[j]);
      g[L.b1 + j] += dh[j];
    }
    for (std::size_t f = 0; f < s.inputs; ++f) {
      const double xf = x[f];
      if (xf == 0.0) continue;
      double* gw = g.data() + L.w1 + f * s.hidden;
      for (std::size_t j = 0; j < s.hidden; ++j) gw[j] += xf * dh[j];
    }
  }
  loss /= n;
  loss += alpha / (2.0 * n) * weight_norm2(s, theta);
  if (grad) {
    auto& g = *grad;
    const double k = alpha / n;
    if (s.hidden == 0) {
      for (std::size_t i = 0; i < L.b1; ++i) g[i] += k * theta[i];
    } else {
      for (std::size_t i = L.w1; i < L.b1; ++i) g[i] += k * theta[i];
      for (std::size_t i = L.w2; i < L.b2; ++i) g[i] += k * theta[i];
    }
  }
  return loss;
}

std::vector<double> glorot_init(const MlpShape& s, std::mt19937_64& rng) {
  std::vector<double> theta(s.num_parameters(), 0.0);
  auto fill = [&](std::size_t off, std::size_t fan_in, std::size_t fan_out) {
    const double factor = s.activation == Activation::logistic ? 2.0 : 6.0;
    const double bound = std::sqrt(factor / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) theta[off + i] = u(rng);
    for (std::size_t i = 0; i < fan_out; ++i) theta[off + fan_in * fan_out + i] = u(rng);
  };
  if (s.hidden == 0) {
    fill(0, s.inputs, s.outputs);
  } else {
    const Layout L = layout(s);
    fill(L.w1, s.inputs, s.hidden);
    fill(L.w2, s.hidden, s.outputs);
  }
  return theta;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

struct TrainResult {
  std::vector<double> theta;
  bool converged = false;
  int iterations = 0;
};

TrainResult train_lbfgs(const MlpShape& s, std::vector<double> theta, const Matrix& X, std::span<const int> y,
                        std::span<const std::size_t> rows, const MlpParams& p) {
  constexpr std::size_t kHistory = 10;
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  std::vector<double> g;
  double f = loss_on_rows(s, theta, X, y, rows, p.alpha, &g);
  TrainResult out;
  for (int it = 0; it < p.max_iter; ++it) {
    out.iterations = it + 1;
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax <= 1e-5) {
      out.converged = true;
      break;
    }
    // Two-loop recursion for the search direction.
    std::vector<double> q = g;
    std::vector<double> alphas(S.size());
    for (std::size_t i = S.size(); i-- > 0;) {
      alphas[i] = rho[i] * dot(S[i], q);
      for (std::size_t k = 0; k < q.size(); ++k) q[k] -= alphas[i] * Y[i][k];
    }
    double gamma = S.empty() ? 1.0 / std::max(1.0, std::sqrt(dot(g, g))) : dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
    for (double& v : q) v *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * dot(Y[i], q);
      for (std::size_t k = 0; k < q.size(); ++k) q[k] += S[i][k] * (alphas[i] - beta);
    }
    for (double& v : q) v = -v;
    double slope = dot(g, q);
    if (slope >= 0.0) {
      // Not a descent direction; restart from steepest descent.
      S.clear();
      Y.clear();
      rho.clear();
      q = g;
      for (double& v : q) v = -v / std::max(1.0, std::sqrt(dot(g, g)));
      slope = dot(g, q);
    }
    double step = 1.0;
    std::vector<double> next(theta.size()), gnext;
    double fnext = f;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t k = 0; k < theta.size(); ++k) next[k] = theta[k] + step * q[k];
      fnext = loss_on_rows(s, next, X, y, rows, p.alpha, &gnext);
      if (std::isfinite(fnext) && fnext <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no further progress is possible along any direction we can find
      break;
    }
    std::vector<double> sv(theta.size()), yv(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
      sv[k] = next[k] - theta[k];
      yv[k] = gnext[k] - g[k];
    }
    const double sy = dot(sv, yv);
    if (sy > 1e-10) {
      S.push_back(std::move(sv));
      Y.push_back(std::move(yv));
      rho.push_back(1.0 / sy);
      if (S.size() > kHistory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    const double decrease = f - fnext;
    theta.swap(next);
    g.swap(gnext);
    f = fnext;
    if (decrease <= 2.2e-9 * std::max({std::abs(f), std::abs(f + decrease), 1.0})) {
      out.converged = true;
      break;
    }
  }
  out.theta = std::move(theta);
  return out;
}

TrainResult train_stochastic(const MlpShape& s, std::vector<double> theta, const Matrix& X, std::span<const int> y,
                             std::vector<std::size_t> train, const std::vector<std::size_t>& valid,
                             const MlpParams& p, std::mt19937_64& rng) {
  const std::size_t m = theta.size();
  std::vector<double> v1(m, 0.0), v2(m, 0.0), g;
  const std::size_t batch = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, p.batch_size)), 1, train.size());
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::uint64_t t = 0;

  TrainResult out;
  std::vector<double> best_theta = theta;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < p.max_iter; ++epoch) {
    out.iterations = epoch + 1;
    for (std::size_t i = train.size(); i > 1; --i) std::swap(train[i - 1], train[rng() % i]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train.size(); start += batch) {
      const std::size_t end = std::min(train.size(), start + batch);
      const std::span<const std::size_t> rows(train.data() + start, end - start);
      epoch_loss += loss_on_rows(s, theta, X, y, rows, p.alpha, &g) * static_cast<double>(rows.size());
      ++t;
      if (p.solver == Solver::sgd) {
        for (std::size_t k = 0; k < m; ++k) {
          v1[k] = p.momentum * v1[k] - p.learning_rate_init * g[k];
          theta[k] += v1[k];
        }
      } else {
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        const double lr = p.learning_rate_init * std::sqrt(c2) / c1;
        for (std::size_t k = 0; k < m; ++k) {
          v1[k] = b1 * v1[k] + (1.0 - b1) * g[k];
          v2[k] = b2 * v2[k] + (1.0 - b2) * g[k] * g[k];
          theta[k] -= lr * v1[k] / (std::sqrt(v2[k]) + eps);
        }
      }
    }
    epoch_loss /= static_cast<double>(train.size());
    double score = epoch_loss;
    if (!valid.empty()) score = loss_on_rows(s, theta, X, y, valid, 0.0, nullptr);
    if (!std::isfinite(score)) break;  // diverged; keep the best snapshot
    if (score < best - p.tol) {
      stale = 0;
    } else {
      ++stale;
    }
    if (score < best) {
      best = score;
      best_theta = theta;
    }
    if (stale >= p.n_iter_no_change) {
      out.converged = true;
      break;
    }
  }
  out.theta = std::move(best_theta);
  return out;
}

}  // namespace

double mlp_loss_and_gradient(const MlpShape& shape, std::span<const double> theta, const Matrix& X,
                             std::span<const int> y, double alpha, std::vector<double>* grad) {
  if (theta.size() != shape.num_parameters() || X.cols() != shape.inputs || y.size() != X.rows() || X.rows() == 0) {
    throw std::invalid_argument("mlp: parameter or data shape mismatch");
  }
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return loss_on_rows(shape, theta, X, y, rows, alpha, grad);
}

Mlp Mlp::fit(const Dataset& data, const MlpParams& params) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("mlp: empty dataset");
  if (params.hidden_layer_sizes < 0 || params.alpha < 0.0 || params.max_iter < 1 ||
      params.learning_rate_init <= 0.0) {
    throw std::invalid_argument("mlp: invalid parameters");
  }
  const std::size_t n = data.size();
  const std::size_t d = data.num_features();

  Mlp mlp;
  mlp.shape_ = {d, static_cast<std::size_t>(params.hidden_layer_sizes), data.num_classes(), params.activation};
  mlp.mean_.assign(d, 0.0);
  mlp.scale_.assign(d, 1.0);
  for (std::size_t f = 0; f < d; ++f) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += data.X(i, f);
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (data.X(i, f) - m) * (data.X(i, f) - m);
    const double sd = std::sqrt(v / static_cast<double>(n));
    mlp.mean_[f] = m;
    mlp.scale_[f] = sd > 1e-12 ? sd : 1.0;
  }
  Matrix Z(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) Z(i, f) = (data.X(i, f) - mlp.mean_[f]) / mlp.scale_[f];
  }

  std::mt19937_64 rng(mix_seed(params.seed, 0));
  auto theta = glorot_init(mlp.shape_, rng);

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  TrainResult res;
  if (params.solver == Solver::lbfgs) {
    res = train_lbfgs(mlp.shape_, std::move(theta), Z, data.y, all, params);
  } else {
    std::vector<std::size_t> train = all, valid;
    if (params.early_stopping && n >= 20 && params.validation_fraction > 0.0) {
      std::mt19937_64 split_rng(mix_seed(params.seed, 1));
      for (std::size_t i = n; i > 1; --i) std::swap(train[i - 1], train[split_rng() % i]);
      const auto nv = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(params.validation_fraction * static_cast<double>(n))));
      valid.assign(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(nv));
      train.erase(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(nv));
      std::sort(valid.begin(), valid.end());
      std::sort(train.begin(), train.end());
    }
    res = train_stochastic(mlp.shape_, std::move(theta), Z, data.y, std::move(train), valid, params, rng);
  }
  mlp.theta_ = std::move(res.theta);
  mlp.converged_ = res.converged;
  mlp.iterations_ = res.iterations;
  return mlp;
}

std::vector<double> Mlp::predict_proba(std::span<const double> x) const {
  std::vector<double> xs(shape_.inputs);
  for (std::size_t f = 0; f < shape_.inputs; ++f) xs[f] = (x[f] - mean_[f]) / scale_[f];
  std::vector<double> z, a, logits, p(shape_.outputs);
  forward(shape_, theta_, xs, z, a, logits);
  softmax_log(logits, p, -1);
  normalize_distribution(p);
  return p;
}

nlohmann::json Mlp::to_json() const {
  return {{"inputs", shape_.inputs},
          {"hidden", shape_.hidden},
          {"outputs", shape_.outputs},
          {"activation", to_string(shape_.activation)},
          {"mean", mean_},
          {"scale", scale_},
          {"theta", theta_},
          {"converged", converged_},
          {"iterations", iterations_}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp m;
  m.shape_ = {j.at("inputs").get<std::size_t>(), j.at("hidden").get<std::size_t>(),
              j.at("outputs").get<std::size_t>(), activation_from_string(j.at("activation").get<std::string>())};
  m.mean_ = j.at("mean").get<std::vector<double>>();
  m.scale_ = j.at("scale").get<std::vector<double>>();
  m.theta_ = j.at("theta").get<std::vector<double>>();
  m.converged_ = j.at("converged").get<bool>();
  m.iterations_ = j.at("iterations").get<int>();
  if (m.shape_.outputs == 0 || m.mean_.size() != m.shape_.inputs || m.scale_.size() != m.shape_.inputs ||
      m.theta_.size() != m.shape_.num_parameters()) {
    throw ModelFormatError("mlp: parameter shape mismatch");
  }
  return m;
}

}  // namespace triage
