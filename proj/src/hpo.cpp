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

#include "triage/hpo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "triage/corpus.hpp"
#include "triage/errors.hpp"
#include "triage/eval.hpp"

namespace triage {

Dimension Dimension::categorical(std::string name, std::vector<nlohmann::json> levels) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimKind::categorical;
  d.levels = std::move(levels);
  return d;
}

Dimension Dimension::int_uniform(std::string name, std::int64_t low, std::int64_t high) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimKind::int_uniform;
  d.low = static_cast<double>(low);
  d.high = static_cast<double>(high);
  return d;
}

Dimension Dimension::log_uniform(std::string name, double low, double high) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimKind::log_uniform;
  d.low = low;
  d.high = high;
  return d;
}

bool Dimension::contains(const nlohmann::json& v) const {
  switch (kind) {
    case DimKind::categorical: return std::find(levels.begin(), levels.end(), v) != levels.end();
    case DimKind::int_uniform:
      return v.is_number_integer() && static_cast<double>(v.get<std::int64_t>()) >= low &&
             static_cast<double>(v.get<std::int64_t>()) <= high;
    case DimKind::log_uniform: return v.is_number() && v.get<double>() >= low && v.get<double>() <= high;
  }
  return false;
}

void SearchSpace::validate() const {
  if (dims.empty()) throw ConfigError("search space has no dimensions");
  std::set<std::string> names;
  for (const auto& d : dims) {
    if (!names.insert(d.name).second) throw ConfigError("duplicate dimension '" + d.name + "'");
    switch (d.kind) {
      case DimKind::categorical:
        if (d.levels.empty()) throw ConfigError("dimension '" + d.name + "' has no levels");
        break;
      case DimKind::int_uniform:
        if (!(d.low <= d.high)) throw ConfigError("dimension '" + d.name + "' has an empty range");
        break;
      case DimKind::log_uniform:
        if (!(d.low > 0.0) || !(d.low <= d.high)) {
          throw ConfigError("dimension '" + d.name + "' needs 0 < low <= high");
        }
        break;
    }
  }
}

bool SearchSpace::contains(const nlohmann::json& params) const {
  if (!params.is_object() || params.size() != dims.size()) return false;
  for (const auto& d : dims) {
    if (!params.contains(d.name) || !d.contains(params.at(d.name))) return false;
  }
  return true;
}

SearchSpace rf_search_space() {
  return {{Dimension::categorical("max_depth", {10, 20, 30, 40, 50, "None"}),
           Dimension::categorical("max_features", {"auto", "sqrt", "log2"}),
           Dimension::int_uniform("n_estimators", 10, 1000),
           Dimension::categorical("criterion", {"gini", "entropy"})}};
}

SearchSpace mlp_search_space() {
  return {{Dimension::int_uniform("hidden_layer_sizes", 10, 300),
           Dimension::log_uniform("alpha", std::exp(-8.0 * std::log(10.0)), std::exp(3.0 * std::log(10.0))),
           Dimension::categorical("activation", {"relu", "logistic", "tanh"}),
           Dimension::categorical("solver", {"lbfgs", "sgd", "adam"})}};
}

SearchSpace gbt_search_space() {
  return {{Dimension::int_uniform("n_rounds", 10, 500), Dimension::log_uniform("learning_rate", 0.01, 1.0),
           Dimension::int_uniform("max_depth", 1, 8)}};
}

SearchSpace search_space_for(ModelKind kind) {
  switch (kind) {
    case ModelKind::random_forest: return rf_search_space();
    case ModelKind::mlp: return mlp_search_space();
    case ModelKind::gbt: return gbt_search_space();
    default: break;
  }
  throw ConfigError(std::string("no search space defined for ") + to_string(kind));
}

void TpeConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (n_candidates < 1) throw ConfigError("n_candidates must be positive");
  if (budget < 1) throw ConfigError("a trial budget is required");
  if (budget < n_startup_trials) throw ConfigError("budget must be at least n_startup_trials");
}

namespace {

// Numeric dims are modeled on a continuous axis: log scale for log_uniform,
// [low - 0.5, high + 0.5] for integers so that each integer owns a unit cell.
struct Axis {
  double a, b;
};

Axis axis_of(const Dimension& d) {
  if (d.kind == DimKind::log_uniform) return {std::log(d.low), std::log(d.high)};
  return {d.low - 0.5, d.high + 0.5};
}

double to_axis(const Dimension& d, const nlohmann::json& v) {
  if (d.kind == DimKind::log_uniform) return std::log(v.get<double>());
  return static_cast<double>(v.get<std::int64_t>());
}

nlohmann::json from_axis(const Dimension& d, double x) {
  if (d.kind == DimKind::log_uniform) return std::clamp(std::exp(x), d.low, d.high);
  const double r = std::clamp(std::round(x), d.low, d.high);
  return static_cast<std::int64_t>(r);
}

nlohmann::json uniform_value(const Dimension& d, std::mt19937_64& rng) {
  switch (d.kind) {
    case DimKind::categorical: {
      std::uniform_int_distribution<std::size_t> pick(0, d.levels.size() - 1);
      return d.levels[pick(rng)];
    }
    case DimKind::int_uniform: {
      std::uniform_int_distribution<std::int64_t> pick(static_cast<std::int64_t>(d.low),
                                                       static_cast<std::int64_t>(d.high));
      return pick(rng);
    }
    case DimKind::log_uniform: {
      std::uniform_real_distribution<double> u(std::log(d.low), std::log(d.high));
      return std::clamp(std::exp(u(rng)), d.low, d.high);
    }
  }
  return nullptr;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Parzen estimator on one numeric axis: a uniform prior component plus one
// truncated Gaussian per observation, equally weighted. Each observation's
// bandwidth is the larger gap to its sorted neighbours (the axis ends count
// as neighbours), clipped to [width / min(100, n + 1), width].
class NumericParzen {
 public:
  NumericParzen(std::vector<double> obs, Axis ax) : obs_(std::move(obs)), ax_(ax) {
    const double width = ax_.b - ax_.a;
    const std::size_t n = obs_.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return obs_[i] < obs_[j]; });
    const double min_h = width / std::min(100.0, static_cast<double>(n) + 1.0);
    h_.assign(n, width);
    for (std::size_t r = 0; r < n; ++r) {
      const double x = obs_[order[r]];
      const double left = r == 0 ? ax_.a : obs_[order[r - 1]];
      const double right = r + 1 == n ? ax_.b : obs_[order[r + 1]];
      h_[order[r]] = std::clamp(std::max(x - left, right - x), min_h, width);
    }
    for (std::size_t i = 0; i < n; ++i) {
      mass_.push_back(normal_cdf((ax_.b - obs_[i]) / h_[i]) - normal_cdf((ax_.a - obs_[i]) / h_[i]));
    }
  }

  double density(double x) const {
    const double width = ax_.b - ax_.a;
    double acc = 1.0 / width;
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const double z = (x - obs_[i]) / h_[i];
      acc += std::exp(-0.5 * z * z) / (h_[i] * std::sqrt(2.0 * M_PI) * std::max(mass_[i], 1e-300));
    }
    return acc / static_cast<double>(obs_.size() + 1);
  }

  double sample(std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::size_t> comp(0, obs_.size());
    const std::size_t c = comp(rng);
    if (c == obs_.size()) return std::uniform_real_distribution<double>(ax_.a, ax_.b)(rng);
    std::normal_distribution<double> g(obs_[c], h_[c]);
    for (int tries = 0; tries < 100; ++tries) {
      const double x = g(rng);
      if (x >= ax_.a && x <= ax_.b) return x;
    }
    return std::clamp(obs_[c], ax_.a, ax_.b);
  }

 private:
  std::vector<double> obs_;
  Axis ax_;
  std::vector<double> h_;
  std::vector<double> mass_;
};

// Category frequencies with one pseudo-count per level.
std::vector<double> categorical_weights(const Dimension& d, const std::vector<const Trial*>& trials) {
  std::vector<double> w(d.levels.size(), 1.0);
  for (const Trial* t : trials) {
    const auto& v = t->params.at(d.name);
    for (std::size_t i = 0; i < d.levels.size(); ++i) {
      if (d.levels[i] == v) w[i] += 1.0;
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

}  // namespace

nlohmann::json sample_uniform(const SearchSpace& space, std::uint64_t seed, std::size_t trial_index) {
  space.validate();
  std::mt19937_64 rng(mix_seed(seed, trial_index));
  nlohmann::json out = nlohmann::json::object();
  for (const auto& d : space.dims) out[d.name] = uniform_value(d, rng);
  return out;
}

nlohmann::json tpe_suggest(const std::vector<Trial>& history, const SearchSpace& space, const TpeConfig& config) {
  space.validate();
  if (history.size() < config.n_startup_trials || history.empty()) {
    return sample_uniform(space, config.seed, history.size());
  }
  std::vector<const Trial*> ranked;
  for (const auto& t : history) ranked.push_back(&t);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Trial* a, const Trial* b) { return a->objective > b->objective; });
  const auto n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(config.gamma * static_cast<double>(ranked.size()))));
  const std::vector<const Trial*> good(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n_good));
  const std::vector<const Trial*> bad(ranked.begin() + static_cast<std::ptrdiff_t>(n_good), ranked.end());

  std::mt19937_64 rng(mix_seed(config.seed, history.size()));
  std::vector<nlohmann::json> candidates(config.n_candidates, nlohmann::json::object());
  std::vector<double> score(config.n_candidates, 0.0);
  for (const auto& d : space.dims) {
    if (d.kind == DimKind::categorical) {
      const auto l = categorical_weights(d, good);
      const auto g = categorical_weights(d, bad);
      std::discrete_distribution<std::size_t> pick(l.begin(), l.end());
      for (std::size_t c = 0; c < config.n_candidates; ++c) {
        const std::size_t i = pick(rng);
        candidates[c][d.name] = d.levels[i];
        score[c] += std::log(l[i]) - std::log(g[i]);
      }
      continue;
    }
    const Axis ax = axis_of(d);
    std::vector<double> go, bo;
    for (const Trial* t : good) go.push_back(to_axis(d, t->params.at(d.name)));
    for (const Trial* t : bad) bo.push_back(to_axis(d, t->params.at(d.name)));
    const NumericParzen l(go, ax), g(bo, ax);
    for (std::size_t c = 0; c < config.n_candidates; ++c) {
      const nlohmann::json v = from_axis(d, l.sample(rng));
      const double x = to_axis(d, v);
      candidates[c][d.name] = v;
      score[c] += std::log(l.density(x)) - std::log(g.density(x));
    }
  }
  const auto best = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
  return candidates[best];
}

namespace {

Trial run_trial(std::size_t id, nlohmann::json params, const Objective& objective, std::uint64_t seed) {
  Trial t;
  t.id = id;
  t.params = std::move(params);
  t.seed = mix_seed(seed, 0x7E57 + id);
  try {
    t.fold_scores = objective(t.params, t.seed);
    if (t.fold_scores.empty()) throw Error("objective returned no scores");
    t.objective = std::accumulate(t.fold_scores.begin(), t.fold_scores.end(), 0.0) /
                  static_cast<double>(t.fold_scores.size());
    if (!std::isfinite(t.objective)) throw Error("non-finite objective");
    t.status = TrialStatus::ok;
  } catch (const std::exception&) {
    t.status = TrialStatus::failed;
    t.objective = -std::numeric_limits<double>::infinity();
  }
  return t;
}

std::size_t best_index(const std::vector<Trial>& trials) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < trials.size(); ++i) {
    if (trials[i].objective > trials[best].objective) best = i;
  }
  return best;
}

}  // namespace

HpoResult optimize_tpe(const SearchSpace& space, const Objective& objective, const TpeConfig& config) {
  space.validate();
  config.validate();
  HpoResult r;
  for (std::size_t i = 0; i < config.budget; ++i) {
    r.trials.push_back(run_trial(i, tpe_suggest(r.trials, space, config), objective, config.seed));
  }
  r.best = best_index(r.trials);
  return r;
}

HpoResult random_search(const SearchSpace& space, const Objective& objective, const TpeConfig& config) {
  space.validate();
  config.validate();
  HpoResult r;
  for (std::size_t i = 0; i < config.budget; ++i) {
    r.trials.push_back(run_trial(i, sample_uniform(space, config.seed, i), objective, config.seed));
  }
  r.best = best_index(r.trials);
  return r;
}

Objective cv_objective(ModelKind kind, const Dataset& data, std::size_t k, std::uint64_t fold_seed, Execution exec) {
  data.validate();
  std::vector<std::string> groups = data.group_ids;
  if (groups.empty()) {
    for (std::size_t i = 0; i < data.size(); ++i) groups.push_back(std::to_string(i));
  }
  if (groups.size() != data.size()) throw std::invalid_argument("cv_objective: group_ids size mismatch");
  const std::set<std::string> distinct(groups.begin(), groups.end());
  const std::vector<std::string> unique(distinct.begin(), distinct.end());
  const auto folds = group_kfold(unique, k, fold_seed);
  std::vector<std::size_t> fold_of(data.size());
  {
    std::map<std::string, std::size_t> where;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      for (const auto& g : folds[f]) where[g] = f;
    }
    for (std::size_t i = 0; i < data.size(); ++i) fold_of[i] = where.at(groups[i]);
  }
  return [kind, &data, fold_of, nfolds = folds.size(), exec](const nlohmann::json& params, std::uint64_t seed) {
    ModelParams mp = params_from_json(kind, params);
    set_seed(mp, seed);
    std::vector<double> scores(nfolds, 0.0);
    std::vector<std::exception_ptr> errors(nfolds);
    auto one = [&](std::ptrdiff_t fi) {
      const auto f = static_cast<std::size_t>(fi);
      try {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? test : train).push_back(i);
        const Dataset tr = data.subset(train);
        const Dataset te = data.subset(test);
        const auto model = fit_classifier(tr, mp, Execution::serial);
        const auto pred = predict_batch(*model, te.X, Execution::serial);
        scores[f] = weighted_f1(te.y, pred, data.num_classes()).weighted_f1;
      } catch (...) {
        errors[f] = std::current_exception();
      }
    };
    const auto nf = static_cast<std::ptrdiff_t>(nfolds);
    if (exec == Execution::serial) {
      for (std::ptrdiff_t f = 0; f < nf; ++f) one(f);
    } else {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t f = 0; f < nf; ++f) one(f);
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return scores;
  };
}

HpoResult tune(ModelKind kind, const SearchSpace& space, const Dataset& data, std::size_t k, const TpeConfig& config,
               Execution exec) {
  return optimize_tpe(space, cv_objective(kind, data, k, config.seed, exec), config);
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_trials_csv(std::ostream& out, const std::vector<Trial>& trials) {
  out << "trial_id,params,fold_scores,mean_f1,status,seed\n";
  out.precision(17);
  for (const auto& t : trials) {
    out << t.id << ',' << csv_quote(t.params.dump()) << ',' << csv_quote(nlohmann::json(t.fold_scores).dump()) << ',';
    if (t.status == TrialStatus::ok) {
      out << t.objective;
    } else {
      out << "-inf";
    }
    out << ',' << (t.status == TrialStatus::ok ? "ok" : "failed") << ',' << t.seed << '\n';
  }
}

ModelParams load_preset(ModelKind kind, const std::string& target) {
  const Target t = [&] {
    try {
      return target_from_string(target);
    } catch (const std::exception&) {
      throw ConfigError("no preset for unknown target '" + target + "'");
    }
  }();
  const auto row = static_cast<std::size_t>(t);  // time_to_fix, risk, debug, resolution
  if (kind == ModelKind::random_forest) {
    struct Row {
      int max_depth;
      MaxFeatures max_features;
      int n_estimators;
      SplitCriterion criterion;
    };
    static constexpr Row kTable[] = {{40, MaxFeatures::sqrt, 877, SplitCriterion::gini},
                                     {20, MaxFeatures::auto_, 166, SplitCriterion::gini},
                                     {10, MaxFeatures::sqrt, 297, SplitCriterion::entropy},
                                     {10, MaxFeatures::sqrt, 215, SplitCriterion::entropy}};
    RandomForestParams p;
    p.max_depth = kTable[row].max_depth;
    p.max_features = kTable[row].max_features;
    p.n_estimators = kTable[row].n_estimators;
    p.criterion = kTable[row].criterion;
    return p;
  }
  if (kind == ModelKind::mlp) {
    struct Row {
      int hidden;
      double alpha;
      Activation activation;
      Solver solver;
    };
    static constexpr Row kTable[] = {{36, 3.8183, Activation::relu, Solver::adam},
                                     {0, 0.0332, Activation::relu, Solver::adam},
                                     {27, 0.1409, Activation::relu, Solver::sgd},
                                     {32, 0.0005, Activation::relu, Solver::lbfgs}};
    MlpParams p;
    p.hidden_layer_sizes = kTable[row].hidden;
    p.alpha = kTable[row].alpha;
    p.activation = kTable[row].activation;
    p.solver = kTable[row].solver;
    return p;
  }
  throw ConfigError(std::string("no tuned preset for ") + to_string(kind));
}

ModelParams preset_by_name(const std::string& name) {
  const std::string prefix = "paper-";
  if (name.rfind(prefix, 0) != 0) throw ConfigError("unknown preset '" + name + "'");
  const auto rest = name.substr(prefix.size());
  const auto dash = rest.find('-');
  if (dash == std::string::npos) throw ConfigError("unknown preset '" + name + "'");
  const std::string family = rest.substr(0, dash);
  const std::string target = rest.substr(dash + 1);
  if (family == "rf") return load_preset(ModelKind::random_forest, target);
  if (family == "mlp") return load_preset(ModelKind::mlp, target);
  throw ConfigError("unknown preset family '" + family + "' in '" + name + "'");
}

}  // namespace triage
