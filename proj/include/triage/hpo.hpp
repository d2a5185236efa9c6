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

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "triage/dataset.hpp"
#include "triage/labels.hpp"
#include "triage/model.hpp"

namespace triage {

enum class DimKind { categorical, int_uniform, log_uniform };

struct Dimension {
  std::string name;
  DimKind kind = DimKind::categorical;
  std::vector<nlohmann::json> levels;  // categorical
  double low = 0.0;                    // int_uniform / log_uniform, inclusive
  double high = 0.0;

  static Dimension categorical(std::string name, std::vector<nlohmann::json> levels);
  static Dimension int_uniform(std::string name, std::int64_t low, std::int64_t high);
  static Dimension log_uniform(std::string name, double low, double high);

  bool contains(const nlohmann::json& value) const;
};

struct SearchSpace {
  std::vector<Dimension> dims;
  // Throws ConfigError on an empty dimension, inverted bounds or a
  // non-positive log_uniform bound.
  void validate() const;
  bool contains(const nlohmann::json& params) const;
};

// max_depth {10..50, None}, max_features, n_estimators 10..1000, criterion.
SearchSpace rf_search_space();
// hidden_layer_sizes 10..300, alpha log-uniform 1e-8..1e3, activation, solver.
SearchSpace mlp_search_space();
// n_rounds 10..500, learning_rate log-uniform 0.01..1, max_depth 1..8.
SearchSpace gbt_search_space();
SearchSpace search_space_for(ModelKind kind);

enum class TrialStatus { ok, failed };

struct Trial {
  std::size_t id = 0;
  nlohmann::json params;  // name -> value
  std::vector<double> fold_scores;
  double objective = 0.0;  // -infinity when failed
  TrialStatus status = TrialStatus::ok;
  std::uint64_t seed = 0;
};

struct TpeConfig {
  std::size_t n_startup_trials = 20;
  double gamma = 0.25;
  std::size_t n_candidates = 24;
  std::size_t budget = 0;  // required
  std::uint64_t seed = 0;
  void validate() const;
};

// Uniform draw from the space, seeded per trial index.
nlohmann::json sample_uniform(const SearchSpace& space, std::uint64_t seed, std::size_t trial_index);

// Next point to evaluate given the (maximizing) history. Deterministic in
// (history, space, config).
nlohmann::json tpe_suggest(const std::vector<Trial>& history, const SearchSpace& space, const TpeConfig& config);

// Returns the fold scores for one parameter point; an exception marks the
// trial failed.
using Objective = std::function<std::vector<double>(const nlohmann::json& params, std::uint64_t trial_seed)>;

struct HpoResult {
  std::vector<Trial> trials;
  std::size_t best = 0;  // index into trials
  const Trial& best_trial() const { return trials.at(best); }
};

HpoResult optimize_tpe(const SearchSpace& space, const Objective& objective, const TpeConfig& config);
// Every trial drawn with sample_uniform; identical to the TPE startup phase.
HpoResult random_search(const SearchSpace& space, const Objective& objective, const TpeConfig& config);

// Group-aware k-fold CV objective: folds are dealt over the distinct group
// ids, each fold trains on the others and scores weighted f1 on itself.
// `data` must outlive the returned objective.
Objective cv_objective(ModelKind kind, const Dataset& data, std::size_t k, std::uint64_t fold_seed,
                       Execution exec = Execution::parallel);

HpoResult tune(ModelKind kind, const SearchSpace& space, const Dataset& data, std::size_t k,
               const TpeConfig& config, Execution exec = Execution::parallel);

// trial_id,params,fold_scores,mean_f1,status,seed
void write_trials_csv(std::ostream& out, const std::vector<Trial>& trials);

// Tuned values reported for the industrial dataset, per target.
ModelParams load_preset(ModelKind kind, const std::string& target);
// Names of the form "paper-rf-debug" or "paper-mlp-time_to_fix".
ModelParams preset_by_name(const std::string& name);

}  // namespace triage
