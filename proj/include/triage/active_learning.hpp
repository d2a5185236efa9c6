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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "triage/classifier.hpp"
#include "triage/corpus.hpp"
#include "triage/eval.hpp"
#include "triage/features.hpp"
#include "triage/labels.hpp"
#include "triage/model.hpp"

namespace triage {

// Shannon entropy in nats; 0 * log 0 counts as 0.
double entropy(std::span<const double> p);

inline constexpr std::size_t kNumExpertTargets = kExpertTargets.size();
std::size_t expert_index(Target t);  // throws std::invalid_argument for time_to_fix

// Entropy of each target model's prediction for every row of X. A null model
// stands for an untrained target and yields the uniform entropy ln k.
Matrix entropy_table(const std::array<const Classifier*, kNumExpertTargets>& models, const Matrix& X,
                     Execution exec = Execution::parallel);

struct Proposal {
  std::string base_id;
  Target target = Target::risk;
  double entropy = 0.0;  // nats
  std::uint64_t session_version = 0;
  // Per-target entropies of the proposed ticket; nullopt where that target
  // is already labeled.
  std::array<std::optional<double>, kNumExpertTargets> ticket_entropies;
};

struct Cell {
  std::size_t row = 0;
  std::size_t target = 0;
};

// Arg-max over eligible (row, target) cells of H. Ties go to the smallest
// base id, then to the target order risk < debug < resolution. Returns
// nullopt when no cell is eligible.
std::optional<Cell> select_max_entropy(const std::vector<std::string>& ids, const Matrix& H,
                                       const std::vector<std::array<bool, kNumExpertTargets>>& eligible);

enum class Strategy { entropy, random };
const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Model selection on the initial pool

struct CandidateScore {
  ModelKind kind;
  std::array<double, kNumExpertTargets> f1{};
  double mean_f1 = 0.0;
};

struct ModelSelectionReport {
  std::vector<CandidateScore> candidates;
  ModelKind chosen = ModelKind::random_forest;
  // "<base_id>:<target>" for held-out rows whose class occurs only once.
  std::vector<std::string> singleton_flags;
  nlohmann::json to_json() const;
};

// Leave-one-out weighted f1 per candidate and target; the best mean wins,
// ties resolved by the order of `candidates`. `y[t][i]` is the class of row
// i for expert target t. A held-out row whose class has no other member
// counts as a miss for its class and is flagged.
ModelSelectionReport select_al_model(const Matrix& X, const std::array<std::vector<int>, kNumExpertTargets>& y,
                                     const std::vector<std::string>& ids,
                                     const std::vector<ModelParams>& candidates,
                                     Execution exec = Execution::parallel);
// RF, SVM, NB with default parameters and the given seed.
std::vector<ModelParams> default_al_candidates(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Learning curves

struct CurveRow {
  std::size_t n_labeled = 0;
  std::string target;
  double f1 = 0.0;
  std::string strategy;
  std::uint64_t seed = 0;
  bool operator==(const CurveRow&) const = default;
};

// Header n_labeled,target,f1,strategy,seed.
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);
nlohmann::json curve_to_json(const std::vector<CurveRow>& rows);
std::vector<CurveRow> curve_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Session

struct ALConfig {
  ModelParams model = RandomForestParams{};
  FeatureOptions features;
  std::uint64_t seed = 0;
  // Retrain a target after this many accepted labels touching it.
  int retrain_every = 1;

  nlohmann::json to_json() const;
  static ALConfig from_json(const nlohmann::json& j);
};

struct ProposalLogEntry {
  std::string base_id;
  Target target = Target::risk;
  double entropy = 0.0;
  std::uint64_t session_version = 0;
  bool operator==(const ProposalLogEntry&) const = default;
};

struct SubmitResult {
  std::uint64_t session_version = 0;
  std::vector<Target> retrained;
  bool fully_labeled = false;
};

// Pool-based active-learning state over base tickets. Each ticket enters the
// models through its full history; derived prefixes are never added to the
// pools. Not thread-safe: callers serialize mutations.
class ALSession {
 public:
  // Fits the feature spec on the pool (no labels involved) and trains every
  // target that has labels. Labels for ids outside the pool raise DataError.
  static ALSession create(std::vector<BaseTicket> pool, const Schema& schema, ALConfig config,
                          const ExpertLabels& initial_labels = {});

  // Highest-entropy (ticket, target) among labels still missing. Pure:
  // repeated calls without a submit return the same proposal. Throws
  // ExhaustedError when every ticket is fully labeled.
  Proposal propose_next(Execution exec = Execution::parallel) const;
  // Appends to the proposal log unless the newest entry is identical.
  void record_proposal(const Proposal& p);

  // Records a label fragment. Throws DataError for an unknown id or an empty
  // fragment, ConflictError when expected_version is stale or an existing
  // label would change without `force`.
  SubmitResult submit_label(const std::string& base_id, const LabelSet& fragment,
                            std::optional<std::uint64_t> expected_version = std::nullopt, bool force = false);

  // Per-target distributions for an arbitrary ticket.
  std::array<std::vector<double>, kNumExpertTargets> predict(const DerivedTicket& ticket) const;

  // Held-out tickets with known labels; when present, a curve row per target
  // is appended after every retrain.
  void set_evaluation_set(std::vector<BaseTicket> tickets, ExpertLabels labels);

  std::uint64_t version() const { return version_; }
  const ALConfig& config() const { return config_; }
  const Schema& schema() const { return schema_; }
  const FeatureSpec& feature_spec() const { return spec_; }
  const std::vector<BaseTicket>& pool() const { return pool_; }
  const BaseTicket* find_ticket(const std::string& base_id) const;
  const ExpertLabels& labels() const { return labels_; }
  std::vector<std::string> labeled_ids() const;
  std::vector<std::string> unlabeled_ids() const;
  const std::vector<ProposalLogEntry>& proposal_log() const { return log_; }
  const std::vector<CurveRow>& curve() const { return curve_; }
  const Classifier* model(Target t) const { return models_[expert_index(t)].get(); }
  const std::array<std::uint64_t, kNumExpertTargets>& model_versions() const { return model_versions_; }
  const std::string& created_at() const { return created_at_; }

  // Writes the session directory: session.json (commit point), tickets,
  // feature spec, model blobs. Files are replaced atomically by rename.
  void save(const std::string& dir) const;
  // Loading attaches the directory.
  static ALSession load(const std::string& dir);
  // Once attached, every accepted submit is saved before submit_label returns.
  void attach_directory(std::string dir) { dir_ = std::move(dir); }
  const std::string& directory() const { return dir_; }

  // Summary used by the HTTP service.
  nlohmann::json descriptor(const std::string& session_id) const;

 private:
  void retrain(std::size_t target_index);
  void record_curve_point(std::size_t target_index);

  ALConfig config_;
  Schema schema_;
  FeatureSpec spec_;
  std::vector<BaseTicket> pool_;
  std::vector<std::string> sorted_ids_;
  std::map<std::string, std::size_t> row_of_;
  Matrix X_;
  ExpertLabels labels_;
  std::array<std::shared_ptr<const Classifier>, kNumExpertTargets> models_;
  std::array<std::uint64_t, kNumExpertTargets> model_versions_{};
  std::array<int, kNumExpertTargets> pending_{};
  std::uint64_t version_ = 0;
  std::vector<ProposalLogEntry> log_;
  std::vector<CurveRow> curve_;
  std::vector<BaseTicket> eval_tickets_;
  ExpertLabels eval_labels_;
  Matrix eval_X_;
  std::string created_at_;
  std::string dir_;
};

// ---------------------------------------------------------------------------
// Simulation

// Pool and held-out data at the feature level with hidden labels.
struct SimulationData {
  Matrix pool_X;
  std::vector<std::string> pool_ids;
  std::array<std::vector<int>, kNumExpertTargets> pool_y;
  Matrix test_X;
  std::array<std::vector<int>, kNumExpertTargets> test_y;
};

struct SimulationOptions {
  Strategy strategy = Strategy::entropy;
  std::size_t initial_pool = 39;
  std::size_t steps = 50;
  std::uint64_t seed = 0;
  ModelParams model = RandomForestParams{};
};

struct SimulationResult {
  std::vector<CurveRow> curve;
  std::vector<ProposalLogEntry> proposals;  // one per acquisition, in order
  std::vector<std::string> initial_ids;
  std::vector<std::string> warnings;
};

// Each acquisition reveals all three labels of the chosen ticket, retrains
// and appends one curve row per target (plus the initial rows at step 0).
SimulationResult simulate(const SimulationData& data, const SimulationOptions& options,
                          Execution exec = Execution::parallel);

// Builds SimulationData from tickets: the feature spec is fitted on the pool
// and applied to full histories. Every ticket needs all three labels.
SimulationData make_simulation_data(const std::vector<BaseTicket>& pool, const std::vector<BaseTicket>& test,
                                    const ExpertLabels& labels, const Schema& schema,
                                    const FeatureOptions& options);

}  // namespace triage
