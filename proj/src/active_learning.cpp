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

#include "triage/active_learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

namespace fs = std::filesystem;

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h > 0.0 ? h : 0.0;
}

std::size_t expert_index(Target t) {
  switch (t) {
    case Target::risk: return 0;
    case Target::debug: return 1;
    case Target::resolution: return 2;
    case Target::time_to_fix: break;
  }
  throw std::invalid_argument("time_to_fix is not an expert-labeled target");
}

namespace {

double uniform_entropy(std::size_t k) {
  const std::vector<double> u(k, 1.0 / static_cast<double>(k));
  return entropy(u);
}

std::vector<double> uniform(std::size_t k) { return std::vector<double>(k, 1.0 / static_cast<double>(k)); }

}  // namespace

Matrix entropy_table(const std::array<const Classifier*, kNumExpertTargets>& models, const Matrix& X,
                     Execution exec) {
  Matrix H(X.rows(), kNumExpertTargets);
  std::array<double, kNumExpertTargets> flat{};
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) flat[t] = uniform_entropy(num_classes(kExpertTargets[t]));
  const auto n = static_cast<std::ptrdiff_t>(X.rows());
  auto one = [&](std::ptrdiff_t i) {
    const auto r = static_cast<std::size_t>(i);
    for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
      H(r, t) = models[t] ? entropy(models[t]->predict_proba(X.row(r))) : flat[t];
    }
  };
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
  }
  return H;
}

std::optional<Cell> select_max_entropy(const std::vector<std::string>& ids, const Matrix& H,
                                       const std::vector<std::array<bool, kNumExpertTargets>>& eligible) {
  if (ids.size() != H.rows() || eligible.size() != H.rows()) {
    throw std::invalid_argument("select_max_entropy: ids, table and eligibility differ in size");
  }
  const bool numeric = all_numeric_ids(ids);
  std::optional<Cell> best;
  for (std::size_t r = 0; r < H.rows(); ++r) {
    for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
      if (!eligible[r][t]) continue;
      if (!best) {
        best = Cell{r, t};
        continue;
      }
      const double h = H(r, t);
      const double hb = H(best->row, best->target);
      bool better = h > hb;
      if (h == hb) {
        if (best->row != r) {
          better = base_id_less(ids[r], ids[best->row], numeric);
        } else {
          better = t < best->target;
        }
      }
      if (better) best = Cell{r, t};
    }
  }
  return best;
}

const char* to_string(Strategy s) { return s == Strategy::entropy ? "entropy" : "random"; }

Strategy strategy_from_string(const std::string& s) {
  if (s == "entropy") return Strategy::entropy;
  if (s == "random") return Strategy::random;
  throw ConfigError("unknown acquisition strategy '" + s + "'");
}

namespace {

std::shared_ptr<const Classifier> train_target(const Matrix& X, const std::vector<std::size_t>& rows,
                                               const std::vector<int>& y, std::size_t target_index,
                                               ModelParams params, std::uint64_t seed, Execution exec) {
  if (rows.empty()) return nullptr;
  Dataset ds;
  ds.X = X.select_rows(rows);
  ds.y = y;
  ds.class_names = class_names(kExpertTargets[target_index]);
  set_seed(params, mix_seed(seed, 100 + target_index));
  return fit_classifier(ds, params, exec);
}

int label_index(const LabelSet& l, std::size_t target_index) {
  return *l.get(kExpertTargets[target_index]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Model selection

nlohmann::json ModelSelectionReport::to_json() const {
  nlohmann::json c = nlohmann::json::array();
  for (const auto& s : candidates) {
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t t = 0; t < kNumExpertTargets; ++t) per[to_string(kExpertTargets[t])] = s.f1[t];
    c.push_back({{"kind", to_string(s.kind)}, {"f1", per}, {"mean_f1", s.mean_f1}});
  }
  return {{"candidates", c}, {"chosen", to_string(chosen)}, {"singleton_flags", singleton_flags}};
}

std::vector<ModelParams> default_al_candidates(std::uint64_t seed) {
  std::vector<ModelParams> out = {RandomForestParams{}, SvmParams{}, NaiveBayesParams{}};
  for (auto& p : out) set_seed(p, seed);
  return out;
}

ModelSelectionReport select_al_model(const Matrix& X, const std::array<std::vector<int>, kNumExpertTargets>& y,
                                     const std::vector<std::string>& ids,
                                     const std::vector<ModelParams>& candidates, Execution exec) {
  const std::size_t n = X.rows();
  if (n < 2) throw std::invalid_argument("select_al_model: pool needs at least 2 tickets");
  if (candidates.empty()) throw std::invalid_argument("select_al_model: no candidates");
  for (const auto& col : y) {
    if (col.size() != n) throw std::invalid_argument("select_al_model: label column size mismatch");
  }
  if (ids.size() != n) throw std::invalid_argument("select_al_model: id count mismatch");

  ModelSelectionReport report;
  std::array<std::vector<bool>, kNumExpertTargets> singleton;
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    const std::size_t k = num_classes(kExpertTargets[t]);
    std::vector<std::size_t> counts(k, 0);
    for (int c : y[t]) {
      if (c < 0 || static_cast<std::size_t>(c) >= k) throw std::invalid_argument("select_al_model: label out of range");
      ++counts[static_cast<std::size_t>(c)];
    }
    singleton[t].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      singleton[t][i] = counts[static_cast<std::size_t>(y[t][i])] == 1;
      if (singleton[t][i]) report.singleton_flags.push_back(ids[i] + ":" + to_string(kExpertTargets[t]));
    }
  }

  for (const auto& params : candidates) {
    CandidateScore score;
    score.kind = kind_of(params);
    for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
      std::vector<int> pred(n, -1);
      auto one = [&](std::ptrdiff_t hi) {
        const auto held = static_cast<std::size_t>(hi);
        if (singleton[t][held]) return;
        std::vector<std::size_t> rows;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == held) continue;
          rows.push_back(i);
          labels.push_back(y[t][i]);
        }
        auto model = train_target(X, rows, labels, t, params, 0, Execution::serial);
        pred[held] = model->predict(X.row(held));
      };
      const auto nn = static_cast<std::ptrdiff_t>(n);
      if (exec == Execution::serial) {
        for (std::ptrdiff_t i = 0; i < nn; ++i) one(i);
      } else {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < nn; ++i) one(i);
      }
      ConfusionCounts counts;
      const std::size_t k = num_classes(kExpertTargets[t]);
      counts.tp.assign(k, 0);
      counts.fp.assign(k, 0);
      counts.fn.assign(k, 0);
      counts.n = n;
      for (std::size_t i = 0; i < n; ++i) {
        const auto truth = static_cast<std::size_t>(y[t][i]);
        if (pred[i] < 0) {
          ++counts.fn[truth];  // singleton: a miss with no predicted class
        } else if (static_cast<std::size_t>(pred[i]) == truth) {
          ++counts.tp[truth];
        } else {
          ++counts.fn[truth];
          ++counts.fp[static_cast<std::size_t>(pred[i])];
        }
      }
      score.f1[t] = report_from_counts(counts).weighted_f1;
    }
    score.mean_f1 = (score.f1[0] + score.f1[1] + score.f1[2]) / 3.0;
    report.candidates.push_back(score);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < report.candidates.size(); ++c) {
    if (report.candidates[c].mean_f1 > report.candidates[best].mean_f1) best = c;
  }
  report.chosen = report.candidates[best].kind;
  return report;
}

// ---------------------------------------------------------------------------
// Curves

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
  out << "n_labeled,target,f1,strategy,seed\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.n_labeled << ',' << r.target << ',' << r.f1 << ',' << r.strategy << ',' << r.seed << '\n';
  }
}

nlohmann::json curve_to_json(const std::vector<CurveRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back(
        {{"n_labeled", r.n_labeled}, {"target", r.target}, {"f1", r.f1}, {"strategy", r.strategy}, {"seed", r.seed}});
  }
  return out;
}

std::vector<CurveRow> curve_from_json(const nlohmann::json& j) {
  std::vector<CurveRow> out;
  for (const auto& r : j) {
    out.push_back({r.at("n_labeled").get<std::size_t>(), r.at("target").get<std::string>(), r.at("f1").get<double>(),
                   r.at("strategy").get<std::string>(), r.at("seed").get<std::uint64_t>()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Session

nlohmann::json ALConfig::to_json() const {
  return {{"model", to_string(kind_of(model))},
          {"params", params_to_json(model)},
          {"features", feature_options_to_json(features)},
          {"seed", seed},
          {"retrain_every", retrain_every}};
}

ALConfig ALConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("active-learning config must be a JSON object");
  static const std::set<std::string> kKeys = {"model", "params", "features", "seed", "retrain_every"};
  for (const auto& [key, v] : j.items()) {
    if (!kKeys.count(key)) throw ConfigError("unknown active-learning option '" + key + "'");
  }
  ALConfig c;
  try {
    const ModelKind kind = model_kind_from_string(j.value("model", std::string("random_forest")));
    c.model = params_from_json(kind, j.value("params", nlohmann::json::object()));
    if (j.contains("features")) {
      c.features = feature_options_from_json(j.at("features"));
    } else {
      c.features.text_mode = TextMode::tfidf;
    }
    c.seed = j.value("seed", std::uint64_t{0});
    c.retrain_every = j.value("retrain_every", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad active-learning config: ") + e.what());
  }
  if (c.retrain_every < 1) throw ConfigError("retrain_every must be at least 1");
  return c;
}

namespace {

Matrix features_of(const FeatureSpec& spec, const std::vector<BaseTicket>& tickets) {
  std::vector<DerivedTicket> full;
  full.reserve(tickets.size());
  for (const auto& t : tickets) full.push_back(full_history(t));
  return spec.assemble_batch(full);
}

std::string now_iso() {
  const auto now = std::chrono::system_clock::now();
  return format_iso8601(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

}  // namespace

ALSession ALSession::create(std::vector<BaseTicket> pool, const Schema& schema, ALConfig config,
                            const ExpertLabels& initial_labels) {
  if (pool.empty()) throw DataError("active-learning pool is empty");
  ALSession s;
  s.config_ = std::move(config);
  s.schema_ = schema;
  s.pool_ = std::move(pool);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < s.pool_.size(); ++i) {
    if (!s.row_of_.emplace(s.pool_[i].base_id, i).second) {
      throw DataError("duplicate base id '" + s.pool_[i].base_id + "' in pool");
    }
    ids.push_back(s.pool_[i].base_id);
  }
  s.sorted_ids_ = sort_base_ids(ids);
  for (const auto& [id, l] : initial_labels) {
    if (!s.row_of_.count(id)) throw DataError("label for base id '" + id + "' outside the pool");
    LabelSet expert = l;
    expert.fixing_time_class.reset();
    s.labels_[id] = expert;
  }
  std::vector<DerivedTicket> full;
  for (const auto& t : s.pool_) full.push_back(full_history(t));
  s.spec_ = FeatureSpec::fit(full, schema, s.config_.features);
  s.X_ = s.spec_.assemble_batch(full);
  s.created_at_ = now_iso();
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) s.retrain(t);
  return s;
}

void ALSession::retrain(std::size_t t) {
  std::vector<std::size_t> rows;
  std::vector<int> y;
  for (const auto& id : sorted_ids_) {
    auto it = labels_.find(id);
    if (it == labels_.end()) continue;
    if (auto c = it->second.get(kExpertTargets[t])) {
      rows.push_back(row_of_.at(id));
      y.push_back(*c);
    }
  }
  models_[t] = train_target(X_, rows, y, t, config_.model, config_.seed, Execution::parallel);
  ++model_versions_[t];
  pending_[t] = 0;
  record_curve_point(t);
}

void ALSession::record_curve_point(std::size_t t) {
  if (eval_tickets_.empty()) return;
  std::vector<int> truth, pred;
  for (std::size_t i = 0; i < eval_tickets_.size(); ++i) {
    auto it = eval_labels_.find(eval_tickets_[i].base_id);
    if (it == eval_labels_.end()) continue;
    auto c = it->second.get(kExpertTargets[t]);
    if (!c) continue;
    truth.push_back(*c);
    pred.push_back(models_[t] ? models_[t]->predict(eval_X_.row(i)) : 0);
  }
  if (truth.empty()) return;
  std::size_t n_labeled = 0;
  for (const auto& [id, l] : labels_) n_labeled += l.get(kExpertTargets[t]).has_value();
  curve_.push_back({n_labeled, to_string(kExpertTargets[t]),
                    weighted_f1(truth, pred, num_classes(kExpertTargets[t])).weighted_f1, "session", config_.seed});
}

void ALSession::set_evaluation_set(std::vector<BaseTicket> tickets, ExpertLabels labels) {
  eval_tickets_ = std::move(tickets);
  eval_labels_ = std::move(labels);
  eval_X_ = features_of(spec_, eval_tickets_);
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) record_curve_point(t);
}

const BaseTicket* ALSession::find_ticket(const std::string& base_id) const {
  auto it = row_of_.find(base_id);
  return it == row_of_.end() ? nullptr : &pool_[it->second];
}

std::vector<std::string> ALSession::labeled_ids() const {
  std::vector<std::string> out;
  for (const auto& id : sorted_ids_) {
    auto it = labels_.find(id);
    if (it != labels_.end() && it->second.has_all_expert()) out.push_back(id);
  }
  return out;
}

std::vector<std::string> ALSession::unlabeled_ids() const {
  std::vector<std::string> out;
  for (const auto& id : sorted_ids_) {
    auto it = labels_.find(id);
    if (it == labels_.end() || !it->second.has_all_expert()) out.push_back(id);
  }
  return out;
}

Proposal ALSession::propose_next(Execution exec) const {
  const auto ids = unlabeled_ids();
  if (ids.empty()) throw ExhaustedError("every ticket in the pool is fully labeled");
  std::vector<std::size_t> rows;
  std::vector<std::array<bool, kNumExpertTargets>> eligible;
  for (const auto& id : ids) {
    rows.push_back(row_of_.at(id));
    std::array<bool, kNumExpertTargets> e{true, true, true};
    if (auto it = labels_.find(id); it != labels_.end()) {
      for (std::size_t t = 0; t < kNumExpertTargets; ++t) e[t] = !it->second.get(kExpertTargets[t]).has_value();
    }
    eligible.push_back(e);
  }
  const Matrix sub = X_.select_rows(rows);
  const Matrix H = entropy_table({models_[0].get(), models_[1].get(), models_[2].get()}, sub, exec);
  const auto cell = select_max_entropy(ids, H, eligible);
  Proposal p;
  p.base_id = ids[cell->row];
  p.target = kExpertTargets[cell->target];
  p.entropy = H(cell->row, cell->target);
  p.session_version = version_;
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    if (eligible[cell->row][t]) p.ticket_entropies[t] = H(cell->row, t);
  }
  return p;
}

void ALSession::record_proposal(const Proposal& p) {
  ProposalLogEntry e{p.base_id, p.target, p.entropy, p.session_version};
  if (!log_.empty() && log_.back() == e) return;
  log_.push_back(std::move(e));
}

SubmitResult ALSession::submit_label(const std::string& base_id, const LabelSet& fragment,
                                     std::optional<std::uint64_t> expected_version, bool force) {
  if (!row_of_.count(base_id)) throw DataError("unknown base id '" + base_id + "'");
  if (fragment.fixing_time_class) throw DataError("the fixing-time class is derived, not an expert label");
  if (!fragment.risk && !fragment.debug && !fragment.resolution) throw DataError("label fragment is empty");
  if (expected_version && *expected_version != version_) {
    throw ConflictError("stale session version " + std::to_string(*expected_version) + " (current " +
                        std::to_string(version_) + ")");
  }
  const LabelSet current = labels_.count(base_id) ? labels_.at(base_id) : LabelSet{};
  std::array<bool, kNumExpertTargets> changed{};
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    const auto incoming = fragment.get(kExpertTargets[t]);
    if (!incoming) continue;
    const auto existing = current.get(kExpertTargets[t]);
    if (existing && *existing != *incoming && !force) {
      throw ConflictError(std::string(to_string(kExpertTargets[t])) + " label of ticket '" + base_id +
                          "' already set; resubmit with force to overwrite");
    }
    changed[t] = !existing || *existing != *incoming;
  }

  // Work on a copy so that a failed retrain or save leaves this session intact.
  ALSession next = *this;
  LabelSet& l = next.labels_[base_id];
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    if (auto v = fragment.get(kExpertTargets[t])) l.set(kExpertTargets[t], *v);
  }
  ++next.version_;
  SubmitResult result;
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    if (!changed[t]) continue;
    if (++next.pending_[t] >= next.config_.retrain_every) {
      next.retrain(t);
      result.retrained.push_back(kExpertTargets[t]);
    }
  }
  result.session_version = next.version_;
  result.fully_labeled = l.has_all_expert();
  if (!next.dir_.empty()) next.save(next.dir_);
  *this = std::move(next);
  return result;
}

std::array<std::vector<double>, kNumExpertTargets> ALSession::predict(const DerivedTicket& ticket) const {
  const auto x = spec_.assemble(ticket).values;
  std::array<std::vector<double>, kNumExpertTargets> out;
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    out[t] = models_[t] ? models_[t]->predict_proba(x) : uniform(num_classes(kExpertTargets[t]));
  }
  return out;
}

nlohmann::json ALSession::descriptor(const std::string& session_id) const {
  std::size_t labeled = 0, partial = 0;
  for (const auto& [id, l] : labels_) {
    if (l.has_all_expert()) {
      ++labeled;
    } else if (l.risk || l.debug || l.resolution) {
      ++partial;
    }
  }
  nlohmann::json versions = nlohmann::json::object();
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) versions[to_string(kExpertTargets[t])] = model_versions_[t];
  return {{"session_id", session_id},
          {"created_at", created_at_},
          {"config",
           {{"model", to_string(kind_of(config_.model))},
            {"text_mode", to_string(config_.features.text_mode)},
            {"seed", config_.seed},
            {"retrain_every", config_.retrain_every}}},
          {"pool",
           {{"total", pool_.size()},
            {"labeled", labeled},
            {"unlabeled", pool_.size() - labeled},
            {"partially_labeled", partial}}},
          {"model_versions", versions},
          {"session_version", version_}};
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr int kSessionFormatVersion = 1;

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string blob_name(std::size_t t, std::uint64_t version) {
  return std::string(to_string(kExpertTargets[t])) + ".v" + std::to_string(version) + ".model";
}

std::string corpus_text(const std::vector<BaseTicket>& tickets) {
  std::ostringstream ss;
  for (const auto& t : tickets) ss << ticket_to_json(t).dump() << '\n';
  return ss.str();
}

nlohmann::json labels_json(const ExpertLabels& labels) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, l] : labels) j[id] = expert_labels_to_json(l);
  return j;
}

ExpertLabels labels_from(const nlohmann::json& j) {
  ExpertLabels out;
  for (const auto& [id, l] : j.items()) out[id] = expert_labels_from_json(l);
  return out;
}

std::vector<BaseTicket> read_tickets(const fs::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  auto result = ingest_corpus(in, schema);
  if (!result.rejected.empty()) {
    throw DataError("session ticket file '" + path.string() + "' has invalid records");
  }
  return result.corpus.tickets();
}

}  // namespace

void ALSession::save(const std::string& dir) const {
  const fs::path root(dir);
  fs::create_directories(root / "models");
  write_atomic(root / "tickets.jsonl", corpus_text(pool_));
  write_atomic(root / "feature_spec.json", spec_.to_json().dump());
  const std::string hash = spec_.hash();
  std::set<std::string> keep;
  nlohmann::json blobs = nlohmann::json::object();
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    if (!models_[t]) {
      blobs[to_string(kExpertTargets[t])] = nullptr;
      continue;
    }
    const std::string name = blob_name(t, model_versions_[t]);
    keep.insert(name);
    blobs[to_string(kExpertTargets[t])] = "models/" + name;
    if (!fs::exists(root / "models" / name)) {
      write_atomic(root / "models" / name,
                   save_model(*models_[t], {hash, to_string(kExpertTargets[t]), class_names(kExpertTargets[t])}));
    }
  }
  if (!eval_tickets_.empty()) {
    write_atomic(root / "eval_tickets.jsonl", corpus_text(eval_tickets_));
    write_atomic(root / "eval_labels.json", labels_json(eval_labels_).dump());
  }
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : log_) {
    log.push_back({{"base_id", e.base_id},
                   {"target", to_string(e.target)},
                   {"entropy", e.entropy},
                   {"session_version", e.session_version}});
  }
  const nlohmann::json session = {{"format_version", kSessionFormatVersion},
                                  {"created_at", created_at_},
                                  {"version", version_},
                                  {"config", config_.to_json()},
                                  {"schema", nlohmann::json::parse(schema_.to_json_text())},
                                  {"feature_spec_hash", hash},
                                  {"model_versions", model_versions_},
                                  {"pending", pending_},
                                  {"models", blobs},
                                  {"labels", labels_json(labels_)},
                                  {"proposal_log", log},
                                  {"curve", curve_to_json(curve_)},
                                  {"has_eval_set", !eval_tickets_.empty()}};
  write_atomic(root / "session.json", session.dump(1));
  // Blobs from earlier versions are no longer referenced by session.json.
  for (const auto& entry : fs::directory_iterator(root / "models")) {
    const auto name = entry.path().filename().string();
    if (!keep.count(name) && entry.path().extension() == ".model") fs::remove(entry.path());
  }
}

ALSession ALSession::load(const std::string& dir) {
  const fs::path root(dir);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(root / "session.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError("corrupt session.json in '" + dir + "': " + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kSessionFormatVersion) {
      throw ModelFormatError("unsupported session format_version in '" + dir + "'");
    }
    ALSession s;
    s.config_ = ALConfig::from_json(j.at("config"));
    s.schema_ = Schema::from_json_text(j.at("schema").dump());
    s.pool_ = read_tickets(root / "tickets.jsonl", s.schema_);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < s.pool_.size(); ++i) {
      s.row_of_.emplace(s.pool_[i].base_id, i);
      ids.push_back(s.pool_[i].base_id);
    }
    s.sorted_ids_ = sort_base_ids(ids);
    s.spec_ = FeatureSpec::from_json(nlohmann::json::parse(read_file(root / "feature_spec.json")));
    if (s.spec_.hash() != j.at("feature_spec_hash").get<std::string>()) {
      throw ModelFormatError("feature spec in '" + dir + "' does not match session.json");
    }
    s.X_ = features_of(s.spec_, s.pool_);
    s.created_at_ = j.at("created_at").get<std::string>();
    s.version_ = j.at("version").get<std::uint64_t>();
    s.model_versions_ = j.at("model_versions").get<std::array<std::uint64_t, kNumExpertTargets>>();
    s.pending_ = j.at("pending").get<std::array<int, kNumExpertTargets>>();
    s.labels_ = labels_from(j.at("labels"));
    for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
      const auto& ref = j.at("models").at(to_string(kExpertTargets[t]));
      if (ref.is_null()) continue;
      auto loaded = load_model(read_file(root / ref.get<std::string>()), kind_of(s.config_.model));
      if (loaded.meta.feature_spec_hash != s.spec_.hash()) {
        throw ModelFormatError("model blob " + ref.get<std::string>() + " was trained on another feature spec");
      }
      s.models_[t] = std::move(loaded.model);
    }
    for (const auto& e : j.at("proposal_log")) {
      s.log_.push_back({e.at("base_id").get<std::string>(), target_from_string(e.at("target").get<std::string>()),
                        e.at("entropy").get<double>(), e.at("session_version").get<std::uint64_t>()});
    }
    s.curve_ = curve_from_json(j.at("curve"));
    if (j.value("has_eval_set", false)) {
      s.eval_tickets_ = read_tickets(root / "eval_tickets.jsonl", s.schema_);
      s.eval_labels_ = labels_from(nlohmann::json::parse(read_file(root / "eval_labels.json")));
      s.eval_X_ = features_of(s.spec_, s.eval_tickets_);
    }
    s.dir_ = dir;
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError("malformed session in '" + dir + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

std::array<std::shared_ptr<const Classifier>, kNumExpertTargets> train_all(
    const SimulationData& data, const std::vector<std::size_t>& labeled, const SimulationOptions& o, Execution exec) {
  std::array<std::shared_ptr<const Classifier>, kNumExpertTargets> models;
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    std::vector<int> y;
    for (auto r : labeled) y.push_back(data.pool_y[t][r]);
    models[t] = train_target(data.pool_X, labeled, y, t, o.model, o.seed, exec);
  }
  return models;
}

void append_curve(std::vector<CurveRow>& curve, const SimulationData& data,
                  const std::array<std::shared_ptr<const Classifier>, kNumExpertTargets>& models, std::size_t n_labeled,
                  const SimulationOptions& o, Execution exec) {
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    std::vector<int> pred = models[t] ? predict_batch(*models[t], data.test_X, exec)
                                      : std::vector<int>(data.test_X.rows(), 0);
    const double f = data.test_y[t].empty()
                         ? 0.0
                         : weighted_f1(data.test_y[t], pred, num_classes(kExpertTargets[t])).weighted_f1;
    curve.push_back({n_labeled, to_string(kExpertTargets[t]), f, to_string(o.strategy), o.seed});
  }
}

}  // namespace

SimulationResult simulate(const SimulationData& data, const SimulationOptions& o, Execution exec) {
  const std::size_t n = data.pool_X.rows();
  if (data.pool_ids.size() != n) throw std::invalid_argument("simulate: pool ids do not match the pool matrix");
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    if (data.pool_y[t].size() != n || data.test_y[t].size() != data.test_X.rows()) {
      throw std::invalid_argument("simulate: label columns do not match the data");
    }
  }
  SimulationResult res;
  std::size_t initial = o.initial_pool;
  if (initial > n) {
    res.warnings.push_back("initial pool " + std::to_string(initial) + " exceeds pool size " + std::to_string(n) +
                           "; truncated");
    initial = n;
  }
  std::size_t steps = o.steps;
  if (steps > n - initial) {
    res.warnings.push_back("steps " + std::to_string(steps) + " exceed the " + std::to_string(n - initial) +
                           " unlabeled tickets; truncated");
    steps = n - initial;
  }

  // Canonical order makes the run independent of the input row order.
  const bool numeric = all_numeric_ids(data.pool_ids);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return base_id_less(data.pool_ids[a], data.pool_ids[b], numeric);
  });
  std::vector<std::size_t> perm = order;
  std::mt19937_64 init_rng(mix_seed(o.seed, 1));
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[init_rng() % i]);

  std::vector<bool> is_labeled(n, false);
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < initial; ++i) {
    is_labeled[perm[i]] = true;
    res.initial_ids.push_back(data.pool_ids[perm[i]]);
  }
  auto labeled_rows = [&] {
    std::vector<std::size_t> rows;
    for (auto r : order) {
      if (is_labeled[r]) rows.push_back(r);
    }
    return rows;
  };
  labeled = labeled_rows();
  auto models = train_all(data, labeled, o, exec);
  append_curve(res.curve, data, models, labeled.size(), o, exec);

  std::mt19937_64 pick_rng(mix_seed(o.seed, 2));
  for (std::size_t step = 0; step < steps; ++step) {
    std::vector<std::size_t> candidates;
    std::vector<std::string> ids;
    for (auto r : order) {
      if (!is_labeled[r]) {
        candidates.push_back(r);
        ids.push_back(data.pool_ids[r]);
      }
    }
    ProposalLogEntry entry;
    std::size_t chosen;
    if (o.strategy == Strategy::entropy) {
      const Matrix H = entropy_table({models[0].get(), models[1].get(), models[2].get()},
                                     data.pool_X.select_rows(candidates), exec);
      const std::vector<std::array<bool, kNumExpertTargets>> eligible(candidates.size(), {true, true, true});
      const auto cell = *select_max_entropy(ids, H, eligible);
      chosen = candidates[cell.row];
      entry = {ids[cell.row], kExpertTargets[cell.target], H(cell.row, cell.target), step};
    } else {
      const std::size_t k = pick_rng() % candidates.size();
      chosen = candidates[k];
      entry = {ids[k], Target::risk, 0.0, step};
    }
    res.proposals.push_back(entry);
    is_labeled[chosen] = true;
    labeled = labeled_rows();
    models = train_all(data, labeled, o, exec);
    append_curve(res.curve, data, models, labeled.size(), o, exec);
  }
  return res;
}

SimulationData make_simulation_data(const std::vector<BaseTicket>& pool, const std::vector<BaseTicket>& test,
                                    const ExpertLabels& labels, const Schema& schema,
                                    const FeatureOptions& options) {
  if (pool.empty()) throw DataError("simulation pool is empty");
  SimulationData d;
  std::vector<DerivedTicket> full;
  for (const auto& t : pool) full.push_back(full_history(t));
  const FeatureSpec spec = FeatureSpec::fit(full, schema, options);
  d.pool_X = spec.assemble_batch(full);
  d.test_X = features_of(spec, test);
  auto fill = [&](const std::vector<BaseTicket>& tickets, std::array<std::vector<int>, kNumExpertTargets>& y,
                  std::vector<std::string>* ids) {
    for (const auto& t : tickets) {
      auto it = labels.find(t.base_id);
      if (it == labels.end() || !it->second.has_all_expert()) {
        throw DataError("ticket '" + t.base_id + "' lacks expert labels needed by the simulation oracle");
      }
      for (std::size_t k = 0; k < kNumExpertTargets; ++k) y[k].push_back(label_index(it->second, k));
      if (ids) ids->push_back(t.base_id);
    }
  };
  fill(pool, d.pool_y, &d.pool_ids);
  fill(test, d.test_y, nullptr);
  return d;
}

}  // namespace triage
