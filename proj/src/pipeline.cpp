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

#include "triage/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <fstream>
#include <set>
#include <sstream>

#include "triage/errors.hpp"
#include "triage/parallel.hpp"

namespace triage {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("short write to '" + path.string() + "'");
}

nlohmann::json opt_index(const std::optional<int>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kKeys = {"schema", "corpus",   "labels", "features", "model", "params",
                                              "preset", "seed",     "al",     "tpe",      "folds"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  PipelineConfig c;
  try {
    c.schema_path = resolve(base_dir, j.value("schema", std::string()));
    c.corpus_path = resolve(base_dir, j.value("corpus", std::string()));
    c.labels_path = resolve(base_dir, j.value("labels", std::string()));
    if (j.contains("features")) c.features = feature_options_from_json(j.at("features"));
    c.features.external_embedding_path = resolve(base_dir, c.features.external_embedding_path);
    const ModelKind kind = model_kind_from_string(j.value("model", std::string("random_forest")));
    c.model = params_from_json(kind, j.value("params", nlohmann::json::object()));
    if (j.contains("preset")) c.preset = j.at("preset").get<std::string>();
    c.seed = j.value("seed", std::uint64_t{0});
    c.folds = j.value("folds", std::size_t{5});
    if (j.contains("al")) {
      const auto& a = j.at("al");
      c.strategy = strategy_from_string(a.value("strategy", std::string("entropy")));
      c.initial_pool = a.value("initial_pool", c.initial_pool);
      c.steps = a.value("steps", c.steps);
      c.retrain_every = a.value("retrain_every", c.retrain_every);
    }
    if (j.contains("tpe")) {
      const auto& t = j.at("tpe");
      c.tpe.n_startup_trials = t.value("n_startup_trials", c.tpe.n_startup_trials);
      c.tpe.gamma = t.value("gamma", c.tpe.gamma);
      c.tpe.n_candidates = t.value("n_candidates", c.tpe.n_candidates);
      c.tpe.budget = t.value("budget", c.tpe.budget);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  c.tpe.seed = c.seed;
  if (c.preset) preset_by_name(*c.preset);  // validate early
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file '" + path + "' does not exist");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j, fs::path(path).parent_path().string());
}

ModelParams PipelineConfig::resolved_model() const {
  ModelParams p = preset ? preset_by_name(*preset) : model;
  set_seed(p, seed);
  return p;
}

Schema load_schema(const std::string& path) { return Schema::load(path); }

Corpus load_corpus_strict(const std::string& path, const Schema& schema) {
  auto result = ingest_corpus_file(path, schema);
  if (!result.rejected.empty()) {
    const auto& r = result.rejected.front();
    throw SchemaError("corpus '" + path + "': " + std::to_string(result.rejected.size()) +
                      " invalid record(s); first at line " + std::to_string(r.line) + ": " + r.reason);
  }
  return std::move(result.corpus);
}

FeaturizedData featurize(const Corpus& corpus, const Schema& schema, const FeatureOptions& options) {
  const auto split = split_holdout(corpus);
  FeaturizedData d;
  d.train_ids = split.train_base_ids;
  d.test_ids = split.test_base_ids;
  std::vector<DerivedTicket> train, all;
  for (const auto& id : d.train_ids) {
    auto ex = expand_ticket(corpus.at(id));
    for (auto& t : ex) {
      d.rows.push_back({t.base_id, t.prefix_len, false});
      train.push_back(t);
      all.push_back(std::move(t));
    }
  }
  for (const auto& id : d.test_ids) {
    for (auto& t : expand_ticket(corpus.at(id))) {
      d.rows.push_back({t.base_id, t.prefix_len, true});
      all.push_back(std::move(t));
    }
  }
  d.spec = FeatureSpec::fit(train, schema, options);
  d.X = d.spec.assemble_batch(all);
  return d;
}

void write_featurized(const FeaturizedData& d, const std::string& dir) {
  fs::create_directories(dir);
  write_text(fs::path(dir) / "feature_spec.json", d.spec.to_json().dump() + "\n");
  write_text(fs::path(dir) / "split.json",
             nlohmann::json{{"train", d.train_ids}, {"test", d.test_ids}}.dump() + "\n");
  std::ostringstream rows;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const auto x = d.X.row(i);
    rows << nlohmann::json{{"base_id", d.rows[i].base_id},
                           {"prefix_len", d.rows[i].prefix_len},
                           {"side", d.rows[i].test ? "test" : "train"},
                           {"x", std::vector<double>(x.begin(), x.end())}}
                .dump()
         << '\n';
  }
  write_text(fs::path(dir) / "features.jsonl", rows.str());
}

FeaturizedData read_featurized(const std::string& dir) {
  FeaturizedData d;
  try {
    d.spec = FeatureSpec::from_json(nlohmann::json::parse(slurp((fs::path(dir) / "feature_spec.json").string())));
    const auto split = nlohmann::json::parse(slurp((fs::path(dir) / "split.json").string()));
    d.train_ids = split.at("train").get<std::vector<std::string>>();
    d.test_ids = split.at("test").get<std::vector<std::string>>();
    std::istringstream in(slurp((fs::path(dir) / "features.jsonl").string()));
    std::string line;
    d.X = Matrix(0, d.spec.output_dim());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      d.rows.push_back({j.at("base_id").get<std::string>(), j.at("prefix_len").get<std::size_t>(),
                        j.at("side").get<std::string>() == "test"});
      const auto x = j.at("x").get<std::vector<double>>();
      if (x.size() != d.spec.output_dim()) throw DataError("feature row width does not match the feature spec");
      d.X.append_row(x);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed featurized data in '" + dir + "': " + e.what());
  }
  return d;
}

LabelTable extract_labels(const Corpus& corpus, const ExpertLabels& expert, const FeaturizedData& d) {
  std::vector<double> train_days;
  std::vector<DerivedTicket> derived;
  derived.reserve(d.rows.size());
  std::map<std::string, std::vector<DerivedTicket>> cache;
  for (const auto& r : d.rows) {
    auto it = cache.find(r.base_id);
    if (it == cache.end()) it = cache.emplace(r.base_id, expand_ticket(corpus.at(r.base_id))).first;
    if (r.prefix_len == 0 || r.prefix_len > it->second.size()) {
      throw DataError("featurized row " + r.base_id + ":" + std::to_string(r.prefix_len) + " not in corpus");
    }
    derived.push_back(it->second[r.prefix_len - 1]);
    if (!r.test) train_days.push_back(fixing_time_days(derived.back(), corpus.at(r.base_id)));
  }
  LabelTable out;
  out.binning = fit_binning(train_days);
  out.rows = label_derived(derived, corpus, expert, out.binning);
  return out;
}

void write_labels(const LabelTable& labels, const FeaturizedData& d, const std::string& dir) {
  fs::create_directories(dir);
  write_text(fs::path(dir) / "binning.json", labels.binning.to_json().dump() + "\n");
  std::ostringstream out;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const auto& l = labels.rows[i];
    nlohmann::json row = {{"base_id", d.rows[i].base_id}, {"prefix_len", d.rows[i].prefix_len}};
    for (Target t : kAllTargets) row[to_string(t)] = opt_index(l.get(t));
    out << row.dump() << '\n';
  }
  write_text(fs::path(dir) / "labels.jsonl", out.str());
}

LabelTable read_labels(const std::string& dir, const FeaturizedData& d) {
  LabelTable out;
  try {
    out.binning = FixingTimeBinning::from_json(nlohmann::json::parse(slurp((fs::path(dir) / "binning.json").string())));
    std::istringstream in(slurp((fs::path(dir) / "labels.jsonl").string()));
    std::string line;
    std::size_t i = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (i >= d.rows.size() || j.at("base_id").get<std::string>() != d.rows[i].base_id ||
          j.at("prefix_len").get<std::size_t>() != d.rows[i].prefix_len) {
        throw DataError("labels.jsonl is not aligned with features.jsonl at row " + std::to_string(i + 1));
      }
      LabelSet l;
      for (Target t : kAllTargets) {
        const auto& v = j.at(to_string(t));
        if (!v.is_null()) l.set(t, v.get<int>());
      }
      out.rows.push_back(l);
      ++i;
    }
    if (i != d.rows.size()) throw DataError("labels.jsonl has fewer rows than features.jsonl");
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed labels in '" + dir + "': " + e.what());
  }
  return out;
}

Dataset make_dataset(const FeaturizedData& d, const LabelTable& labels, Target target, bool test_side) {
  Dataset ds;
  ds.class_names = class_names(target);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (d.rows[i].test != test_side) continue;
    const auto y = labels.rows[i].get(target);
    if (!y) continue;
    rows.push_back(i);
    ds.y.push_back(*y);
    ds.group_ids.push_back(d.rows[i].base_id);
  }
  ds.X = d.X.select_rows(rows);
  if (rows.empty()) ds.X = Matrix(0, d.X.cols());
  return ds;
}

TargetEvaluation evaluate_model(const Classifier& model, const FeaturizedData& d, const LabelTable& labels,
                                Target target, const std::string& model_id) {
  const Dataset test = make_dataset(d, labels, target, true);
  const Dataset train = make_dataset(d, labels, target, false);
  if (test.size() == 0) throw DataError(std::string("no labeled test rows for target ") + to_string(target));
  if (model.num_features() != d.X.cols()) throw ModelFormatError("model width does not match the feature data");
  const auto pred = predict_batch(model, test.X);
  TargetEvaluation ev;
  ev.report = weighted_f1(test.y, pred, num_classes(target));
  ev.report.target = to_string(target);
  ev.report.model_id = model_id;
  ev.report.class_names = class_names(target);
  std::set<int> seen(train.y.begin(), train.y.end());
  if (seen.empty()) {
    for (std::size_t c = 0; c < num_classes(target); ++c) seen.insert(static_cast<int>(c));
  }
  ev.baseline = random_guesser_f1(test.y, num_classes(target), std::vector<int>(seen.begin(), seen.end()));
  ev.baseline.target = to_string(target);
  ev.baseline.class_names = class_names(target);
  return ev;
}

ALSession create_session(const PipelineConfig& config) {
  const Schema schema = load_schema(config.schema_path);
  const Corpus corpus = load_corpus_strict(config.corpus_path, schema);
  const ExpertLabels labels =
      config.labels_path.empty() ? ExpertLabels{} : attach_expert_labels_file(corpus, config.labels_path);
  const auto split = split_holdout(corpus);

  std::vector<BaseTicket> pool;
  std::vector<std::string> labeled;
  for (const auto& id : split.train_base_ids) {
    pool.push_back(corpus.at(id));
    if (labels.count(id)) labeled.push_back(id);
  }
  std::mt19937_64 rng(mix_seed(config.seed, 1));
  std::shuffle(labeled.begin(), labeled.end(), rng);
  labeled.resize(std::min(labeled.size(), config.initial_pool));
  ExpertLabels initial;
  for (const auto& id : labeled) initial[id] = labels.at(id);

  ALConfig al;
  al.model = config.resolved_model();
  al.features = config.features;
  al.seed = config.seed;
  al.retrain_every = config.retrain_every;
  ALSession session = ALSession::create(std::move(pool), schema, std::move(al), initial);

  std::vector<BaseTicket> eval;
  ExpertLabels eval_labels;
  for (const auto& id : split.test_base_ids) {
    auto it = labels.find(id);
    if (it == labels.end() || !it->second.has_all_expert()) continue;
    eval.push_back(corpus.at(id));
    eval_labels[id] = it->second;
  }
  if (!eval.empty()) session.set_evaluation_set(std::move(eval), std::move(eval_labels));
  return session;
}

}  // namespace triage
