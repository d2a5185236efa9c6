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

// Command-line front end for the batch pipeline and the HTTP service. Every
// subcommand prints one JSON document on stdout and a short summary on
// stderr.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "triage/errors.hpp"
#include "triage/pipeline.hpp"
#include "triage/service.hpp"
#include "triage/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace triage;

namespace {

// Exit codes.
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is not set");
  if (!fs::is_regular_file(path)) throw DataError(what + " '" + path + "' does not exist");
}

void require_dir(const std::string& path, const std::string& what) {
  if (!fs::is_directory(path)) throw DataError(what + " '" + path + "' is not a directory");
}

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void write_json_file(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void emit(const json& result, const std::string& summary) {
  std::cout << result.dump(2) << std::endl;
  std::cerr << summary << std::endl;
}

PipelineConfig load_config(const std::string& path) {
  require_file(path, "config");
  auto c = PipelineConfig::load(path);
  require_file(c.schema_path, "schema");
  require_file(c.corpus_path, "corpus");
  return c;
}

std::vector<Target> parse_targets(const std::vector<std::string>& names) {
  std::vector<Target> out;
  if (names.empty()) return {kAllTargets.begin(), kAllTargets.end()};
  for (const auto& n : names) out.push_back(target_from_string(n));
  return out;
}

Execution parse_exec(bool serial) { return serial ? Execution::serial : Execution::parallel; }

// Tickets of one side of the every-10th split whose expert labels are all
// known.
std::vector<BaseTicket> fully_labeled(const Corpus& corpus, const std::vector<std::string>& ids,
                                      const ExpertLabels& labels) {
  std::vector<BaseTicket> out;
  for (const auto& id : ids) {
    auto it = labels.find(id);
    if (it != labels.end() && it->second.has_all_expert()) out.push_back(corpus.at(id));
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_synth(const std::string& out_dir, const SynthOptions& o) {
  const auto synth = generate_synthetic(o);
  write_synthetic(synth, out_dir);
  std::size_t events = 0;
  for (const auto& t : synth.corpus.tickets()) events += t.events.size();
  emit({{"out", out_dir},
        {"tickets", synth.corpus.size()},
        {"events", events},
        {"seed", o.seed},
        {"outlier_ids", synth.outlier_ids}},
       "wrote " + std::to_string(synth.corpus.size()) + " synthetic tickets to " + out_dir);
  return 0;
}

int cmd_ingest(const std::string& schema_path, const std::string& in, const std::string& out,
               const std::string& rejects, bool strict) {
  require_file(schema_path, "schema");
  require_file(in, "corpus");
  const Schema schema = load_schema(schema_path);
  auto result = ingest_corpus_file(in, schema);
  if (!out.empty()) {
    auto os = open_out(out);
    write_corpus(os, result.corpus);
  }
  json rej = json::array();
  for (const auto& r : result.rejected) rej.push_back({{"line", r.line}, {"base_id", r.base_id}, {"reason", r.reason}});
  if (!rejects.empty()) {
    auto os = open_out(rejects);
    for (const auto& r : rej) os << r.dump() << '\n';
  }
  emit({{"accepted", result.corpus.size()}, {"rejected", rej}},
       "accepted " + std::to_string(result.corpus.size()) + " tickets, rejected " +
           std::to_string(result.rejected.size()));
  if (strict && !result.rejected.empty()) throw SchemaError(std::to_string(result.rejected.size()) + " record(s) rejected");
  return 0;
}

int cmd_expand(const std::string& schema_path, const std::string& in, const std::string& out) {
  require_file(in, "corpus");
  Schema schema;
  if (schema_path.empty()) {
    std::ifstream is(in);
    schema = infer_schema(is);
  } else {
    require_file(schema_path, "schema");
    schema = load_schema(schema_path);
  }
  const Corpus corpus = load_corpus_strict(in, schema);
  const auto derived = expand_corpus(corpus);
  auto os = open_out(out);
  for (const auto& d : derived) write_derived(os, d);
  emit({{"base_tickets", corpus.size()}, {"derived_tickets", derived.size()}, {"out", out}},
       "expanded " + std::to_string(corpus.size()) + " base tickets into " + std::to_string(derived.size()) +
           " derived tickets");
  return 0;
}

int cmd_featurize(const std::string& config_path, const std::string& out) {
  const auto config = load_config(config_path);
  const Schema schema = load_schema(config.schema_path);
  const Corpus corpus = load_corpus_strict(config.corpus_path, schema);
  const auto data = featurize(corpus, schema, config.features);
  write_featurized(data, out);
  std::size_t n_test = 0;
  for (const auto& r : data.rows) n_test += r.test;
  emit({{"out", out},
        {"rows", data.rows.size()},
        {"train_rows", data.rows.size() - n_test},
        {"test_rows", n_test},
        {"train_tickets", data.train_ids.size()},
        {"test_tickets", data.test_ids.size()},
        {"features", data.spec.output_dim()},
        {"feature_spec_hash", data.spec.hash()}},
       "featurized " + std::to_string(data.rows.size()) + " derived tickets into " +
           std::to_string(data.spec.output_dim()) + " features");
  return 0;
}

int cmd_label_extract(const std::string& config_path, const std::string& data_dir) {
  const auto config = load_config(config_path);
  require_file(config.labels_path, "labels");
  require_dir(data_dir, "data directory");
  const Schema schema = load_schema(config.schema_path);
  const Corpus corpus = load_corpus_strict(config.corpus_path, schema);
  const ExpertLabels expert = attach_expert_labels_file(corpus, config.labels_path);
  const auto data = read_featurized(data_dir);
  const auto labels = extract_labels(corpus, expert, data);
  write_labels(labels, data, data_dir);
  json counts = json::object();
  for (Target t : kAllTargets) {
    std::size_t n = 0;
    for (const auto& l : labels.rows) n += l.get(t).has_value();
    counts[to_string(t)] = n;
  }
  emit({{"rows", labels.rows.size()}, {"labeled_rows", counts}, {"binning", labels.binning.to_json()}},
       "labeled " + std::to_string(labels.rows.size()) + " rows; fixing-time boundaries written to " + data_dir +
           "/binning.json");
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir, const std::string& out,
              const std::string& preset, const std::string& kind, const std::vector<std::string>& target_names,
              bool serial) {
  auto config = load_config(config_path);
  if (!preset.empty()) config.preset = preset;
  if (!kind.empty()) {
    config.preset.reset();
    config.model = default_params(model_kind_from_string(kind));
  }
  require_dir(data_dir, "data directory");
  const auto data = read_featurized(data_dir);
  const auto labels = read_labels(data_dir, data);
  const ModelParams base = config.resolved_model();
  fs::create_directories(out);
  std::ofstream(fs::path(out) / "feature_spec.json", std::ios::binary) << data.spec.to_json().dump() << '\n';
  std::ofstream(fs::path(out) / "schema.json", std::ios::binary) << load_schema(config.schema_path).to_json_text();
  const std::string hash = data.spec.hash();
  json models = json::object();
  std::string summary;
  for (Target t : parse_targets(target_names)) {
    const Dataset train = make_dataset(data, labels, t, false);
    if (train.size() == 0) {
      std::cerr << "warning: no labeled training rows for " << to_string(t) << "; skipped\n";
      continue;
    }
    ModelParams params = base;
    set_seed(params, mix_seed(config.seed, 200 + static_cast<std::uint64_t>(t)));
    const auto model = fit_classifier(train, params, parse_exec(serial));
    const std::string file = std::string(to_string(t)) + ".model";
    auto os = open_out((fs::path(out) / file).string());
    os << save_model(*model, {hash, to_string(t), class_names(t)});
    models[to_string(t)] = {{"kind", to_string(kind_of(params))},
                            {"params", params_to_json(params)},
                            {"train_rows", train.size()},
                            {"file", file}};
    summary += std::string(summary.empty() ? "" : ", ") + to_string(t);
  }
  if (models.empty()) throw DataError("no target had labeled training rows");
  json result = {{"out", out}, {"feature_spec_hash", hash}, {"models", models}};
  if (config.preset) result["preset"] = *config.preset;
  write_json_file((fs::path(out) / "train.json").string(), result);
  emit(result, "trained " + std::string(to_string(kind_of(base))) + " for " + summary);
  return 0;
}

int cmd_eval(const std::string& model_dir, const std::string& data_dir, const std::string& out,
             const std::string& csv, const std::string& model_id) {
  require_dir(model_dir, "model directory");
  require_dir(data_dir, "test data directory");
  const auto bundle = ModelBundle::load(model_dir);
  const auto data = read_featurized(data_dir);
  if (bundle.spec.hash() != data.spec.hash()) {
    throw ModelFormatError("models in '" + model_dir + "' were trained on feature spec " + bundle.spec.hash() +
                           " but the data uses " + data.spec.hash());
  }
  const auto labels = read_labels(data_dir, data);
  json targets = json::object();
  std::vector<ComparisonRow> rows;
  std::vector<EvalReport> reports;
  std::string summary;
  for (const auto& [target, model] : bundle.models) {
    const auto ev = evaluate_model(*model, data, labels, target, model_id);
    targets[to_string(target)] = {{"model", ev.report.to_json()}, {"baseline", ev.baseline.to_json()}};
    rows.push_back({to_string(target), model_id, ev.report.weighted_f1, ev.baseline.weighted_f1});
    reports.push_back(ev.report);
    std::ostringstream line;
    line << "  " << to_string(target) << ": weighted f1 " << ev.report.weighted_f1 << " (baseline "
         << ev.baseline.weighted_f1 << ")\n";
    summary += line.str();
  }
  const json report = {{"feature_spec_hash", data.spec.hash()},
                       {"model_id", model_id},
                       {"targets", targets},
                       {"comparison", comparison_to_json(rows)}};
  if (!out.empty()) write_json_file(out, report);
  if (!csv.empty()) {
    auto os = open_out(csv);
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].write_csv(os, i == 0);
  }
  emit(report, "evaluation on the held-out side:\n" + summary);
  return 0;
}

int cmd_tune(const std::string& config_path, const std::string& data_dir, const std::string& target_name,
             const std::string& kind_name, std::size_t budget, bool random, const std::string& out,
             bool serial) {
  const auto config = load_config(config_path);
  require_dir(data_dir, "data directory");
  const Target target = target_from_string(target_name);
  const ModelKind kind = model_kind_from_string(kind_name);
  const auto data = read_featurized(data_dir);
  const auto labels = read_labels(data_dir, data);
  const Dataset train = make_dataset(data, labels, target, false);
  if (train.size() == 0) throw DataError(std::string("no labeled training rows for ") + to_string(target));
  TpeConfig tpe = config.tpe;
  if (budget > 0) tpe.budget = budget;
  tpe.validate();
  const auto space = search_space_for(kind);
  const auto objective = cv_objective(kind, train, config.folds, config.seed, parse_exec(serial));
  const HpoResult result = random ? random_search(space, objective, tpe) : optimize_tpe(space, objective, tpe);
  auto os = open_out(out);
  write_trials_csv(os, result.trials);
  const Trial& best = result.best_trial();
  const json j = {{"target", to_string(target)},
                  {"kind", to_string(kind)},
                  {"search", random ? "random" : "tpe"},
                  {"trials", result.trials.size()},
                  {"best", {{"trial_id", best.id}, {"params", best.params}, {"mean_f1", best.objective}}},
                  {"out", out}};
  std::ostringstream s;
  s << "best of " << result.trials.size() << " trials: mean f1 " << best.objective << " with " << best.params.dump();
  emit(j, s.str());
  return 0;
}

int cmd_length(const std::string& config_path, const std::string& model_dir, const std::string& data_dir,
               std::size_t entries, const std::string& out) {
  const auto config = load_config(config_path);
  require_dir(model_dir, "model directory");
  require_dir(data_dir, "data directory");
  const Schema schema = load_schema(config.schema_path);
  const Corpus corpus = load_corpus_strict(config.corpus_path, schema);
  const ExpertLabels expert =
      config.labels_path.empty() ? ExpertLabels{} : attach_expert_labels_file(corpus, config.labels_path);
  const auto bundle = ModelBundle::load(model_dir);
  const auto labels = read_labels(data_dir, read_featurized(data_dir));
  std::vector<BaseTicket> test;
  for (const auto& id : split_holdout(corpus).test_base_ids) test.push_back(corpus.at(id));

  std::vector<LengthTarget> targets;
  for (const auto& [target, model] : bundle.models) {
    LengthTarget lt;
    lt.target = target;
    lt.num_classes = num_classes(target);
    const Classifier* m = model.get();
    lt.predict = [m, &bundle](const DerivedTicket& d) { return m->predict(bundle.spec.assemble(d).values); };
    if (target == Target::time_to_fix) {
      const FixingTimeBinning binning = labels.binning;
      lt.truth = [binning](const DerivedTicket& d, const BaseTicket& b) -> std::optional<int> {
        return binning.assign(fixing_time_days(d, b));
      };
    } else {
      lt.truth = [&expert, target](const DerivedTicket&, const BaseTicket& b) -> std::optional<int> {
        auto it = expert.find(b.base_id);
        return it == expert.end() ? std::nullopt : it->second.get(target);
      };
    }
    targets.push_back(std::move(lt));
  }
  const auto analysis = length_analysis(test, entries, targets);
  auto os = open_out(out);
  write_length_csv(os, analysis);
  json series = json::array();
  for (const auto& p : analysis.series) {
    series.push_back({{"entry_index", p.entry_index}, {"target", p.target}, {"f1", p.f1}, {"n", p.n}});
  }
  for (const auto& w : analysis.warnings) std::cerr << "warning: " << w << '\n';
  emit({{"entries", entries}, {"series", series}, {"warnings", analysis.warnings}, {"out", out}},
       "length analysis over held-out tickets with " + std::to_string(entries) + " entries: " +
           std::to_string(analysis.series.size()) + " points");
  return 0;
}

int cmd_al_init(const std::string& config_path, const std::string& out) {
  const auto config = load_config(config_path);
  if (fs::exists(fs::path(out) / "session.json")) throw ConflictError("a session already exists in '" + out + "'");
  ALSession session = create_session(config);
  session.save(out);
  const std::string id = fs::path(out).filename().string();
  const json d = session.descriptor(id);
  emit(d, "created session '" + id + "' with " + std::to_string(session.pool().size()) + " pool tickets, " +
              std::to_string(session.labeled_ids().size()) + " labeled");
  return 0;
}

int cmd_al_select(const std::string& config_path, const std::string& out, bool serial) {
  const auto config = load_config(config_path);
  require_file(config.labels_path, "labels");
  const Schema schema = load_schema(config.schema_path);
  const Corpus corpus = load_corpus_strict(config.corpus_path, schema);
  const ExpertLabels labels = attach_expert_labels_file(corpus, config.labels_path);
  const ALSession session = create_session(config);
  std::vector<std::string> ids;
  std::vector<DerivedTicket> full;
  std::array<std::vector<int>, kNumExpertTargets> y;
  for (const auto& id : sort_base_ids(session.labeled_ids())) {
    const LabelSet& l = session.labels().at(id);
    if (!l.has_all_expert()) continue;
    ids.push_back(id);
    full.push_back(full_history(*session.find_ticket(id)));
    for (std::size_t t = 0; t < kNumExpertTargets; ++t) y[t].push_back(*l.get(kExpertTargets[t]));
  }
  if (ids.size() < 2) throw DataError("model selection needs at least two fully labeled pool tickets");
  const Matrix X = session.feature_spec().assemble_batch(full);
  const auto report = select_al_model(X, y, ids, default_al_candidates(config.seed), parse_exec(serial));
  const json j = report.to_json();
  if (!out.empty()) write_json_file(out, j);
  emit(j, "leave-one-out selection on " + std::to_string(ids.size()) + " tickets chose " +
              to_string(report.chosen));
  return 0;
}

int cmd_al_simulate(const std::string& config_path, const std::string& out, const std::string& strategy,
                    const std::vector<std::uint64_t>& seeds, const std::string& proposals, bool serial) {
  const auto config = load_config(config_path);
  require_file(config.labels_path, "labels");
  const Schema schema = load_schema(config.schema_path);
  const Corpus corpus = load_corpus_strict(config.corpus_path, schema);
  const ExpertLabels labels = attach_expert_labels_file(corpus, config.labels_path);
  const auto split = split_holdout(corpus);
  const auto pool = fully_labeled(corpus, split.train_base_ids, labels);
  const auto test = fully_labeled(corpus, split.test_base_ids, labels);
  if (pool.empty() || test.empty()) throw DataError("simulation needs fully labeled tickets on both sides");
  const SimulationData data = make_simulation_data(pool, test, labels, schema, config.features);

  std::vector<Strategy> strategies;
  if (strategy == "both") {
    strategies = {Strategy::entropy, Strategy::random};
  } else {
    strategies = {strategy.empty() ? config.strategy : strategy_from_string(strategy)};
  }
  const std::vector<std::uint64_t> run_seeds = seeds.empty() ? std::vector<std::uint64_t>{config.seed} : seeds;
  std::vector<CurveRow> curve;
  json runs = json::array();
  std::ofstream plog;
  if (!proposals.empty()) plog = open_out(proposals);
  for (Strategy s : strategies) {
    for (std::uint64_t seed : run_seeds) {
      SimulationOptions o;
      o.strategy = s;
      o.initial_pool = config.initial_pool;
      o.steps = config.steps;
      o.seed = seed;
      o.model = config.resolved_model();
      const auto r = simulate(data, o, parse_exec(serial));
      curve.insert(curve.end(), r.curve.begin(), r.curve.end());
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& p : r.proposals) {
        if (plog) {
          plog << json{{"strategy", to_string(s)}, {"seed", seed}, {"base_id", p.base_id},
                       {"target", to_string(p.target)}, {"entropy", p.entropy}}
                      .dump()
               << '\n';
        }
      }
      runs.push_back({{"strategy", to_string(s)}, {"seed", seed}, {"acquisitions", r.proposals.size()},
                      {"warnings", r.warnings}});
    }
  }
  auto os = open_out(out);
  write_curve_csv(os, curve);
  emit({{"out", out}, {"pool", pool.size()}, {"test", test.size()}, {"runs", runs}, {"rows", curve.size()}},
       "simulated " + std::to_string(runs.size()) + " run(s); learning curve written to " + out);
  return 0;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& root, const std::string& models, const std::string& host, int port,
              const std::string& config_base) {
  ServiceOptions o;
  o.root_dir = root;
  if (!models.empty()) o.model_dir = models;
  o.config_base_dir = config_base;
  Service service(o);
  for (const auto& [id, why] : service.load_failures()) std::cerr << "warning: session " << id << ": " << why << '\n';
  HttpServer server(service);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const bool ok = server.listen(host, port, [&](int bound) {
    std::cout << json{{"host", host}, {"port", bound}, {"sessions", service.num_sessions()}}.dump() << std::endl;
    std::cerr << "serving " << service.num_sessions() << " session(s) on http://" << host << ':' << bound << std::endl;
  });
  g_server = nullptr;
  if (!ok) throw Error("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bug-triage toolkit: corpus preparation, classifiers, active learning and evaluation"};
  app.require_subcommand(1);
  int rc = 0;
  std::function<int()> action;

  std::string config, out, data, schema, in, model_dir;
  bool serial = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with schema and expert labels");
  SynthOptions synth_opts;
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("-n,--tickets", synth_opts.n_tickets, "Number of base tickets");
  synth->add_option("--seed", synth_opts.seed, "Random seed");
  synth->add_option("--max-events", synth_opts.max_events, "Maximum history length");
  synth->add_option("--label-noise", synth_opts.label_noise, "Probability of a uniformly redrawn expert label");
  synth->add_option("--outliers", synth_opts.outlier_fraction, "Fraction of uniform-noise tickets");
  synth->callback([&] { action = [&] { return cmd_synth(out, synth_opts); }; });

  auto* ingest = app.add_subcommand("ingest", "Validate a JSON-lines corpus against a schema");
  std::string rejects;
  bool strict = false;
  ingest->add_option("--schema", schema, "Schema JSON")->required();
  ingest->add_option("--in", in, "Input corpus (JSON lines)")->required();
  ingest->add_option("--out", out, "Write the accepted tickets here");
  ingest->add_option("--rejects", rejects, "Write rejected records here (JSON lines)");
  ingest->add_flag("--strict", strict, "Fail when any record is rejected");
  ingest->callback([&] { action = [&] { return cmd_ingest(schema, in, out, rejects, strict); }; });

  auto* expand = app.add_subcommand("expand", "Write every derived ticket of a corpus");
  expand->add_option("--schema", schema, "Schema JSON (inferred from the corpus when omitted)");
  expand->add_option("--in", in, "Input corpus (JSON lines)")->required();
  expand->add_option("--out", out, "Output derived tickets (JSON lines)")->required();
  expand->callback([&] { action = [&] { return cmd_expand(schema, in, out); }; });

  auto* feat = app.add_subcommand("featurize", "Split, fit the feature spec and write feature rows");
  feat->add_option("--config", config, "Pipeline config")->required();
  feat->add_option("--out", out, "Data directory")->required();
  feat->callback([&] { action = [&] { return cmd_featurize(config, out); }; });

  auto* lab = app.add_subcommand("label-extract", "Attach expert labels and fixing-time classes to feature rows");
  lab->add_option("--config", config, "Pipeline config")->required();
  lab->add_option("--data", data, "Data directory written by featurize")->required();
  lab->callback([&] { action = [&] { return cmd_label_extract(config, data); }; });

  auto* train = app.add_subcommand("train", "Train one classifier per target on the training side");
  std::string preset, kind;
  std::vector<std::string> target_names;
  train->add_option("--config", config, "Pipeline config")->required();
  train->add_option("--data", data, "Data directory with features and labels")->required();
  train->add_option("--out", out, "Model directory")->required();
  train->add_option("--preset", preset, "Named parameter preset, e.g. paper-rf-debug");
  train->add_option("--model", kind, "Classifier kind with default parameters (nb, rf, svm, mlp, gbt)");
  train->add_option("--target", target_names, "Restrict to these targets");
  train->add_flag("--serial", serial, "Use the serial kernels");
  train->callback([&] {
    action = [&] { return cmd_train(config, data, out, preset, kind, target_names, serial); };
  });

  auto* ev = app.add_subcommand("eval", "Weighted f1 per target on the held-out side with a random baseline");
  std::string csv, model_id = "model";
  ev->add_option("--model", model_dir, "Model directory written by train")->required();
  ev->add_option("--test", data, "Data directory with features and labels")->required();
  ev->add_option("--out", out, "Report JSON");
  ev->add_option("--csv", csv, "Per-class report CSV");
  ev->add_option("--model-id", model_id, "Identifier recorded in the report");
  ev->callback([&] { action = [&] { return cmd_eval(model_dir, data, out, csv, model_id); }; });

  auto* tune = app.add_subcommand("tune", "Hyper-parameter search with group k-fold cross-validation");
  std::string tune_target = "time_to_fix", tune_kind = "rf";
  std::size_t budget = 0;
  bool random = false;
  tune->add_option("--config", config, "Pipeline config")->required();
  tune->add_option("--data", data, "Data directory with features and labels")->required();
  tune->add_option("--target", tune_target, "Target to tune");
  tune->add_option("--model", tune_kind, "rf, mlp or gbt");
  tune->add_option("--budget", budget, "Number of trials (overrides the config)");
  tune->add_flag("--random", random, "Random search instead of TPE");
  tune->add_option("--out", out, "Trials CSV")->required();
  tune->add_flag("--serial", serial, "Use the serial kernels");
  tune->callback([&] {
    action = [&] { return cmd_tune(config, data, tune_target, tune_kind, budget, random, out, serial); };
  });

  auto* len = app.add_subcommand("length-analysis", "f1 per history prefix on held-out tickets of one length");
  std::size_t entries = 10;
  len->add_option("--config", config, "Pipeline config")->required();
  len->add_option("--model", model_dir, "Model directory written by train")->required();
  len->add_option("--data", data, "Data directory with the fitted fixing-time binning")->required();
  len->add_option("--entries", entries, "History length to analyse");
  len->add_option("--out", out, "Output CSV")->required();
  len->callback([&] { action = [&] { return cmd_length(config, model_dir, data, entries, out); }; });

  auto* al_init = app.add_subcommand("al-init", "Create an active-learning session directory");
  al_init->add_option("--config", config, "Pipeline config")->required();
  al_init->add_option("--out", out, "Session directory")->required();
  al_init->callback([&] { action = [&] { return cmd_al_init(config, out); }; });

  auto* al_select = app.add_subcommand("al-select", "Leave-one-out model choice on the initial labeled pool");
  al_select->add_option("--config", config, "Pipeline config")->required();
  al_select->add_option("--out", out, "Report JSON");
  al_select->add_flag("--serial", serial, "Use the serial kernels");
  al_select->callback([&] { action = [&] { return cmd_al_select(config, out, serial); }; });

  auto* al_sim = app.add_subcommand("al-simulate", "Replay acquisition with an oracle and write learning curves");
  std::string strategy;
  std::vector<std::uint64_t> seeds;
  std::string proposals;
  al_sim->add_option("--config", config, "Pipeline config")->required();
  al_sim->add_option("--out", out, "Curve CSV")->required();
  al_sim->add_option("--strategy", strategy, "entropy, random or both (default: config)");
  al_sim->add_option("--seeds", seeds, "Seeds to run (default: config seed)")->delimiter(',');
  al_sim->add_option("--proposals", proposals, "Write the acquisition log here (JSON lines)");
  al_sim->add_flag("--serial", serial, "Use the serial kernels");
  al_sim->callback([&] {
    action = [&] { return cmd_al_simulate(config, out, strategy, seeds, proposals, serial); };
  });

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string root, host = "127.0.0.1", config_base;
  int port = 8080;
  serve->add_option("--root", root, "Session root directory")->required();
  serve->add_option("--models", model_dir, "Model directory used by /predict without a session");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--config-dir", config_base, "Base directory for relative paths in session configs");
  serve->callback([&] { action = [&] { return cmd_serve(root, model_dir, host, port, config_base); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    rc = action();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const ModelFormatError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitModel;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitError;
  }
  return rc;
}
