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

#include "triage/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <unordered_map>

#include "triage/errors.hpp"
#include "triage/text.hpp"

namespace triage {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Pruning

PruneReport prune_fields(const std::vector<BaseTicket>& tickets, const Schema& schema,
                         double max_nan_fraction, const std::vector<std::string>& force_keep) {
  if (tickets.empty()) throw DataError("prune_fields: empty ticket set");
  const std::set<std::string> forced(force_keep.begin(), force_keep.end());
  PruneReport report;
  for (const auto& [name, kind] : schema.fields()) {
    std::size_t missing = 0;
    for (const auto& t : tickets) {
      auto it = t.static_fields.find(name);
      if (it == t.static_fields.end() || is_missing(it->second)) ++missing;
    }
    const double frac = static_cast<double>(missing) / static_cast<double>(tickets.size());
    if (frac > max_nan_fraction && forced.count(name) == 0) {
      report.dropped.emplace_back(name, frac);
    } else {
      report.kept.push_back(name);
    }
  }
  if (report.kept.empty()) throw DataError("prune_fields: every field was dropped");
  return report;
}

// ---------------------------------------------------------------------------
// Categorical encoding

CategoricalEncoder CategoricalEncoder::fit(const std::string& field,
                                           const std::vector<std::string>& values,
                                           const CategoryMapping* mapping) {
  CategoricalEncoder enc;
  enc.field_ = field;
  if (mapping != nullptr) {
    std::set<std::string> groups;
    for (const auto& [cls, group] : *mapping) groups.insert(group);
    enc.levels_.assign(groups.begin(), groups.end());
    enc.mapping_ = *mapping;
    return enc;
  }
  std::set<std::string> distinct(values.begin(), values.end());
  if (distinct.size() >= kMaxOneHotClasses) {
    throw SchemaError("categorical field '" + field + "' has " + std::to_string(distinct.size()) +
                      " classes and needs an expert mapping table");
  }
  enc.levels_.assign(distinct.begin(), distinct.end());
  return enc;
}

void CategoricalEncoder::encode(const std::optional<std::string>& value, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (!value) return;
  const std::string* key = &*value;
  if (mapping_) {
    auto m = mapping_->find(*value);
    if (m == mapping_->end()) {
      out[levels_.size()] = 1.0;
      return;
    }
    key = &m->second;
  }
  auto it = std::lower_bound(levels_.begin(), levels_.end(), *key);
  if (it != levels_.end() && *it == *key) {
    out[static_cast<std::size_t>(it - levels_.begin())] = 1.0;
  } else {
    out[levels_.size()] = 1.0;
  }
}

std::vector<double> CategoricalEncoder::encode(const std::optional<std::string>& value) const {
  std::vector<double> out(width(), 0.0);
  encode(value, out);
  return out;
}

json CategoricalEncoder::to_json() const {
  json j{{"field", field_}, {"levels", levels_}};
  j["mapping"] = mapping_ ? json(*mapping_) : json(nullptr);
  return j;
}

CategoricalEncoder CategoricalEncoder::from_json(const json& j) {
  CategoricalEncoder enc;
  enc.field_ = j.at("field").get<std::string>();
  enc.levels_ = j.at("levels").get<std::vector<std::string>>();
  if (!j.at("mapping").is_null()) enc.mapping_ = j.at("mapping").get<CategoryMapping>();
  return enc;
}

// ---------------------------------------------------------------------------
// Per-ticket helpers

TemporalStats temporal_stats(const DerivedTicket& ticket) {
  if (ticket.events.size() < 2) return {};
  TemporalStats s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 1; i < ticket.events.size(); ++i) {
    const double gap = static_cast<double>(ticket.events[i].timestamp - ticket.events[i - 1].timestamp);
    s.min = std::min(s.min, gap);
    s.max = std::max(s.max, gap);
    sum += gap;
  }
  s.mean = sum / static_cast<double>(ticket.events.size() - 1);
  return s;
}

namespace {

std::optional<double> to_double(const std::string& s) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(out)) return std::nullopt;
  return out;
}

}  // namespace

std::map<std::string, FieldValue> effective_fields(const DerivedTicket& ticket, const Schema& schema) {
  std::map<std::string, FieldValue> out = ticket.static_fields;
  for (const auto& ev : ticket.events) {
    for (const auto& [name, change] : ev.field_changes) {
      auto kind = schema.kind_of(name);
      if (!kind) continue;
      if (change.new_value.empty()) {
        out[name] = Missing{};
        continue;
      }
      switch (*kind) {
        case FieldKind::categorical:
          out[name] = Categorical{change.new_value};
          break;
        case FieldKind::text:
          out[name] = Text{change.new_value};
          break;
        case FieldKind::numerical:
          if (auto d = to_double(change.new_value)) out[name] = Numerical{*d};
          break;
        case FieldKind::date:
          if (auto t = parse_iso8601(change.new_value)) out[name] = Date{*t};
          break;
      }
    }
  }
  return out;
}

std::string ticket_text(const DerivedTicket& ticket, const std::vector<std::string>& text_fields) {
  std::string out;
  auto append = [&out](const std::string& s) {
    if (s.empty()) return;
    if (!out.empty()) out.push_back('\n');
    out += s;
  };
  for (const auto& f : text_fields) {
    auto it = ticket.static_fields.find(f);
    if (it != ticket.static_fields.end()) {
      if (const auto* t = std::get_if<Text>(&it->second)) append(t->value);
    }
  }
  for (const auto& ev : ticket.events) {
    if (ev.discussion_text) append(*ev.discussion_text);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature spec

const char* to_string(TextMode mode) {
  switch (mode) {
    case TextMode::none: return "none";
    case TextMode::tfidf: return "tfidf";
    case TextMode::word2vec: return "word2vec";
    case TextMode::external_embedding: return "external_embedding";
  }
  return "?";
}

TextMode text_mode_from_string(const std::string& s) {
  if (s == "none") return TextMode::none;
  if (s == "tfidf") return TextMode::tfidf;
  if (s == "word2vec") return TextMode::word2vec;
  if (s == "external_embedding" || s == "external") return TextMode::external_embedding;
  throw ConfigError("unknown text mode '" + s + "'");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FeatureSpec FeatureSpec::fit(const std::vector<DerivedTicket>& train, const Schema& schema,
                             const FeatureOptions& options,
                             std::shared_ptr<const ExternalEmbeddingStore> store) {
  if (train.empty()) throw DataError("FeatureSpec::fit: no training tickets");
  FeatureSpec spec;
  spec.schema_ = schema;
  spec.text_mode_ = options.text_mode;

  // One representative per base ticket: the longest prefix.
  std::unordered_map<std::string, std::size_t> longest;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto [it, inserted] = longest.emplace(train[i].base_id, i);
    if (inserted) {
      order.push_back(train[i].base_id);
    } else if (train[i].prefix_len > train[it->second].prefix_len) {
      it->second = i;
    }
  }
  std::vector<BaseTicket> bases;
  bases.reserve(order.size());
  for (const auto& id : order) {
    const auto& d = train[longest[id]];
    bases.push_back(BaseTicket{d.base_id, d.static_fields, d.events, d.observation_time});
  }

  spec.prune_report_ = prune_fields(bases, schema, options.max_nan_fraction, options.force_keep);
  for (const auto& name : spec.prune_report_.kept) {
    switch (*schema.kind_of(name)) {
      case FieldKind::numerical: spec.numerical_fields_.push_back(name); break;
      case FieldKind::date: spec.date_fields_.push_back(name); break;
      case FieldKind::text: spec.text_fields_.push_back(name); break;
      case FieldKind::categorical: {
        // Vocabulary over every value the field takes in training, including
        // values introduced by field changes.
        std::vector<std::string> values;
        for (const auto& d : train) {
          const auto eff = effective_fields(d, schema);
          if (const auto* c = std::get_if<Categorical>(&eff.at(name))) values.push_back(c->value);
        }
        auto m = options.categorical_mappings.find(name);
        spec.categorical_.push_back(CategoricalEncoder::fit(
            name, values, m == options.categorical_mappings.end() ? nullptr : &m->second));
        break;
      }
    }
  }

  auto docs = [&]() {
    std::vector<TokenList> out;
    for (const auto& id : order) out.push_back(clean_for_bow(ticket_text(train[longest[id]], spec.text_fields_)));
    return out;
  };
  switch (options.text_mode) {
    case TextMode::none: break;
    case TextMode::tfidf: spec.tfidf_ = tfidf_fit(docs(), options.tfidf_top_k); break;
    case TextMode::word2vec: spec.word2vec_ = word2vec_train(docs(), options.word2vec); break;
    case TextMode::external_embedding:
      if (!store) {
        if (options.external_embedding_path.empty()) {
          throw ConfigError("external_embedding text mode needs an embedding file");
        }
        store = std::make_shared<const ExternalEmbeddingStore>(
            ExternalEmbeddingStore::load_file(options.external_embedding_path));
      }
      spec.store_ = std::move(store);
      spec.embedding_path_ = options.external_embedding_path;
      spec.embedding_dim_ = spec.store_->dim();
      break;
  }
  spec.build_names();
  return spec;
}

void FeatureSpec::build_names() {
  auto names = std::make_shared<std::vector<std::string>>();
  for (const auto& f : numerical_fields_) {
    names->push_back("num:" + f);
    names->push_back("num:" + f + ":missing");
  }
  for (const auto& f : date_fields_) {
    names->push_back("date:" + f + ":age_s");
    names->push_back("date:" + f + ":missing");
  }
  for (const char* n : {"time:gap_min", "time:gap_max", "time:gap_mean", "time:n_events",
                        "time:n_changes", "time:age_s"}) {
    names->push_back(n);
  }
  for (const auto& enc : categorical_) {
    for (const auto& level : enc.levels()) names->push_back("cat:" + enc.field() + "=" + level);
    names->push_back("cat:" + enc.field() + "=<unseen>");
  }
  switch (text_mode_) {
    case TextMode::none: break;
    case TextMode::tfidf:
      for (const auto& t : tfidf_->vocabulary()) names->push_back("tfidf:" + t);
      break;
    case TextMode::word2vec:
      for (std::size_t i = 0; i < word2vec_->dim(); ++i) names->push_back("w2v:" + std::to_string(i));
      break;
    case TextMode::external_embedding:
      for (std::size_t i = 0; i < embedding_dim_; ++i) names->push_back("emb:" + std::to_string(i));
      break;
  }
  names_ = std::move(names);
}

void FeatureSpec::fill(const DerivedTicket& ticket, std::span<double> out) const {
  std::size_t pos = 0;
  const auto eff = effective_fields(ticket, schema_);
  auto get = [&eff](const std::string& f) -> const FieldValue* {
    auto it = eff.find(f);
    return it == eff.end() ? nullptr : &it->second;
  };
  for (const auto& f : numerical_fields_) {
    const auto* v = get(f);
    const auto* num = v ? std::get_if<Numerical>(v) : nullptr;
    out[pos++] = num ? num->value : 0.0;
    out[pos++] = num ? 0.0 : 1.0;
  }
  for (const auto& f : date_fields_) {
    const auto* v = get(f);
    const auto* date = v ? std::get_if<Date>(v) : nullptr;
    out[pos++] = date ? static_cast<double>(ticket.observation_time - date->value) : 0.0;
    out[pos++] = date ? 0.0 : 1.0;
  }
  const TemporalStats ts = temporal_stats(ticket);
  std::size_t changes = 0;
  for (const auto& ev : ticket.events) changes += ev.field_changes.size();
  out[pos++] = ts.min;
  out[pos++] = ts.max;
  out[pos++] = ts.mean;
  out[pos++] = static_cast<double>(ticket.events.size());
  out[pos++] = static_cast<double>(changes);
  out[pos++] = ticket.events.empty()
                   ? 0.0
                   : static_cast<double>(ticket.observation_time - ticket.events.front().timestamp);
  for (const auto& enc : categorical_) {
    const auto* v = get(enc.field());
    const auto* cat = v ? std::get_if<Categorical>(v) : nullptr;
    enc.encode(cat ? std::optional<std::string>(cat->value) : std::nullopt,
               out.subspan(pos, enc.width()));
    pos += enc.width();
  }
  switch (text_mode_) {
    case TextMode::none: break;
    case TextMode::tfidf: {
      const auto block = tfidf_transform(*tfidf_, clean_for_bow(ticket_text(ticket, text_fields_)));
      std::copy(block.begin(), block.end(), out.begin() + static_cast<std::ptrdiff_t>(pos));
      pos += block.size();
      break;
    }
    case TextMode::word2vec: {
      const auto block = embed_average(*word2vec_, clean_for_bow(ticket_text(ticket, text_fields_)));
      std::copy(block.begin(), block.end(), out.begin() + static_cast<std::ptrdiff_t>(pos));
      pos += block.size();
      break;
    }
    case TextMode::external_embedding: {
      if (!store_) throw ConfigError("external embedding store not loaded");
      const auto& block = store_->lookup(embedding_key(ticket.base_id, ticket.prefix_len));
      std::copy(block.begin(), block.end(), out.begin() + static_cast<std::ptrdiff_t>(pos));
      pos += block.size();
      break;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      throw DataError("non-finite feature '" + (*names_)[i] + "' for ticket " + ticket.base_id + ":" +
                      std::to_string(ticket.prefix_len));
    }
  }
}

FeatureVector FeatureSpec::assemble(const DerivedTicket& ticket) const {
  FeatureVector fv;
  fv.values.assign(output_dim(), 0.0);
  fv.feature_names = names_;
  fill(ticket, fv.values);
  return fv;
}

Matrix FeatureSpec::assemble_batch(const std::vector<DerivedTicket>& tickets, Execution exec) const {
  Matrix out(tickets.size(), output_dim());
  const auto n = static_cast<std::ptrdiff_t>(tickets.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fill(tickets[i], out.row(i));
    return out;
  }
  // Exceptions must not escape an OpenMP region; capture the first one.
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fill(tickets[i], out.row(i));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

json FeatureSpec::to_json() const {
  json cats = json::array();
  for (const auto& c : categorical_) cats.push_back(c.to_json());
  json dropped = json::array();
  for (const auto& [name, frac] : prune_report_.dropped) dropped.push_back({{"field", name}, {"missing_fraction", frac}});
  json schema = json::object();
  for (const auto& [name, kind] : schema_.fields()) schema[name] = to_string(kind);
  json j{{"format", "feature_spec"},
         {"format_version", kFormatVersion},
         {"schema", schema},
         {"text_mode", to_string(text_mode_)},
         {"kept_fields", prune_report_.kept},
         {"dropped_fields", dropped},
         {"numerical_fields", numerical_fields_},
         {"date_fields", date_fields_},
         {"categorical", cats},
         {"text_fields", text_fields_},
         {"output_dim", output_dim()}};
  j["tfidf"] = tfidf_ ? tfidf_->to_json() : json(nullptr);
  j["word2vec"] = word2vec_ ? word2vec_->to_json() : json(nullptr);
  j["embedding"] = text_mode_ == TextMode::external_embedding
                       ? json{{"path", embedding_path_}, {"dim", embedding_dim_}}
                       : json(nullptr);
  return j;
}

FeatureSpec FeatureSpec::from_json(const json& j, std::shared_ptr<const ExternalEmbeddingStore> store) {
  try {
    if (j.at("format").get<std::string>() != "feature_spec") throw ModelFormatError("not a feature spec");
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ModelFormatError("unsupported feature_spec format_version");
    }
    FeatureSpec spec;
    std::map<std::string, FieldKind> fields;
    for (auto it = j.at("schema").begin(); it != j.at("schema").end(); ++it) {
      fields.emplace(it.key(), field_kind_from_string(it.value().get<std::string>()));
    }
    spec.schema_ = Schema(std::move(fields));
    spec.text_mode_ = text_mode_from_string(j.at("text_mode").get<std::string>());
    spec.prune_report_.kept = j.at("kept_fields").get<std::vector<std::string>>();
    for (const auto& d : j.at("dropped_fields")) {
      spec.prune_report_.dropped.emplace_back(d.at("field").get<std::string>(),
                                              d.at("missing_fraction").get<double>());
    }
    spec.numerical_fields_ = j.at("numerical_fields").get<std::vector<std::string>>();
    spec.date_fields_ = j.at("date_fields").get<std::vector<std::string>>();
    for (const auto& c : j.at("categorical")) spec.categorical_.push_back(CategoricalEncoder::from_json(c));
    spec.text_fields_ = j.at("text_fields").get<std::vector<std::string>>();
    if (!j.at("tfidf").is_null()) spec.tfidf_ = TfidfModel::from_json(j.at("tfidf"));
    if (!j.at("word2vec").is_null()) spec.word2vec_ = WordEmbeddingModel::from_json(j.at("word2vec"));
    if (!j.at("embedding").is_null()) {
      spec.embedding_path_ = j.at("embedding").at("path").get<std::string>();
      spec.embedding_dim_ = j.at("embedding").at("dim").get<std::size_t>();
      if (!store && !spec.embedding_path_.empty()) {
        store = std::make_shared<const ExternalEmbeddingStore>(
            ExternalEmbeddingStore::load_file(spec.embedding_path_));
      }
      if (store && store->dim() != spec.embedding_dim_) {
        throw ModelFormatError("embedding store width does not match feature spec");
      }
      spec.store_ = std::move(store);
    }
    spec.build_names();
    if (spec.output_dim() != j.at("output_dim").get<std::size_t>()) {
      throw ModelFormatError("feature spec output_dim mismatch");
    }
    return spec;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("feature spec: ") + e.what());
  }
}

std::string FeatureSpec::hash() const { return fnv1a_hex(to_json().dump()); }

nlohmann::json feature_options_to_json(const FeatureOptions& o) {
  nlohmann::json mappings = nlohmann::json::object();
  for (const auto& [field, m] : o.categorical_mappings) mappings[field] = m;
  return {{"max_nan_fraction", o.max_nan_fraction},
          {"force_keep", o.force_keep},
          {"categorical_mappings", mappings},
          {"text_mode", to_string(o.text_mode)},
          {"tfidf_top_k", o.tfidf_top_k},
          {"word2vec",
           {{"variant", to_string(o.word2vec.variant)},
            {"dim", o.word2vec.dim},
            {"window", o.word2vec.window},
            {"negative", o.word2vec.negative},
            {"epochs", o.word2vec.epochs},
            {"seed", o.word2vec.seed},
            {"learning_rate", o.word2vec.learning_rate}}},
          {"external_embedding_path", o.external_embedding_path}};
}

FeatureOptions feature_options_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("feature options must be a JSON object");
  static const std::set<std::string> kKeys = {"max_nan_fraction", "force_keep",  "categorical_mappings",
                                              "text_mode",        "tfidf_top_k", "word2vec",
                                              "external_embedding_path"};
  for (const auto& [key, v] : j.items()) {
    if (!kKeys.count(key)) throw ConfigError("unknown feature option '" + key + "'");
  }
  FeatureOptions o;
  try {
    o.max_nan_fraction = j.value("max_nan_fraction", o.max_nan_fraction);
    o.force_keep = j.value("force_keep", o.force_keep);
    if (j.contains("categorical_mappings")) {
      for (const auto& [field, m] : j.at("categorical_mappings").items()) {
        o.categorical_mappings[field] = m.get<CategoryMapping>();
      }
    }
    if (j.contains("text_mode")) o.text_mode = text_mode_from_string(j.at("text_mode").get<std::string>());
    o.tfidf_top_k = j.value("tfidf_top_k", o.tfidf_top_k);
    if (j.contains("word2vec")) {
      const auto& w = j.at("word2vec");
      if (w.contains("variant")) o.word2vec.variant = word2vec_variant_from_string(w.at("variant").get<std::string>());
      o.word2vec.dim = w.value("dim", o.word2vec.dim);
      o.word2vec.window = w.value("window", o.word2vec.window);
      o.word2vec.negative = w.value("negative", o.word2vec.negative);
      o.word2vec.epochs = w.value("epochs", o.word2vec.epochs);
      o.word2vec.seed = w.value("seed", o.word2vec.seed);
      o.word2vec.learning_rate = w.value("learning_rate", o.word2vec.learning_rate);
    }
    o.external_embedding_path = j.value("external_embedding_path", o.external_embedding_path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad feature options: ") + e.what());
  }
  if (!(o.max_nan_fraction >= 0.0 && o.max_nan_fraction <= 1.0)) {
    throw ConfigError("max_nan_fraction must lie in [0, 1]");
  }
  return o;
}

}  // namespace triage
