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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "triage/corpus.hpp"
#include "triage/embeddings.hpp"
#include "triage/matrix.hpp"
#include "triage/parallel.hpp"
#include "triage/tfidf.hpp"
#include "triage/word2vec.hpp"

namespace triage {

// ---------------------------------------------------------------------------
// Field pruning

struct PruneReport {
  std::vector<std::string> kept;
  // Dropped field with its missing fraction.
  std::vector<std::pair<std::string, double>> dropped;
};

// Drops fields whose missing fraction is strictly above max_nan_fraction,
// unless listed in force_keep. Throws DataError on an empty ticket set or
// when nothing survives.
PruneReport prune_fields(const std::vector<BaseTicket>& tickets, const Schema& schema,
                         double max_nan_fraction = 0.9,
                         const std::vector<std::string>& force_keep = {});

// ---------------------------------------------------------------------------
// Categorical encoding

// Fields with at least this many distinct training values need an expert
// mapping table to a reduced set of groups.
inline constexpr std::size_t kMaxOneHotClasses = 10;

using CategoryMapping = std::map<std::string, std::string>;  // class -> group

class CategoricalEncoder {
 public:
  CategoricalEncoder() = default;

  // Levels are the sorted distinct training values, or the sorted distinct
  // groups of `mapping` when one is given. Throws SchemaError naming the
  // field when it has >= kMaxOneHotClasses values and no mapping.
  static CategoricalEncoder fit(const std::string& field, const std::vector<std::string>& values,
                                const CategoryMapping* mapping = nullptr);

  const std::string& field() const { return field_; }
  const std::vector<std::string>& levels() const { return levels_; }
  const std::optional<CategoryMapping>& mapping() const { return mapping_; }
  // One slot per level plus a trailing "unseen" slot.
  std::size_t width() const { return levels_.size() + 1; }

  // Writes the one-hot block. nullopt (missing value) leaves it all zero;
  // values not seen in training set the unseen slot.
  void encode(const std::optional<std::string>& value, std::span<double> out) const;
  std::vector<double> encode(const std::optional<std::string>& value) const;

  nlohmann::json to_json() const;
  static CategoricalEncoder from_json(const nlohmann::json& j);
  bool operator==(const CategoricalEncoder& o) const {
    return field_ == o.field_ && levels_ == o.levels_ && mapping_ == o.mapping_;
  }

 private:
  std::string field_;
  std::vector<std::string> levels_;
  std::optional<CategoryMapping> mapping_;
};

// ---------------------------------------------------------------------------
// Per-ticket helpers

struct TemporalStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  bool operator==(const TemporalStats&) const = default;
};

// Inter-event gaps (seconds) within the observed prefix; (0, 0, 0) for a
// single event.
TemporalStats temporal_stats(const DerivedTicket& ticket);

// Static field values as of the observation time: a field changed by an
// event in the prefix takes the last new value, otherwise the static value.
std::map<std::string, FieldValue> effective_fields(const DerivedTicket& ticket, const Schema& schema);

// Text fields followed by the prefix's discussion entries, newline-joined.
std::string ticket_text(const DerivedTicket& ticket, const std::vector<std::string>& text_fields);

// ---------------------------------------------------------------------------
// Feature spec

enum class TextMode { none, tfidf, word2vec, external_embedding };

const char* to_string(TextMode mode);
TextMode text_mode_from_string(const std::string& s);

struct FeatureOptions {
  double max_nan_fraction = 0.9;
  std::vector<std::string> force_keep;
  std::map<std::string, CategoryMapping> categorical_mappings;
  TextMode text_mode = TextMode::none;
  std::size_t tfidf_top_k = 200;
  Word2VecParams word2vec;
  // Source of the external store; recorded so a serialized spec can reload it.
  std::string external_embedding_path;
};

// Declarative form used in config files. Missing keys keep their defaults;
// unknown keys raise ConfigError.
nlohmann::json feature_options_to_json(const FeatureOptions& options);
FeatureOptions feature_options_from_json(const nlohmann::json& j);

struct FeatureVector {
  std::vector<double> values;
  std::shared_ptr<const std::vector<std::string>> feature_names;
};

// Fitted transformation DerivedTicket -> FeatureVector. Blocks are laid out
// as numerical, temporal, categorical, text. Immutable once fitted.
class FeatureSpec {
 public:
  static constexpr int kFormatVersion = 1;

  FeatureSpec() = default;

  // Fits on training tickets only. Text models are fitted on one document
  // per base ticket (its longest prefix in `train`).
  static FeatureSpec fit(const std::vector<DerivedTicket>& train, const Schema& schema,
                         const FeatureOptions& options,
                         std::shared_ptr<const ExternalEmbeddingStore> store = nullptr);

  FeatureVector assemble(const DerivedTicket& ticket) const;
  Matrix assemble_batch(const std::vector<DerivedTicket>& tickets,
                        Execution exec = Execution::parallel) const;

  std::size_t output_dim() const { return names_ ? names_->size() : 0; }
  const std::vector<std::string>& feature_names() const { return *names_; }
  TextMode text_mode() const { return text_mode_; }
  const PruneReport& prune_report() const { return prune_report_; }
  const std::vector<std::string>& numerical_fields() const { return numerical_fields_; }
  const std::vector<std::string>& date_fields() const { return date_fields_; }
  const std::vector<CategoricalEncoder>& categorical() const { return categorical_; }
  const std::vector<std::string>& text_fields() const { return text_fields_; }
  const std::optional<TfidfModel>& tfidf() const { return tfidf_; }
  const std::optional<WordEmbeddingModel>& word2vec() const { return word2vec_; }

  nlohmann::json to_json() const;
  // `store` overrides the recorded embedding path for external_embedding mode.
  static FeatureSpec from_json(const nlohmann::json& j,
                               std::shared_ptr<const ExternalEmbeddingStore> store = nullptr);
  // FNV-1a of the canonical JSON, 16 hex digits. Stored in model blobs.
  std::string hash() const;

 private:
  void build_names();
  void fill(const DerivedTicket& ticket, std::span<double> out) const;

  Schema schema_;
  TextMode text_mode_ = TextMode::none;
  PruneReport prune_report_;
  std::vector<std::string> numerical_fields_;
  std::vector<std::string> date_fields_;
  std::vector<CategoricalEncoder> categorical_;
  std::vector<std::string> text_fields_;
  std::optional<TfidfModel> tfidf_;
  std::optional<WordEmbeddingModel> word2vec_;
  std::string embedding_path_;
  std::size_t embedding_dim_ = 0;
  std::shared_ptr<const ExternalEmbeddingStore> store_;
  std::shared_ptr<const std::vector<std::string>> names_;
};

inline constexpr std::size_t kTemporalBlockWidth = 6;

std::string fnv1a_hex(const std::string& bytes);

}  // namespace triage
