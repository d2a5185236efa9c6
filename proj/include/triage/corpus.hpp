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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "triage/timeutil.hpp"

namespace triage {

enum class FieldKind { categorical, numerical, text, date };

const char* to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);

struct Missing {
  bool operator==(const Missing&) const = default;
};
struct Categorical {
  std::string value;
  bool operator==(const Categorical&) const = default;
};
struct Numerical {
  double value = 0.0;
  bool operator==(const Numerical&) const = default;
};
struct Text {
  std::string value;
  bool operator==(const Text&) const = default;
};
struct Date {
  Instant value = 0;
  bool operator==(const Date&) const = default;
};

using FieldValue = std::variant<Missing, Categorical, Numerical, Text, Date>;

inline bool is_missing(const FieldValue& v) { return std::holds_alternative<Missing>(v); }

// Field-type declaration for the static fields of a ticket. Ordered so that
// every downstream block (pruning, feature assembly) iterates the same way.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::map<std::string, FieldKind> fields) : fields_(std::move(fields)) {}

  static Schema from_json_text(const std::string& text);
  static Schema load(const std::string& path);
  std::string to_json_text() const;

  const std::map<std::string, FieldKind>& fields() const { return fields_; }
  std::optional<FieldKind> kind_of(const std::string& name) const;
  bool operator==(const Schema&) const = default;

 private:
  std::map<std::string, FieldKind> fields_;
};

struct FieldChange {
  std::string old_value;
  std::string new_value;
  bool operator==(const FieldChange&) const = default;
};

struct TicketEvent {
  Instant timestamp = 0;
  std::map<std::string, FieldChange> field_changes;
  std::optional<std::string> discussion_text;
  std::optional<std::vector<std::string>> attachments_meta;
  bool operator==(const TicketEvent&) const = default;
};

struct BaseTicket {
  std::string base_id;
  std::map<std::string, FieldValue> static_fields;
  std::vector<TicketEvent> events;
  Instant closed_at = 0;
  bool operator==(const BaseTicket&) const = default;
};

struct DerivedTicket {
  std::string base_id;
  std::size_t prefix_len = 0;
  std::vector<TicketEvent> events;
  std::map<std::string, FieldValue> static_fields;
  Instant observation_time = 0;
  bool operator==(const DerivedTicket&) const = default;
};

// Immutable collection of base tickets with unique ids, kept in ingestion
// order.
class Corpus {
 public:
  Corpus() = default;
  // Throws DataError on a duplicate base id.
  explicit Corpus(std::vector<BaseTicket> tickets);

  const std::vector<BaseTicket>& tickets() const { return tickets_; }
  std::size_t size() const { return tickets_.size(); }
  bool empty() const { return tickets_.empty(); }
  const BaseTicket* find(const std::string& base_id) const;
  const BaseTicket& at(const std::string& base_id) const;
  std::vector<std::string> ids() const;

  bool operator==(const Corpus& other) const { return tickets_ == other.tickets_; }

 private:
  std::vector<BaseTicket> tickets_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Rejection {
  std::size_t line = 0;  // 1-based line in the source stream
  std::string base_id;   // empty when the id itself could not be read
  std::string reason;
};

struct IngestResult {
  Corpus corpus;
  std::vector<Rejection> rejected;
};

// Reads the JSON-lines ticket interchange format. Records violating the
// schema are collected into `rejected`; a duplicate base id aborts with
// DataError.
IngestResult ingest_corpus(std::istream& source, const Schema& schema);
IngestResult ingest_corpus_file(const std::string& path, const Schema& schema);

struct FieldIssue {
  std::string path;  // e.g. "static.priority" or "events[2].t"; empty for the record itself
  std::string message;
};

// Every problem found in one ticket record, in document order. With
// require_closed false the record describes an open ticket: "closed_at" and
// "id" become optional.
std::vector<FieldIssue> validate_ticket_json(const nlohmann::json& record, const Schema& schema,
                                             bool require_closed = true);
std::string format_issues(const std::vector<FieldIssue>& issues);

// Throws SchemaError listing the issues when the record is invalid.
BaseTicket ticket_from_json(const nlohmann::json& record, const Schema& schema);
// Open ticket observed after its last event, as used for prediction.
DerivedTicket open_ticket_from_json(const nlohmann::json& record, const Schema& schema);
nlohmann::json ticket_to_json(const BaseTicket& ticket);

// Writes one JSON object per line in the interchange format. Ingesting the
// output with the same schema reproduces an equal corpus.
void write_corpus(std::ostream& out, const Corpus& corpus);

// Derives a schema from values found in the records: JSON numbers become
// numerical, strings categorical. Used when no schema file is supplied.
Schema infer_schema(std::istream& source);

// Prefix expansion: the i-th derived ticket holds the first i events.
std::vector<DerivedTicket> expand_ticket(const BaseTicket& base);
std::vector<DerivedTicket> expand_corpus(const Corpus& corpus);

// The derived ticket holding the whole history.
DerivedTicket full_history(const BaseTicket& base);

void write_derived(std::ostream& out, const DerivedTicket& ticket);
DerivedTicket read_derived(const std::string& json_line, const Schema& schema);

// Numeric ordering when every id is an unsigned integer, else lexicographic.
std::vector<std::string> sort_base_ids(std::vector<std::string> ids);
// Comparator consistent with sort_base_ids for the given id population.
bool base_id_less(const std::string& a, const std::string& b, bool numeric);
bool all_numeric_ids(const std::vector<std::string>& ids);

struct SplitAssignment {
  std::vector<std::string> train_base_ids;
  std::vector<std::string> test_base_ids;
  std::vector<std::vector<std::string>> cv_folds;
  std::vector<std::string> warnings;
};

// Every 10th base id (1-indexed, in sorted order) goes to the test side.
SplitAssignment split_holdout(const Corpus& corpus);
SplitAssignment split_holdout(const std::vector<std::string>& base_ids);

// Shuffles by seed and deals ids into k folds whose sizes differ by at most
// one. Throws std::invalid_argument when k < 2 or k > number of ids.
std::vector<std::vector<std::string>> group_kfold(const std::vector<std::string>& base_ids,
                                                  std::size_t k, std::uint64_t seed);

}  // namespace triage
