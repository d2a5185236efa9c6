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

#include "triage/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "triage/errors.hpp"

namespace triage {

using nlohmann::json;

const char* to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::categorical: return "categorical";
    case FieldKind::numerical: return "numerical";
    case FieldKind::text: return "text";
    case FieldKind::date: return "date";
  }
  return "?";
}

FieldKind field_kind_from_string(const std::string& name) {
  if (name == "categorical") return FieldKind::categorical;
  if (name == "numerical") return FieldKind::numerical;
  if (name == "text") return FieldKind::text;
  if (name == "date") return FieldKind::date;
  throw SchemaError("unknown field kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Schema

Schema Schema::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
  }
  // Accept both {"fields": {...}} and a bare {name: kind} object.
  const json& fields = doc.contains("fields") ? doc.at("fields") : doc;
  if (!fields.is_object()) throw SchemaError("schema fields must be an object");
  std::map<std::string, FieldKind> out;
  for (auto it = fields.begin(); it != fields.end(); ++it) {
    if (!it.value().is_string()) throw SchemaError("schema kind for '" + it.key() + "' must be a string");
    out.emplace(it.key(), field_kind_from_string(it.value().get<std::string>()));
  }
  return Schema(std::move(out));
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string Schema::to_json_text() const {
  json fields = json::object();
  for (const auto& [name, kind] : fields_) fields[name] = to_string(kind);
  return json{{"fields", fields}}.dump(2);
}

std::optional<FieldKind> Schema::kind_of(const std::string& name) const {
  auto it = fields_.find(name);
  if (it == fields_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<BaseTicket> tickets) : tickets_(std::move(tickets)) {
  index_.reserve(tickets_.size());
  for (std::size_t i = 0; i < tickets_.size(); ++i) {
    if (!index_.emplace(tickets_[i].base_id, i).second) {
      throw DataError("duplicate base id '" + tickets_[i].base_id + "'");
    }
  }
}

const BaseTicket* Corpus::find(const std::string& base_id) const {
  auto it = index_.find(base_id);
  return it == index_.end() ? nullptr : &tickets_[it->second];
}

const BaseTicket& Corpus::at(const std::string& base_id) const {
  const BaseTicket* t = find(base_id);
  if (t == nullptr) throw DataError("unknown base id '" + base_id + "'");
  return *t;
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(tickets_.size());
  for (const auto& t : tickets_) out.push_back(t.base_id);
  return out;
}

// ---------------------------------------------------------------------------
// Interchange format

namespace {

struct RecordError {
  std::string reason;
};

std::string scalar_to_string(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::optional<double> parse_double(const std::string& s) {
  double out = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return out;
}

FieldValue parse_static_value(const std::string& name, FieldKind kind, const json& v) {
  if (v.is_null()) return Missing{};
  switch (kind) {
    case FieldKind::categorical:
      return Categorical{scalar_to_string(v)};
    case FieldKind::text:
      if (!v.is_string()) throw RecordError{"field '" + name + "': expected string"};
      return Text{v.get<std::string>()};
    case FieldKind::numerical: {
      if (v.is_number()) {
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw RecordError{"field '" + name + "': non-finite number"};
        return Numerical{d};
      }
      if (v.is_string()) {
        if (auto d = parse_double(v.get<std::string>()); d && std::isfinite(*d)) return Numerical{*d};
      }
      throw RecordError{"field '" + name + "': expected number"};
    }
    case FieldKind::date: {
      if (!v.is_string()) throw RecordError{"field '" + name + "': expected ISO-8601 date"};
      auto t = parse_iso8601(v.get<std::string>());
      if (!t) throw RecordError{"field '" + name + "': unparseable timestamp '" + v.get<std::string>() + "'"};
      return Date{*t};
    }
  }
  return Missing{};
}

json static_value_to_json(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Missing>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, Date>) {
          return format_iso8601(x.value);
        } else {
          return x.value;
        }
      },
      v);
}

Instant parse_time_field(const json& v, const char* what) {
  if (!v.is_string()) throw RecordError{std::string("unparseable timestamp in ") + what};
  auto t = parse_iso8601(v.get<std::string>());
  if (!t) {
    throw RecordError{std::string("unparseable timestamp in ") + what + ": '" +
                      v.get<std::string>() + "'"};
  }
  return *t;
}

std::map<std::string, FieldValue> parse_static_fields(const json& record, const Schema& schema) {
  std::map<std::string, FieldValue> out;
  for (const auto& [name, kind] : schema.fields()) out.emplace(name, Missing{});
  if (!record.contains("static")) return out;
  const json& st = record.at("static");
  if (!st.is_object()) throw RecordError{"'static' must be an object"};
  for (auto it = st.begin(); it != st.end(); ++it) {
    auto kind = schema.kind_of(it.key());
    if (!kind) throw RecordError{"unknown static field '" + it.key() + "'"};
    out[it.key()] = parse_static_value(it.key(), *kind, it.value());
  }
  return out;
}

std::vector<TicketEvent> parse_events(const json& events) {
  if (!events.is_array()) throw RecordError{"'events' must be an array"};
  std::vector<TicketEvent> out;
  out.reserve(events.size());
  for (const json& e : events) {
    if (!e.is_object()) throw RecordError{"event must be an object"};
    TicketEvent ev;
    if (!e.contains("t")) throw RecordError{"event without timestamp 't'"};
    ev.timestamp = parse_time_field(e.at("t"), "event");
    if (e.contains("changes") && !e.at("changes").is_null()) {
      const json& ch = e.at("changes");
      if (!ch.is_object()) throw RecordError{"event 'changes' must be an object"};
      for (auto it = ch.begin(); it != ch.end(); ++it) {
        const json& c = it.value();
        FieldChange fc;
        if (c.is_array() && c.size() == 2) {
          fc = {scalar_to_string(c[0]), scalar_to_string(c[1])};
        } else if (c.is_object()) {
          fc = {scalar_to_string(c.value("old", json())), scalar_to_string(c.value("new", json()))};
        } else {
          fc = {"", scalar_to_string(c)};
        }
        ev.field_changes.emplace(it.key(), std::move(fc));
      }
    }
    if (e.contains("text") && !e.at("text").is_null()) {
      if (!e.at("text").is_string()) throw RecordError{"event 'text' must be a string"};
      ev.discussion_text = e.at("text").get<std::string>();
    }
    if (e.contains("attachments") && !e.at("attachments").is_null()) {
      std::vector<std::string> att;
      for (const json& a : e.at("attachments")) att.push_back(scalar_to_string(a));
      ev.attachments_meta = std::move(att);
    }
    out.push_back(std::move(ev));
  }
  return out;
}

json events_to_json(const std::vector<TicketEvent>& events) {
  json arr = json::array();
  for (const auto& ev : events) {
    json e;
    e["t"] = format_iso8601(ev.timestamp);
    json ch = json::object();
    for (const auto& [name, c] : ev.field_changes) ch[name] = json::array({c.old_value, c.new_value});
    e["changes"] = std::move(ch);
    if (ev.discussion_text) e["text"] = *ev.discussion_text;
    if (ev.attachments_meta) e["attachments"] = *ev.attachments_meta;
    arr.push_back(std::move(e));
  }
  return arr;
}

json static_to_json(const std::map<std::string, FieldValue>& fields) {
  json st = json::object();
  for (const auto& [name, v] : fields) st[name] = static_value_to_json(v);
  return st;
}

BaseTicket parse_record(const json& record, const Schema& schema) {
  BaseTicket t;
  const json& id = record.at("id");
  if (id.is_string()) {
    t.base_id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    t.base_id = id.dump();
  } else {
    throw RecordError{"'id' must be a string or integer"};
  }
  if (t.base_id.empty()) throw RecordError{"empty id"};
  t.static_fields = parse_static_fields(record, schema);
  if (!record.contains("events")) throw RecordError{"missing 'events'"};
  t.events = parse_events(record.at("events"));
  if (t.events.empty()) throw RecordError{"no events"};
  for (std::size_t i = 1; i < t.events.size(); ++i) {
    if (t.events[i].timestamp < t.events[i - 1].timestamp) throw RecordError{"non-monotonic events"};
  }
  if (!record.contains("closed_at")) throw RecordError{"missing 'closed_at'"};
  t.closed_at = parse_time_field(record.at("closed_at"), "closed_at");
  if (t.closed_at < t.events.back().timestamp) throw RecordError{"closed_at precedes last event"};
  return t;
}

}  // namespace

std::vector<FieldIssue> validate_ticket_json(const json& record, const Schema& schema, bool require_closed) {
  std::vector<FieldIssue> issues;
  if (!record.is_object()) {
    issues.push_back({"", "ticket must be a JSON object"});
    return issues;
  }
  if (!record.contains("id")) {
    if (require_closed) issues.push_back({"id", "required"});
  } else {
    const json& id = record.at("id");
    if (!(id.is_string() || id.is_number_integer())) {
      issues.push_back({"id", "must be a string or integer"});
    } else if (id.is_string() && id.get<std::string>().empty()) {
      issues.push_back({"id", "must not be empty"});
    }
  }
  if (record.contains("static")) {
    const json& st = record.at("static");
    if (!st.is_object()) {
      issues.push_back({"static", "must be an object"});
    } else {
      for (auto it = st.begin(); it != st.end(); ++it) {
        const std::string path = "static." + it.key();
        auto kind = schema.kind_of(it.key());
        if (!kind) {
          issues.push_back({path, "unknown field"});
          continue;
        }
        try {
          parse_static_value(it.key(), *kind, it.value());
        } catch (const RecordError& e) {
          issues.push_back({path, e.reason});
        }
      }
    }
  }
  std::optional<Instant> last;
  if (!record.contains("events")) {
    issues.push_back({"events", "required"});
  } else if (!record.at("events").is_array()) {
    issues.push_back({"events", "must be an array"});
  } else if (record.at("events").empty()) {
    issues.push_back({"events", "no events"});
  } else {
    const json& events = record.at("events");
    for (std::size_t i = 0; i < events.size(); ++i) {
      const std::string base = "events[" + std::to_string(i) + "]";
      const json& e = events[i];
      if (!e.is_object()) {
        issues.push_back({base, "must be an object"});
        continue;
      }
      if (!e.contains("t")) {
        issues.push_back({base + ".t", "required"});
      } else {
        try {
          const Instant t = parse_time_field(e.at("t"), "event");
          if (last && t < *last) issues.push_back({base + ".t", "earlier than the previous event"});
          last = t;
        } catch (const RecordError& err) {
          issues.push_back({base + ".t", err.reason});
        }
      }
      if (e.contains("changes") && !e.at("changes").is_null() && !e.at("changes").is_object()) {
        issues.push_back({base + ".changes", "must be an object"});
      }
      if (e.contains("text") && !e.at("text").is_null() && !e.at("text").is_string()) {
        issues.push_back({base + ".text", "must be a string"});
      }
      if (e.contains("attachments") && !e.at("attachments").is_null() && !e.at("attachments").is_array()) {
        issues.push_back({base + ".attachments", "must be an array"});
      }
    }
  }
  if (!record.contains("closed_at") || record.at("closed_at").is_null()) {
    if (require_closed) issues.push_back({"closed_at", "required"});
  } else {
    try {
      const Instant c = parse_time_field(record.at("closed_at"), "closed_at");
      if (last && c < *last) issues.push_back({"closed_at", "precedes last event"});
    } catch (const RecordError& err) {
      issues.push_back({"closed_at", err.reason});
    }
  }
  return issues;
}

std::string format_issues(const std::vector<FieldIssue>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += "; ";
    out += (i.path.empty() ? std::string("<ticket>") : i.path) + ": " + i.message;
  }
  return out;
}

BaseTicket ticket_from_json(const json& record, const Schema& schema) {
  if (auto issues = validate_ticket_json(record, schema, true); !issues.empty()) {
    throw SchemaError(format_issues(issues));
  }
  return parse_record(record, schema);
}

DerivedTicket open_ticket_from_json(const json& record, const Schema& schema) {
  if (auto issues = validate_ticket_json(record, schema, false); !issues.empty()) {
    throw SchemaError(format_issues(issues));
  }
  BaseTicket t;
  t.base_id = record.contains("id") ? scalar_to_string(record.at("id")) : std::string("query");
  t.static_fields = parse_static_fields(record, schema);
  t.events = parse_events(record.at("events"));
  t.closed_at = t.events.back().timestamp;
  return full_history(t);
}

json ticket_to_json(const BaseTicket& t) {
  json j;
  j["id"] = t.base_id;
  j["static"] = static_to_json(t.static_fields);
  j["events"] = events_to_json(t.events);
  j["closed_at"] = format_iso8601(t.closed_at);
  return j;
}

IngestResult ingest_corpus(std::istream& source, const Schema& schema) {
  std::vector<BaseTicket> tickets;
  std::vector<Rejection> rejected;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception&) {
      rejected.push_back({line_no, "", "malformed JSON"});
      continue;
    }
    if (!record.is_object() || !record.contains("id")) {
      rejected.push_back({line_no, "", "record without 'id'"});
      continue;
    }
    const std::string raw_id = scalar_to_string(record.at("id"));
    try {
      BaseTicket t = parse_record(record, schema);
      if (auto it = seen.find(t.base_id); it != seen.end()) {
        throw DataError("duplicate base id '" + t.base_id + "' (lines " +
                        std::to_string(it->second) + " and " + std::to_string(line_no) + ")");
      }
      seen.emplace(t.base_id, line_no);
      tickets.push_back(std::move(t));
    } catch (const RecordError& e) {
      rejected.push_back({line_no, raw_id, e.reason});
    } catch (const json::exception& e) {
      rejected.push_back({line_no, raw_id, std::string("malformed record: ") + e.what()});
    }
  }
  return {Corpus(std::move(tickets)), std::move(rejected)};
}

IngestResult ingest_corpus_file(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return ingest_corpus(in, schema);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& t : corpus.tickets()) out << ticket_to_json(t).dump() << '\n';
}

Schema infer_schema(std::istream& source) {
  std::map<std::string, FieldKind> fields;
  std::string line;
  while (std::getline(source, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("static")) continue;
    const json& st = record.at("static");
    if (!st.is_object()) continue;
    for (auto it = st.begin(); it != st.end(); ++it) {
      if (it.value().is_null()) {
        fields.emplace(it.key(), FieldKind::categorical);
        continue;
      }
      const FieldKind k = it.value().is_number() ? FieldKind::numerical : FieldKind::categorical;
      auto [pos, inserted] = fields.emplace(it.key(), k);
      if (!inserted && pos->second != k) pos->second = FieldKind::categorical;
    }
  }
  return Schema(std::move(fields));
}

// ---------------------------------------------------------------------------
// Expansion

std::vector<DerivedTicket> expand_ticket(const BaseTicket& base) {
  std::vector<DerivedTicket> out;
  out.reserve(base.events.size());
  for (std::size_t k = 1; k <= base.events.size(); ++k) {
    DerivedTicket d;
    d.base_id = base.base_id;
    d.prefix_len = k;
    d.events.assign(base.events.begin(), base.events.begin() + static_cast<std::ptrdiff_t>(k));
    d.static_fields = base.static_fields;
    d.observation_time = base.events[k - 1].timestamp;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DerivedTicket> expand_corpus(const Corpus& corpus) {
  std::vector<DerivedTicket> out;
  for (const auto& t : corpus.tickets()) {
    auto d = expand_ticket(t);
    std::move(d.begin(), d.end(), std::back_inserter(out));
  }
  return out;
}

DerivedTicket full_history(const BaseTicket& base) {
  DerivedTicket d;
  d.base_id = base.base_id;
  d.prefix_len = base.events.size();
  d.events = base.events;
  d.static_fields = base.static_fields;
  d.observation_time = base.events.empty() ? base.closed_at : base.events.back().timestamp;
  return d;
}

void write_derived(std::ostream& out, const DerivedTicket& ticket) {
  json j;
  j["base_id"] = ticket.base_id;
  j["prefix_len"] = ticket.prefix_len;
  j["observation_time"] = format_iso8601(ticket.observation_time);
  j["static"] = static_to_json(ticket.static_fields);
  j["events"] = events_to_json(ticket.events);
  out << j.dump() << '\n';
}

DerivedTicket read_derived(const std::string& json_line, const Schema& schema) {
  try {
    const json j = json::parse(json_line);
    DerivedTicket d;
    d.base_id = j.at("base_id").get<std::string>();
    d.prefix_len = j.at("prefix_len").get<std::size_t>();
    d.static_fields = parse_static_fields(j, schema);
    d.events = parse_events(j.at("events"));
    if (d.events.size() != d.prefix_len) throw RecordError{"prefix_len does not match events"};
    d.observation_time = d.events.back().timestamp;
    return d;
  } catch (const RecordError& e) {
    throw SchemaError("derived ticket: " + e.reason);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("derived ticket: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Splitting

bool all_numeric_ids(const std::vector<std::string>& ids) {
  return std::all_of(ids.begin(), ids.end(), [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  });
}

bool base_id_less(const std::string& a, const std::string& b, bool numeric) {
  if (numeric) {
    // Compare digit strings by value without overflow: strip leading zeros,
    // then shorter is smaller.
    auto strip = [](const std::string& s) {
      const auto p = s.find_first_not_of('0');
      return p == std::string::npos ? std::string_view() : std::string_view(s).substr(p);
    };
    const auto sa = strip(a);
    const auto sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
    return a < b;
  }
  return a < b;
}

std::vector<std::string> sort_base_ids(std::vector<std::string> ids) {
  const bool numeric = all_numeric_ids(ids);
  std::sort(ids.begin(), ids.end(),
            [numeric](const std::string& a, const std::string& b) { return base_id_less(a, b, numeric); });
  return ids;
}

SplitAssignment split_holdout(const std::vector<std::string>& base_ids) {
  SplitAssignment split;
  const auto sorted = sort_base_ids(base_ids);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    ((i + 1) % 10 == 0 ? split.test_base_ids : split.train_base_ids).push_back(sorted[i]);
  }
  if (sorted.size() < 10) {
    split.warnings.push_back("corpus has " + std::to_string(sorted.size()) +
                             " base tickets (< 10); test set is empty");
  }
  return split;
}

SplitAssignment split_holdout(const Corpus& corpus) { return split_holdout(corpus.ids()); }

std::vector<std::vector<std::string>> group_kfold(const std::vector<std::string>& base_ids,
                                                  std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("group_kfold: k must be >= 2");
  if (k > base_ids.size()) {
    throw std::invalid_argument("group_kfold: k=" + std::to_string(k) + " exceeds " +
                                std::to_string(base_ids.size()) + " base ids");
  }
  // Shuffle from a canonical order so the result does not depend on the
  // caller's ordering of the id list.
  auto ids = sort_base_ids(base_ids);
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(ids[i - 1], ids[j]);
  }
  std::vector<std::vector<std::string>> folds(k);
  const std::size_t base = ids.size() / k;
  const std::size_t extra = ids.size() % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                    ids.begin() + static_cast<std::ptrdiff_t>(pos + len));
    folds[f] = sort_base_ids(std::move(folds[f]));
    pos += len;
  }
  return folds;
}

}  // namespace triage
