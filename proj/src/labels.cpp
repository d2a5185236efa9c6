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

#include "triage/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

using nlohmann::json;

const char* to_string(Target t) {
  switch (t) {
    case Target::time_to_fix: return "time_to_fix";
    case Target::risk: return "risk";
    case Target::debug: return "debug";
    case Target::resolution: return "resolution";
  }
  return "?";
}

Target target_from_string(const std::string& s) {
  if (s == "time_to_fix" || s == "time-to-fix" || s == "fixing_time") return Target::time_to_fix;
  if (s == "risk") return Target::risk;
  if (s == "debug") return Target::debug;
  if (s == "resolution") return Target::resolution;
  throw ConfigError("unknown target '" + s + "'");
}

std::size_t num_classes(Target t) {
  switch (t) {
    case Target::time_to_fix: return 5;
    case Target::risk: return kNumRiskClasses;
    case Target::debug:
    case Target::resolution: return kComplexityMax - kComplexityMin + 1;
  }
  return 0;
}

std::vector<std::string> class_names(Target t) {
  std::vector<std::string> out;
  if (t == Target::risk) {
    for (std::size_t i = 0; i < kNumRiskClasses; ++i) out.emplace_back(to_string(static_cast<RiskLabel>(i)));
  } else {
    for (std::size_t i = 0; i < num_classes(t); ++i) out.push_back(std::to_string(i));
  }
  return out;
}

const char* to_string(RiskLabel r) {
  switch (r) {
    case RiskLabel::hardware_fix: return "hardware_fix";
    case RiskLabel::code_fix: return "code_fix";
    case RiskLabel::setup_fix: return "setup_fix";
    case RiskLabel::waiver: return "waiver";
    case RiskLabel::user_error: return "user_error";
    case RiskLabel::duplicate: return "duplicate";
  }
  return "?";
}

RiskLabel risk_from_string(const std::string& raw) {
  std::string s = raw;
  std::replace(s.begin(), s.end(), ' ', '_');
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  for (std::size_t i = 0; i < kNumRiskClasses; ++i) {
    if (s == to_string(static_cast<RiskLabel>(i))) return static_cast<RiskLabel>(i);
  }
  throw DataError("unknown risk label '" + raw + "'");
}

std::optional<int> LabelSet::get(Target t) const {
  switch (t) {
    case Target::time_to_fix: return fixing_time_class;
    case Target::risk: return risk ? std::optional<int>(static_cast<int>(*risk)) : std::nullopt;
    case Target::debug: return debug;
    case Target::resolution: return resolution;
  }
  return std::nullopt;
}

void LabelSet::set(Target t, int cls) {
  if (cls < 0 || static_cast<std::size_t>(cls) >= num_classes(t)) {
    throw DataError(std::string("label ") + std::to_string(cls) + " out of range for target " + to_string(t));
  }
  switch (t) {
    case Target::time_to_fix: fixing_time_class = cls; break;
    case Target::risk: risk = static_cast<RiskLabel>(cls); break;
    case Target::debug: debug = cls; break;
    case Target::resolution: resolution = cls; break;
  }
}

json expert_labels_to_json(const LabelSet& labels) {
  json j = json::object();
  j["risk"] = labels.risk ? json(to_string(*labels.risk)) : json(nullptr);
  j["debug"] = labels.debug ? json(*labels.debug) : json(nullptr);
  j["resolution"] = labels.resolution ? json(*labels.resolution) : json(nullptr);
  return j;
}

namespace {

int complexity_from_json(const json& v, const char* name) {
  if (!v.is_number_integer()) throw DataError(std::string(name) + " complexity must be an integer");
  const auto c = v.get<long long>();
  if (c < kComplexityMin || c > kComplexityMax) {
    throw DataError(std::string(name) + " complexity " + std::to_string(c) + " outside 0..10");
  }
  return static_cast<int>(c);
}

}  // namespace

LabelSet expert_labels_from_json(const json& j) {
  if (!j.is_object()) throw DataError("labels must be an object");
  LabelSet out;
  if (j.contains("risk") && !j.at("risk").is_null()) {
    const json& r = j.at("risk");
    if (r.is_string()) {
      out.risk = risk_from_string(r.get<std::string>());
    } else if (r.is_number_integer() && r.get<long long>() >= 0 &&
               r.get<long long>() < static_cast<long long>(kNumRiskClasses)) {
      out.risk = static_cast<RiskLabel>(r.get<int>());
    } else {
      throw DataError("invalid risk label " + r.dump());
    }
  }
  if (j.contains("debug") && !j.at("debug").is_null()) out.debug = complexity_from_json(j.at("debug"), "debug");
  if (j.contains("resolution") && !j.at("resolution").is_null()) {
    out.resolution = complexity_from_json(j.at("resolution"), "resolution");
  }
  return out;
}

double fixing_time_days(const DerivedTicket& derived, const BaseTicket& base) {
  if (derived.base_id != base.base_id) {
    throw DataError("derived ticket " + derived.base_id + " does not originate from " + base.base_id);
  }
  const double days = static_cast<double>(base.closed_at - derived.observation_time) / kSecondsPerDay;
  if (days < 0.0) throw DataError("negative fixing time for ticket " + base.base_id);
  return days;
}

int FixingTimeBinning::assign(double days) const {
  int cls = 0;
  for (double b : boundaries) {
    if (days > b) ++cls;
  }
  return cls;
}

json FixingTimeBinning::to_json() const { return {{"quantiles", quantiles}, {"boundaries", boundaries}}; }

FixingTimeBinning FixingTimeBinning::from_json(const json& j) {
  FixingTimeBinning b;
  b.quantiles = j.at("quantiles").get<std::array<double, 4>>();
  b.boundaries = j.at("boundaries").get<std::array<double, 4>>();
  return b;
}

double lower_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("lower_quantile: empty sample");
  const double n = static_cast<double>(sorted.size());
  // Guard against q * n landing a hair above an integer (0.6 * 5 == 3.0000000000000004).
  auto idx = static_cast<long long>(std::ceil(q * n - 1e-9)) - 1;
  idx = std::clamp<long long>(idx, 0, static_cast<long long>(sorted.size()) - 1);
  return sorted[static_cast<std::size_t>(idx)];
}

FixingTimeBinning fit_binning(std::vector<double> training_days) {
  if (training_days.size() < 5) throw std::invalid_argument("fit_binning: need at least 5 values");
  std::sort(training_days.begin(), training_days.end());
  FixingTimeBinning b;
  for (std::size_t i = 0; i < b.quantiles.size(); ++i) b.boundaries[i] = lower_quantile(training_days, b.quantiles[i]);
  return b;
}

ExpertLabels attach_expert_labels(const Corpus& corpus, std::istream& label_file) {
  ExpertLabels out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(label_file, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("label file line " + std::to_string(line_no) + ": malformed JSON");
    }
    if (!row.is_object() || !row.contains("base_id")) {
      throw DataError("label file line " + std::to_string(line_no) + ": missing base_id");
    }
    const json& idj = row.at("base_id");
    const std::string id = idj.is_string() ? idj.get<std::string>() : idj.dump();
    if (corpus.find(id) == nullptr) {
      throw DataError("label file line " + std::to_string(line_no) + ": unknown base id '" + id + "'");
    }
    LabelSet parsed;
    try {
      parsed = expert_labels_from_json(row);
    } catch (const DataError& e) {
      throw DataError("label file line " + std::to_string(line_no) + ": " + e.what());
    }
    LabelSet& dst = out[id];
    if (parsed.risk) dst.risk = parsed.risk;
    if (parsed.debug) dst.debug = parsed.debug;
    if (parsed.resolution) dst.resolution = parsed.resolution;
  }
  return out;
}

ExpertLabels attach_expert_labels_file(const Corpus& corpus, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file '" + path + "'");
  return attach_expert_labels(corpus, in);
}

std::vector<LabelSet> label_derived(const std::vector<DerivedTicket>& derived, const Corpus& corpus,
                                    const ExpertLabels& expert, const FixingTimeBinning& binning) {
  std::vector<LabelSet> out;
  out.reserve(derived.size());
  for (const auto& d : derived) {
    LabelSet ls;
    if (auto it = expert.find(d.base_id); it != expert.end()) ls = it->second;
    ls.fixing_time_class = binning.assign(fixing_time_days(d, corpus.at(d.base_id)));
    out.push_back(ls);
  }
  return out;
}

int ComplexityCoarsening::apply(int complexity) const {
  if (complexity < kComplexityMin || complexity > kComplexityMax) {
    throw DataError("complexity " + std::to_string(complexity) + " outside 0..10");
  }
  return group[static_cast<std::size_t>(complexity)];
}

std::size_t ComplexityCoarsening::num_groups() const {
  return std::set<int>(group.begin(), group.end()).size();
}

}  // namespace triage
