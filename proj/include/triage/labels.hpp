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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "triage/corpus.hpp"

namespace triage {

enum class Target { time_to_fix, risk, debug, resolution };

inline constexpr std::array<Target, 4> kAllTargets = {Target::time_to_fix, Target::risk,
                                                      Target::debug, Target::resolution};
// Targets labeled by experts, in proposal tie-break order.
inline constexpr std::array<Target, 3> kExpertTargets = {Target::risk, Target::debug,
                                                         Target::resolution};

const char* to_string(Target t);
Target target_from_string(const std::string& s);
std::size_t num_classes(Target t);
std::vector<std::string> class_names(Target t);

// Most to least critical.
enum class RiskLabel { hardware_fix, code_fix, setup_fix, waiver, user_error, duplicate };
inline constexpr std::size_t kNumRiskClasses = 6;
const char* to_string(RiskLabel r);
RiskLabel risk_from_string(const std::string& s);

inline constexpr int kComplexityMin = 0;
inline constexpr int kComplexityMax = 10;

struct LabelSet {
  std::optional<int> fixing_time_class;
  std::optional<RiskLabel> risk;
  std::optional<int> debug;
  std::optional<int> resolution;

  // Class index for any target.
  std::optional<int> get(Target t) const;
  // Throws DataError when the class index is out of range for the target.
  void set(Target t, int cls);
  bool has_all_expert() const { return risk && debug && resolution; }
  bool operator==(const LabelSet&) const = default;
};

nlohmann::json expert_labels_to_json(const LabelSet& labels);
// Accepts any subset of "risk", "debug", "resolution"; validates ranges.
LabelSet expert_labels_from_json(const nlohmann::json& j);

// Days from the observation time to the base ticket's close. Throws
// DataError when negative or when the tickets do not belong together.
double fixing_time_days(const DerivedTicket& derived, const BaseTicket& base);

struct FixingTimeBinning {
  std::array<double, 4> quantiles = {0.2, 0.4, 0.6, 0.8};
  std::array<double, 4> boundaries = {};

  // Class 0..4; a value equal to a boundary falls in the lower class.
  int assign(double days) const;

  nlohmann::json to_json() const;
  static FixingTimeBinning from_json(const nlohmann::json& j);
};

// Lower empirical quantile: sorted[ceil(q * n) - 1].
double lower_quantile(const std::vector<double>& sorted, double q);

// Throws std::invalid_argument with fewer than 5 values.
FixingTimeBinning fit_binning(std::vector<double> training_days);

// base id -> expert labels (fixing-time class unset).
using ExpertLabels = std::map<std::string, LabelSet>;

// Reads the JSON-lines label file {"base_id", "risk", "debug", "resolution"}.
// Unknown base ids and out-of-range values raise DataError. Rows for the
// same base id are merged.
ExpertLabels attach_expert_labels(const Corpus& corpus, std::istream& label_file);
ExpertLabels attach_expert_labels_file(const Corpus& corpus, const std::string& path);

// Full label set for every derived ticket: expert labels propagate from the
// base, the fixing-time class is computed per derived ticket.
std::vector<LabelSet> label_derived(const std::vector<DerivedTicket>& derived, const Corpus& corpus,
                                    const ExpertLabels& expert, const FixingTimeBinning& binning);

// Optional user-defined reduction of the 0..10 complexity scale.
struct ComplexityCoarsening {
  std::array<int, 11> group = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int apply(int complexity) const;
  std::size_t num_groups() const;
};

}  // namespace triage
