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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "triage/corpus.hpp"
#include "triage/labels.hpp"

namespace triage {

struct ConfusionCounts {
  std::vector<std::size_t> tp, fp, fn;
  std::size_t n = 0;

  // Throws std::invalid_argument on length mismatch or labels outside [0, k).
  static ConfusionCounts from_labels(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k);
  std::size_t num_classes() const { return tp.size(); }
  std::size_t support(std::size_t c) const { return tp[c] + fn[c]; }
};

// TP / (TP + (FP + FN) / 2); 0 when the denominator is 0.
double f1(double tp, double fp, double fn);
double f1(const ConfusionCounts& counts, std::size_t c);

struct EvalReport {
  std::string target;
  std::string model_id;
  std::vector<std::string> class_names;
  std::vector<double> per_class_f1;
  std::vector<std::size_t> support;
  double weighted_f1 = 0.0;
  std::size_t n = 0;

  nlohmann::json to_json() const;
  // One row per class plus a final "weighted" row:
  // target,model_id,class,support,f1
  void write_csv(std::ostream& out, bool header = true) const;
};

EvalReport report_from_counts(const ConfusionCounts& counts);

// Support-weighted mean of per-class f1. Throws std::invalid_argument on
// empty input or mismatched lengths.
EvalReport weighted_f1(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k);

// Baseline of a guesser choosing uniformly among k classes. Without a seed
// the expectation is computed in closed form from the class supports
// (expected TP, FP and FN plugged into the f1 formula, which is exact in the
// large-n limit); with a seed, predictions are drawn and scored.
EvalReport random_guesser_f1(std::span<const int> y_true, std::size_t k,
                             std::optional<std::uint64_t> seed = std::nullopt);

// Same baseline when the guesser only knows a subset of the classes (those
// seen in training): it draws uniformly among `guessable`, and classes
// outside that set are never predicted.
EvalReport random_guesser_f1(std::span<const int> y_true, std::size_t k, const std::vector<int>& guessable,
                             std::optional<std::uint64_t> seed = std::nullopt);

// Per-class closed-form value 2s / (n + k s) for support s.
double analytic_guesser_f1(std::size_t support, std::size_t n, std::size_t k);

struct ComparisonRow {
  std::string target;
  std::string model_id;
  double weighted_f1 = 0.0;
  double baseline_f1 = 0.0;
};

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
nlohmann::json comparison_to_json(const std::vector<ComparisonRow>& rows);

// How one target is predicted and labeled for the length analysis.
struct LengthTarget {
  Target target;
  std::size_t num_classes = 0;
  std::function<int(const DerivedTicket&)> predict;
  // Ground truth for a derived ticket of `base`; nullopt skips the row.
  std::function<std::optional<int>(const DerivedTicket&, const BaseTicket& base)> truth;
};

struct LengthPoint {
  std::size_t entry_index = 0;
  std::string target;
  double f1 = 0.0;
  std::size_t n = 0;
};

struct LengthAnalysis {
  std::vector<LengthPoint> series;
  std::vector<std::string> warnings;
};

// Restricts to base tickets with exactly n_entries events and scores every
// prefix index 1..n_entries separately. Throws std::invalid_argument when
// n_entries is 0.
LengthAnalysis length_analysis(const std::vector<BaseTicket>& tickets, std::size_t n_entries,
                               const std::vector<LengthTarget>& targets);

// entry_index,target,f1
void write_length_csv(std::ostream& out, const LengthAnalysis& analysis);

}  // namespace triage
