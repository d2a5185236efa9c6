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

#include "triage/eval.hpp"

#include <ostream>
#include <random>
#include <stdexcept>

namespace triage {

ConfusionCounts ConfusionCounts::from_labels(std::span<const int> y_true, std::span<const int> y_pred,
                                             std::size_t k) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("y_true and y_pred differ in length");
  ConfusionCounts c;
  c.tp.assign(k, 0);
  c.fp.assign(k, 0);
  c.fn.assign(k, 0);
  c.n = y_true.size();
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k) {
      throw std::invalid_argument("label outside [0, k)");
    }
    if (t == p) {
      ++c.tp[static_cast<std::size_t>(t)];
    } else {
      ++c.fn[static_cast<std::size_t>(t)];
      ++c.fp[static_cast<std::size_t>(p)];
    }
  }
  return c;
}

double f1(double tp, double fp, double fn) {
  const double den = tp + 0.5 * (fp + fn);
  return den > 0.0 ? tp / den : 0.0;
}

double f1(const ConfusionCounts& counts, std::size_t c) {
  return f1(static_cast<double>(counts.tp[c]), static_cast<double>(counts.fp[c]), static_cast<double>(counts.fn[c]));
}

nlohmann::json EvalReport::to_json() const {
  return {{"target", target},   {"model_id", model_id},       {"class_names", class_names},
          {"n", n},             {"per_class_f1", per_class_f1}, {"support", support},
          {"weighted_f1", weighted_f1}};
}

void EvalReport::write_csv(std::ostream& out, bool header) const {
  if (header) out << "target,model_id,class,support,f1\n";
  out.precision(17);
  for (std::size_t c = 0; c < per_class_f1.size(); ++c) {
    const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
    out << target << ',' << model_id << ',' << name << ',' << support[c] << ',' << per_class_f1[c] << '\n';
  }
  out << target << ',' << model_id << ",weighted," << n << ',' << weighted_f1 << '\n';
}

EvalReport weighted_f1(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k) {
  if (y_true.empty()) throw std::invalid_argument("weighted_f1: empty input");
  return report_from_counts(ConfusionCounts::from_labels(y_true, y_pred, k));
}

EvalReport report_from_counts(const ConfusionCounts& counts) {
  if (counts.n == 0) throw std::invalid_argument("report_from_counts: no rows");
  const std::size_t k = counts.num_classes();
  EvalReport r;
  r.n = counts.n;
  r.per_class_f1.resize(k);
  r.support.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    r.per_class_f1[c] = f1(counts, c);
    r.support[c] = counts.support(c);
    r.weighted_f1 += static_cast<double>(r.support[c]) / static_cast<double>(r.n) * r.per_class_f1[c];
  }
  return r;
}

double analytic_guesser_f1(std::size_t support, std::size_t n, std::size_t k) {
  // E[TP] = s/k, E[FP] = (n - s)/k, E[FN] = s - s/k.
  const double s = static_cast<double>(support);
  const double den = static_cast<double>(n) + static_cast<double>(k) * s;
  return den > 0.0 ? 2.0 * s / den : 0.0;
}

EvalReport random_guesser_f1(std::span<const int> y_true, std::size_t k, std::optional<std::uint64_t> seed) {
  std::vector<int> all(k);
  for (std::size_t c = 0; c < k; ++c) all[c] = static_cast<int>(c);
  return random_guesser_f1(y_true, k, all, seed);
}

EvalReport random_guesser_f1(std::span<const int> y_true, std::size_t k, const std::vector<int>& guessable,
                             std::optional<std::uint64_t> seed) {
  if (y_true.empty()) throw std::invalid_argument("random_guesser_f1: empty input");
  if (k == 0 || guessable.empty()) throw std::invalid_argument("random_guesser_f1: no classes to guess");
  std::vector<bool> can(k, false);
  for (int c : guessable) {
    if (c < 0 || static_cast<std::size_t>(c) >= k) throw std::invalid_argument("guessable class outside [0, k)");
    can[static_cast<std::size_t>(c)] = true;
  }
  std::size_t kg = 0;
  for (bool b : can) kg += b;
  if (seed) {
    std::vector<int> pool;
    for (std::size_t c = 0; c < k; ++c) {
      if (can[c]) pool.push_back(static_cast<int>(c));
    }
    std::mt19937_64 rng(*seed);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<int> pred(y_true.size());
    for (int& p : pred) p = pool[pick(rng)];
    auto r = weighted_f1(y_true, pred, k);
    r.model_id = "random_guesser_sampled";
    return r;
  }
  EvalReport r;
  r.model_id = "random_guesser_analytic";
  r.n = y_true.size();
  r.support.assign(k, 0);
  for (int t : y_true) {
    if (t < 0 || static_cast<std::size_t>(t) >= k) throw std::invalid_argument("label outside [0, k)");
    ++r.support[static_cast<std::size_t>(t)];
  }
  r.per_class_f1.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (can[c]) r.per_class_f1[c] = analytic_guesser_f1(r.support[c], r.n, kg);
    r.weighted_f1 += static_cast<double>(r.support[c]) / static_cast<double>(r.n) * r.per_class_f1[c];
  }
  return r;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "target,model_id,weighted_f1,baseline_f1\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.target << ',' << r.model_id << ',' << r.weighted_f1 << ',' << r.baseline_f1 << '\n';
  }
}

nlohmann::json comparison_to_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"target", r.target},
                   {"model_id", r.model_id},
                   {"weighted_f1", r.weighted_f1},
                   {"baseline_f1", r.baseline_f1}});
  }
  return out;
}

LengthAnalysis length_analysis(const std::vector<BaseTicket>& tickets, std::size_t n_entries,
                               const std::vector<LengthTarget>& targets) {
  if (n_entries == 0) throw std::invalid_argument("length_analysis: n_entries must be at least 1");
  LengthAnalysis out;
  std::vector<const BaseTicket*> selected;
  for (const auto& t : tickets) {
    if (t.events.size() == n_entries) selected.push_back(&t);
  }
  if (selected.empty()) {
    out.warnings.push_back("no base ticket has exactly " + std::to_string(n_entries) + " entries");
    return out;
  }
  std::vector<std::vector<DerivedTicket>> expanded;
  expanded.reserve(selected.size());
  for (const auto* t : selected) expanded.push_back(expand_ticket(*t));

  for (const auto& lt : targets) {
    for (std::size_t idx = 1; idx <= n_entries; ++idx) {
      std::vector<int> truth, pred;
      for (std::size_t b = 0; b < selected.size(); ++b) {
        const DerivedTicket& d = expanded[b][idx - 1];
        const auto y = lt.truth(d, *selected[b]);
        if (!y) continue;
        truth.push_back(*y);
        pred.push_back(lt.predict(d));
      }
      LengthPoint p;
      p.entry_index = idx;
      p.target = to_string(lt.target);
      p.n = truth.size();
      if (truth.empty()) {
        out.warnings.push_back(std::string("no labeled rows for ") + to_string(lt.target) + " at entry " +
                               std::to_string(idx));
      } else {
        p.f1 = weighted_f1(truth, pred, lt.num_classes).weighted_f1;
      }
      out.series.push_back(p);
    }
  }
  return out;
}

void write_length_csv(std::ostream& out, const LengthAnalysis& analysis) {
  out << "entry_index,target,f1\n";
  out.precision(17);
  for (const auto& p : analysis.series) out << p.entry_index << ',' << p.target << ',' << p.f1 << '\n';
}

}  // namespace triage
