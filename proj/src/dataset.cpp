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

#include "triage/dataset.hpp"

#include <stdexcept>

namespace triage {

void Dataset::validate() const {
  if (y.size() != X.rows()) throw std::invalid_argument("dataset: label count does not match rows");
  if (!group_ids.empty() && group_ids.size() != X.rows()) {
    throw std::invalid_argument("dataset: group id count does not match rows");
  }
  if (class_names.empty()) throw std::invalid_argument("dataset: no classes");
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= class_names.size()) {
      throw std::invalid_argument("dataset: label " + std::to_string(label) + " out of range");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.X = X.select_rows(rows);
  out.class_names = class_names;
  out.y.reserve(rows.size());
  for (std::size_t r : rows) out.y.push_back(y[r]);
  if (!group_ids.empty()) {
    out.group_ids.reserve(rows.size());
    for (std::size_t r : rows) out.group_ids.push_back(group_ids[r]);
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (int label : y) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

}  // namespace triage
