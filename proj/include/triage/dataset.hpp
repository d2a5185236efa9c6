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

#include <span>
#include <string>
#include <vector>

#include "triage/matrix.hpp"

namespace triage {

struct Dataset {
  Matrix X;
  std::vector<int> y;
  std::vector<std::string> class_names;
  // Base-ticket id per row; used for group-aware splitting.
  std::vector<std::string> group_ids;

  std::size_t size() const { return X.rows(); }
  std::size_t num_features() const { return X.cols(); }
  std::size_t num_classes() const { return class_names.size(); }

  // Throws std::invalid_argument on inconsistent sizes or labels out of range.
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
  std::vector<std::size_t> class_counts() const;
};

}  // namespace triage
