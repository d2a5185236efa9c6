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

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace triage {

// Precomputed sentence embeddings (for example from a transformer model run
// outside this toolkit), keyed by derived-ticket key.
class ExternalEmbeddingStore {
 public:
  ExternalEmbeddingStore() = default;

  // JSON lines {"key": string, "vec": [floats]}. Throws SchemaError on
  // ragged widths, duplicate keys, or malformed rows.
  static ExternalEmbeddingStore load(std::istream& in);
  static ExternalEmbeddingStore load_file(const std::string& path);

  void insert(const std::string& key, std::vector<double> vec);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& key) const { return vectors_.count(key) > 0; }
  // Throws MissingEmbeddingError naming the key.
  const std::vector<double>& lookup(const std::string& key) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Key under which a derived ticket's embedding is stored: "<base_id>:<prefix_len>".
std::string embedding_key(const std::string& base_id, std::size_t prefix_len);

}  // namespace triage
