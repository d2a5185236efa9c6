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

#include "triage/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <istream>

#include "json.hpp"
#include "triage/errors.hpp"

namespace triage {

void ExternalEmbeddingStore::insert(const std::string& key, std::vector<double> vec) {
  if (vectors_.empty() && dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw SchemaError("embedding '" + key + "' has width " + std::to_string(vec.size()) +
                      ", expected " + std::to_string(dim_));
  }
  if (!vectors_.emplace(key, std::move(vec)).second) {
    throw SchemaError("duplicate embedding key '" + key + "'");
  }
}

ExternalEmbeddingStore ExternalEmbeddingStore::load(std::istream& in) {
  ExternalEmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto vec = j.at("vec").get<std::vector<double>>();
      for (double v : vec) {
        if (!std::isfinite(v)) throw SchemaError("non-finite value");
      }
      store.insert(j.at("key").get<std::string>(), std::move(vec));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("embedding file line " + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError("embedding file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

ExternalEmbeddingStore ExternalEmbeddingStore::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open embedding file '" + path + "'");
  return load(in);
}

const std::vector<double>& ExternalEmbeddingStore::lookup(const std::string& key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) throw MissingEmbeddingError(key);
  return it->second;
}

std::string embedding_key(const std::string& base_id, std::size_t prefix_len) {
  return base_id + ":" + std::to_string(prefix_len);
}

}  // namespace triage
