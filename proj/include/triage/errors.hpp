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

#include <stdexcept>
#include <string>

namespace triage {

// Root of every error thrown by the library. Callers that only care about
// "something in the pipeline failed" catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file or record does not match the declared schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Data is well-formed but semantically inconsistent (duplicate ids,
// negative fixing times, unknown base ids, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Model or feature-spec blob cannot be decoded: truncated, wrong type,
// wrong format version, or mismatched feature-spec hash.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};

// A model blob of one classifier type handed to a loader expecting another.
class ModelTypeError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

class MissingEmbeddingError : public Error {
 public:
  explicit MissingEmbeddingError(const std::string& key)
      : Error("missing external embedding for key '" + key + "'"), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Optimistic-concurrency failure: the caller's session version is stale.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Active-learning pool has nothing left to propose.
class ExhaustedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace triage
