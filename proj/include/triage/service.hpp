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

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>

#include "json.hpp"
#include "triage/active_learning.hpp"
#include "triage/model.hpp"

namespace triage {

// Trained per-target models with the feature spec and schema they expect, as
// written by the `train` subcommand.
struct ModelBundle {
  Schema schema;
  FeatureSpec spec;
  std::map<Target, std::shared_ptr<const Classifier>> models;

  // Reads schema.json, feature_spec.json and <target>.model from dir. Every
  // model must carry the spec hash. Throws ModelFormatError otherwise.
  static ModelBundle load(const std::string& dir);
};

// Per-target prediction: argmax class, full distribution and its entropy.
nlohmann::json prediction_json(Target target, std::span<const double> p);

struct ServiceOptions {
  std::string root_dir;  // one subdirectory per session
  std::optional<std::string> model_dir;
  // Relative paths in POST /sessions configs resolve against this directory.
  std::string config_base_dir;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-independent request handling. Session lookups share a registry
// lock; every session carries its own reader/writer lock so reads run
// concurrently and mutations are serialized.
class Service {
 public:
  // Reloads every session directory under root_dir.
  explicit Service(ServiceOptions options);
  ~Service();

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body,
                      const std::map<std::string, std::string>& query = {});

  std::size_t num_sessions() const;
  // Sessions found under root_dir that could not be reloaded, with reasons.
  const std::map<std::string, std::string>& load_failures() const { return load_failures_; }

 private:
  struct Entry;

  std::shared_ptr<Entry> find(const std::string& id) const;
  HttpResponse list_sessions() const;
  HttpResponse create_session(const nlohmann::json& body);
  HttpResponse get_session(const std::string& id) const;
  HttpResponse get_proposal(const std::string& id);
  HttpResponse post_labels(const std::string& id, const nlohmann::json& body);
  HttpResponse get_curve(const std::string& id, const std::map<std::string, std::string>& query) const;
  HttpResponse predict(const nlohmann::json& body) const;

  ServiceOptions options_;
  std::optional<ModelBundle> bundle_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, std::string> load_failures_;
};

// Blocks serving HTTP on host:port. A port of 0 binds an ephemeral port and
// reports it through on_bound before accepting requests.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  // Returns false when binding fails.
  bool listen(const std::string& host, int port, const std::function<void(int)>& on_bound = {});
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace triage
