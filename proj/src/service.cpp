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

#include "triage/service.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "httplib.h"
#include "triage/errors.hpp"
#include "triage/pipeline.hpp"

namespace triage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

HttpResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_response(int status, const std::string& kind, const std::string& message,
                            json extra = json::object()) {
  extra["error"] = kind;
  extra["message"] = message;
  return json_response(status, extra);
}

bool valid_session_id(const std::string& id) {
  static const std::regex re("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(id, re);
}

json issues_json(const std::vector<FieldIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues) out.push_back({{"path", i.path}, {"message", i.message}});
  return out;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

}  // namespace

ModelBundle ModelBundle::load(const std::string& dir) {
  const fs::path root(dir);
  ModelBundle b;
  try {
    b.schema = Schema::load((root / "schema.json").string());
    b.spec = FeatureSpec::from_json(json::parse(read_file(root / "feature_spec.json")));
  } catch (const json::exception& e) {
    throw ModelFormatError("malformed model bundle in '" + dir + "': " + e.what());
  } catch (const SchemaError& e) {
    throw ModelFormatError("model bundle in '" + dir + "': " + e.what());
  } catch (const DataError& e) {
    throw ModelFormatError("model bundle in '" + dir + "': " + e.what());
  }
  const std::string hash = b.spec.hash();
  for (Target t : kAllTargets) {
    const fs::path path = root / (std::string(to_string(t)) + ".model");
    if (!fs::exists(path)) continue;
    auto loaded = load_model(read_file(path));
    if (loaded.meta.feature_spec_hash != hash) {
      throw ModelFormatError(path.string() + " was trained on a different feature spec");
    }
    if (loaded.meta.target != to_string(t)) {
      throw ModelFormatError(path.string() + " holds a model for target '" + loaded.meta.target + "'");
    }
    if (loaded.model->num_features() != b.spec.output_dim()) {
      throw ModelFormatError(path.string() + " does not match the feature width");
    }
    b.models.emplace(t, std::move(loaded.model));
  }
  if (b.models.empty()) throw ModelFormatError("no <target>.model files in '" + dir + "'");
  return b;
}

json prediction_json(Target target, std::span<const double> p) {
  const auto names = class_names(target);
  const std::size_t c = argmax(p);
  return {{"class", static_cast<int>(c)},
          {"label", names.at(c)},
          {"probabilities", std::vector<double>(p.begin(), p.end())},
          {"entropy", entropy(p)}};
}

struct Service::Entry {
  Entry(std::string id_, ALSession s) : id(std::move(id_)), session(std::move(s)) {}
  std::string id;
  mutable std::shared_mutex mutex;
  ALSession session;
  std::optional<Proposal> cached;
};

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.root_dir.empty()) throw ConfigError("service root directory is required");
  fs::create_directories(options_.root_dir);
  if (options_.model_dir) bundle_ = ModelBundle::load(*options_.model_dir);
  for (const auto& entry : fs::directory_iterator(options_.root_dir)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "session.json")) continue;
    const std::string id = entry.path().filename().string();
    try {
      sessions_.emplace(id, std::make_shared<Entry>(id, ALSession::load(entry.path().string())));
    } catch (const std::exception& e) {
      load_failures_.emplace(id, e.what());
    }
  }
}

Service::~Service() = default;

std::size_t Service::num_sessions() const {
  std::shared_lock lock(registry_mutex_);
  return sessions_.size();
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body,
                             const std::map<std::string, std::string>& query) {
  const auto parts = split_path(path);
  auto parse_body = [&]() {
    if (body.empty()) return json::object();
    json j = json::parse(body);
    if (!j.is_object()) throw DataError("request body must be a JSON object");
    return j;
  };
  auto not_allowed = [&]() { return error_response(405, "method_not_allowed", method + " not allowed on " + path); };
  try {
    if (parts.size() == 1 && parts[0] == "healthz") {
      if (method != "GET") return not_allowed();
      return json_response(200, {{"status", "ok"},
                                 {"sessions", num_sessions()},
                                 {"models_loaded", bundle_.has_value()}});
    }
    if (parts.size() == 1 && parts[0] == "predict") {
      if (method != "POST") return not_allowed();
      return predict(parse_body());
    }
    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1) {
        if (method == "GET") return list_sessions();
        if (method == "POST") return create_session(parse_body());
        return not_allowed();
      }
      const std::string& id = parts[1];
      if (parts.size() == 2) {
        if (method != "GET") return not_allowed();
        return get_session(id);
      }
      if (parts.size() == 3 && parts[2] == "proposal") {
        if (method != "GET") return not_allowed();
        return get_proposal(id);
      }
      if (parts.size() == 3 && parts[2] == "labels") {
        if (method != "POST") return not_allowed();
        return post_labels(id, parse_body());
      }
      if (parts.size() == 3 && parts[2] == "curve") {
        if (method != "GET") return not_allowed();
        return get_curve(id, query);
      }
    }
    return error_response(404, "not_found", "no route for " + path);
  } catch (const json::exception& e) {
    return error_response(400, "invalid_json", e.what());
  } catch (const ConflictError& e) {
    return error_response(409, "conflict", e.what());
  } catch (const ExhaustedError& e) {
    return error_response(410, "exhausted", e.what());
  } catch (const SchemaError& e) {
    return error_response(400, "validation", e.what());
  } catch (const DataError& e) {
    return error_response(400, "invalid", e.what());
  } catch (const ConfigError& e) {
    return error_response(400, "config", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse Service::list_sessions() const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(registry_mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  json out = json::array();
  for (const auto& e : entries) {
    std::shared_lock lock(e->mutex);
    out.push_back(e->session.descriptor(e->id));
  }
  return json_response(200, {{"sessions", out}});
}

HttpResponse Service::create_session(const json& body) {
  PipelineConfig config;
  if (body.contains("config_path")) {
    fs::path p = body.at("config_path").get<std::string>();
    if (p.is_relative() && !options_.config_base_dir.empty()) p = fs::path(options_.config_base_dir) / p;
    config = PipelineConfig::load(p.string());
  } else if (body.contains("config")) {
    config = PipelineConfig::from_json(body.at("config"), options_.config_base_dir);
  } else {
    return error_response(400, "invalid", "body needs 'config' or 'config_path'");
  }

  std::string id;
  if (body.contains("session_id")) {
    id = body.at("session_id").get<std::string>();
    if (!valid_session_id(id)) return error_response(400, "invalid", "session_id must match [A-Za-z0-9_-]{1,64}");
  }
  // Creation is slow (feature fitting and training); the registry lock is
  // taken only to claim the id and to publish the session.
  {
    std::unique_lock lock(registry_mutex_);
    if (id.empty()) {
      for (std::size_t n = sessions_.size() + 1;; ++n) {
        id = "session-" + std::to_string(n);
        if (!sessions_.count(id) && !fs::exists(fs::path(options_.root_dir) / id)) break;
      }
    } else if (sessions_.count(id) || fs::exists(fs::path(options_.root_dir) / id)) {
      return error_response(409, "conflict", "session '" + id + "' already exists");
    }
    sessions_.emplace(id, nullptr);
  }
  try {
    ALSession session = triage::create_session(config);
    const std::string dir = (fs::path(options_.root_dir) / id).string();
    session.save(dir);
    session.attach_directory(dir);
    auto entry = std::make_shared<Entry>(id, std::move(session));
    const json descriptor = entry->session.descriptor(id);
    std::unique_lock lock(registry_mutex_);
    sessions_[id] = std::move(entry);
    return json_response(201, descriptor);
  } catch (...) {
    std::unique_lock lock(registry_mutex_);
    sessions_.erase(id);
    throw;
  }
}

HttpResponse Service::get_session(const std::string& id) const {
  auto e = find(id);
  if (!e) return error_response(404, "not_found", "unknown session '" + id + "'");
  std::shared_lock lock(e->mutex);
  return json_response(200, e->session.descriptor(id));
}

HttpResponse Service::get_proposal(const std::string& id) {
  auto e = find(id);
  if (!e) return error_response(404, "not_found", "unknown session '" + id + "'");
  std::unique_lock lock(e->mutex);
  ALSession& s = e->session;
  if (!e->cached || e->cached->session_version != s.version()) {
    try {
      e->cached = s.propose_next();
    } catch (const ExhaustedError& ex) {
      e->cached.reset();
      return error_response(410, "exhausted", ex.what(), {{"session", s.descriptor(id)}});
    }
  }
  const Proposal& p = *e->cached;
  const std::size_t before = s.proposal_log().size();
  s.record_proposal(p);
  if (s.proposal_log().size() != before && !s.directory().empty()) s.save(s.directory());

  json entropies = json::object();
  for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
    const auto& h = p.ticket_entropies[t];
    entropies[to_string(kExpertTargets[t])] = h ? json(*h) : json(nullptr);
  }
  const auto it = s.labels().find(p.base_id);
  return json_response(200, {{"base_id", p.base_id},
                             {"target", to_string(p.target)},
                             {"entropy", p.entropy},
                             {"session_version", p.session_version},
                             {"ticket", ticket_to_json(*s.find_ticket(p.base_id))},
                             {"ticket_entropies", entropies},
                             {"current_labels", it == s.labels().end() ? expert_labels_to_json(LabelSet{})
                                                                       : expert_labels_to_json(it->second)}});
}

HttpResponse Service::post_labels(const std::string& id, const json& body) {
  auto e = find(id);
  if (!e) return error_response(404, "not_found", "unknown session '" + id + "'");
  if (!body.contains("base_id")) return error_response(400, "invalid", "missing base_id");
  if (!body.contains("labels") || !body.at("labels").is_object()) {
    return error_response(400, "invalid", "labels must be an object");
  }
  if (!body.contains("session_version") || !body.at("session_version").is_number_unsigned()) {
    return error_response(400, "invalid", "session_version must be a non-negative integer");
  }
  for (const auto& [key, value] : body.at("labels").items()) {
    if (key != "risk" && key != "debug" && key != "resolution") {
      return error_response(400, "invalid", "labels may only contain risk, debug and resolution; got '" + key + "'");
    }
  }
  const json& idj = body.at("base_id");
  const std::string base_id = idj.is_string() ? idj.get<std::string>() : idj.dump();
  const LabelSet fragment = expert_labels_from_json(body.at("labels"));
  const bool force = body.value("force", false);

  std::unique_lock lock(e->mutex);
  const SubmitResult r =
      e->session.submit_label(base_id, fragment, body.at("session_version").get<std::uint64_t>(), force);
  json out = e->session.descriptor(id);
  json retrained = json::array();
  for (Target t : r.retrained) retrained.push_back(to_string(t));
  out["retrained"] = retrained;
  out["fully_labeled"] = r.fully_labeled;
  return json_response(200, out);
}

HttpResponse Service::get_curve(const std::string& id, const std::map<std::string, std::string>& query) const {
  auto e = find(id);
  if (!e) return error_response(404, "not_found", "unknown session '" + id + "'");
  std::shared_lock lock(e->mutex);
  auto fmt = query.find("format");
  if (fmt != query.end() && fmt->second == "csv") {
    std::ostringstream out;
    write_curve_csv(out, e->session.curve());
    return {200, out.str(), "text/csv"};
  }
  if (fmt != query.end() && fmt->second != "json") {
    return error_response(400, "invalid", "format must be json or csv");
  }
  return json_response(200, {{"session_id", id}, {"curve", curve_to_json(e->session.curve())}});
}

HttpResponse Service::predict(const json& body) const {
  if (!body.contains("ticket")) return error_response(400, "invalid", "missing ticket");
  const json& ticket = body.at("ticket");
  json predictions = json::object();
  if (body.contains("session_id") && !body.at("session_id").is_null()) {
    const std::string id = body.at("session_id").get<std::string>();
    auto e = find(id);
    if (!e) return error_response(404, "not_found", "unknown session '" + id + "'");
    std::shared_lock lock(e->mutex);
    const auto issues = validate_ticket_json(ticket, e->session.schema(), false);
    if (!issues.empty()) {
      return error_response(400, "validation", format_issues(issues), {{"issues", issues_json(issues)}});
    }
    const auto dist = e->session.predict(open_ticket_from_json(ticket, e->session.schema()));
    for (std::size_t t = 0; t < kNumExpertTargets; ++t) {
      predictions[to_string(kExpertTargets[t])] = prediction_json(kExpertTargets[t], dist[t]);
    }
    return json_response(200, {{"source", "session"}, {"session_id", id}, {"predictions", predictions}});
  }
  if (!bundle_) {
    return error_response(400, "invalid", "no models loaded at startup; pass session_id to predict with a session");
  }
  const auto issues = validate_ticket_json(ticket, bundle_->schema, false);
  if (!issues.empty()) {
    return error_response(400, "validation", format_issues(issues), {{"issues", issues_json(issues)}});
  }
  const auto x = bundle_->spec.assemble(open_ticket_from_json(ticket, bundle_->schema)).values;
  for (const auto& [target, model] : bundle_->models) {
    predictions[to_string(target)] = prediction_json(target, model->predict_proba(x));
  }
  return json_response(200, {{"source", "models"}, {"predictions", predictions}});
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  explicit Impl(Service& s) : service(s) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string> query;
      for (const auto& [k, v] : req.params) query.emplace(k, v);
      const HttpResponse r = service.handle(req.method, req.path, req.body, query);
      res.status = r.status;
      res.set_content(r.body, r.content_type.c_str());
    };
    server.Get(".*", route);
    server.Post(".*", route);
    server.Put(".*", route);
    server.Delete(".*", route);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port, const std::function<void(int)>& on_bound) {
  if (port == 0) {
    port = impl_->server.bind_to_any_port(host);
    if (port < 0) return false;
  } else if (!impl_->server.bind_to_port(host, port)) {
    return false;
  }
  if (on_bound) on_bound(port);
  return impl_->server.listen_after_bind();
}

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace triage
