// Copyright 2026 The Optilearn Authors. All Rights Reserved.
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

#include "optilearn/service.hpp"

#include <charconv>
#include <iostream>

#include <httplib.h>

#include "optilearn/errors.hpp"
#include "optilearn/json_util.hpp"
#include "optilearn/version.hpp"

namespace optilearn {

namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

json event_json(const CampaignEvent& e) {
  json doc;
  doc["type"] = e.type == CampaignEvent::Type::kObservation ? "observation" : "decision";
  doc["n"] = e.n;
  doc["candidate"] = e.candidate;
  if (e.type == CampaignEvent::Type::kObservation) doc["outcome"] = e.outcome;
  doc["note"] = e.note;
  doc["event_key"] = e.event_key;
  doc["recorded_at"] = e.recorded_at;
  if (e.duration) doc["duration"] = *e.duration;
  if (e.cost) doc["cost"] = *e.cost;
  return doc;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

json parse_body(const httplib::Request& req) { return json::parse(req.body); }

int int_param(const httplib::Request& req, const std::string& name, int fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string text = req.get_param_value(name);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError(name + ": expected an integer", name);
  }
  return value;
}

bool flag_param(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) return false;
  const std::string v = req.get_param_value(name);
  return v.empty() || v == "1" || v == "true";
}

}  // namespace

ServiceOptions service_options_from_json(const json& doc) {
  namespace ju = json_util;
  if (!doc.is_object()) throw ConfigError("service configuration must be a JSON object");
  ServiceOptions o;
  for (const auto& [key, value] : doc.items()) {
    if (key == "host") o.host = ju::as_string(value, key);
    else if (key == "port") o.port = static_cast<int>(ju::as_integer(value, key));
    else if (key == "data_dir") o.data_dir = ju::as_string(value, key);
    else if (key == "static_dir") o.static_dir = ju::as_string(value, key);
    else if (key == "audit_interval_seconds") o.audit_interval = std::chrono::milliseconds(static_cast<long>(1000 * ju::as_number(value, key)));
    else throw ConfigError(key + ": unknown service option", key);
  }
  if (o.port < 0 || o.port > 65535) throw ConfigError("port: must lie in [0, 65535]", "port");
  return o;
}

HttpError http_error(const std::exception& e) {
  HttpError out;
  std::string code = "internal_error";
  std::string field;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    code = std::string(to_string(err->code()));
    field = err->field_path();
    switch (err->code()) {
      case ErrorCode::kNotFound: out.status = 404; break;
      case ErrorCode::kConflict: out.status = 409; break;
      case ErrorCode::kNumerical: out.status = 500; break;
      default: out.status = 422; break;
    }
  } else if (dynamic_cast<const json::parse_error*>(&e) != nullptr) {
    out.status = 400;
    code = "malformed_json";
  } else if (dynamic_cast<const json::exception*>(&e) != nullptr) {
    out.status = 422;
    code = "validation_error";
  }
  out.body = {{"code", code}, {"message", e.what()}};
  if (!field.empty()) out.body["field_path"] = field;
  return out;
}

AdvisorService::AdvisorService(ServiceOptions options) : options_(std::move(options)) {
  StoreOptions so;
  so.directory = options_.data_dir;
  so.clock = options_.clock;
  so.crash_after_bytes = options_.crash_after_bytes;
  store_ = std::make_unique<CampaignStore>(so);
  for (const auto& issue : store_->load_issues()) log("load: " + issue.campaign_id + ": " + issue.message);
  server_ = std::make_unique<httplib::Server>();
  install_routes();
}

AdvisorService::~AdvisorService() {
  stop();
  if (auditor_.joinable()) auditor_.join();
}

void AdvisorService::log(const std::string& line) {
  if (options_.log == nullptr) return;
  std::lock_guard<std::mutex> lock(log_mutex_);
  *options_.log << line << std::endl;
}

int AdvisorService::bind() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
    if (port_ < 0) throw std::runtime_error("cannot bind " + options_.host);
  } else {
    if (!server_->bind_to_port(options_.host, options_.port)) {
      throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port) + " (port busy?)");
    }
    port_ = options_.port;
  }
  return port_;
}

void AdvisorService::run() {
  if (options_.audit_interval.count() > 0) auditor_ = std::thread([this] { audit_loop(); });
  log("listening on " + options_.host + ":" + std::to_string(port_));
  server_->listen_after_bind();
  {
    std::lock_guard<std::mutex> lock(audit_mutex_);
    stopping_ = true;
  }
  audit_cv_.notify_all();
  if (auditor_.joinable()) auditor_.join();
  log("stopped");
}

void AdvisorService::stop() {
  {
    std::lock_guard<std::mutex> lock(audit_mutex_);
    stopping_ = true;
  }
  audit_cv_.notify_all();
  if (server_) server_->stop();
}

std::vector<StoreIssue> AdvisorService::audit_now() {
  auto issues = store_->audit();
  for (const auto& issue : issues) log("audit: " + issue.campaign_id + ": " + issue.message);
  return issues;
}

void AdvisorService::audit_loop() {
  std::unique_lock<std::mutex> lock(audit_mutex_);
  while (!stopping_) {
    if (audit_cv_.wait_for(lock, options_.audit_interval, [this] { return stopping_; })) break;
    lock.unlock();
    audit_now();
    lock.lock();
  }
}

void AdvisorService::install_routes() {
  using httplib::Request;
  using httplib::Response;
  auto& s = *server_;
  s.set_payload_max_length(64u << 20);

  s.set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      const HttpError err = http_error(e);
      send_json(res, err.status, err.body);
    } catch (...) {
      send_json(res, 500, {{"code", "internal_error"}, {"message", "unknown failure"}});
    }
  });
  s.set_error_handler([](const Request&, Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) send_json(res, 404, {{"code", "not_found"}, {"message", "no such endpoint"}});
  });

  s.Get("/v1/health", [this](const Request&, Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"version", OPTILEARN_VERSION_STRING}, {"campaigns", store_->ids().size()}});
  });

  s.Post("/v1/campaigns", [this](const Request& req, Response& res) {
    const bool import = flag_param(req, "import") || req.get_header_value("Content-Type") == "application/x-ndjson";
    std::shared_ptr<const Campaign> c = import ? store_->import_document(req.body) : store_->create(parse_body(req));
    res.set_header("Location", "/v1/campaigns/" + c->id());
    send_json(res, 201, campaign_summary(*c));
  });

  s.Get("/v1/campaigns/:id", [this](const Request& req, Response& res) {
    send_json(res, 200, campaign_summary(*store_->get(req.path_params.at("id"))));
  });

  s.Post("/v1/campaigns/:id/observations", [this](const Request& req, Response& res) {
    const json body = parse_body(req);
    const ObservationResult r = store_->record_observation(req.path_params.at("id"), body);
    json out = campaign_summary(*r.campaign);
    out["event"] = event_json(r.event);
    out["duplicate"] = r.duplicate;
    send_json(res, r.duplicate ? 200 : 201, out);
  });

  s.Get("/v1/campaigns/:id/recommendation", [this](const Request& req, Response& res) {
    send_json(res, 200, to_json(recommend(*store_->get(req.path_params.at("id")))));
  });

  s.Get("/v1/campaigns/:id/surface", [this](const Request& req, Response& res) {
    const CampaignSurface surface = campaign_surface(*store_->get(req.path_params.at("id")));
    if (req.has_param("format") && req.get_param_value("format") == "csv") {
      res.status = 200;
      res.set_content(to_csv(surface), "text/csv");
    } else {
      send_json(res, 200, to_json(surface));
    }
  });

  s.Get("/v1/campaigns/:id/risk", [this](const Request& req, Response& res) {
    const auto c = store_->get(req.path_params.at("id"));
    const int sims = int_param(req, "sims", 1000);
    const int bins = int_param(req, "bins", 20);
    if (bins < 1 || bins > 1000) throw InputError("bins: must lie in [1, 1000]", "bins");
    send_json(res, 200, to_json(forecast_risk(*c, sims, bins)));
  });

  s.Get("/v1/campaigns/:id/export", [this](const Request& req, Response& res) {
    res.status = 200;
    res.set_content(store_->export_document(req.path_params.at("id")), "application/x-ndjson");
  });

  if (!options_.static_dir.empty()) s.set_mount_point("/", options_.static_dir.string());
}

}  // namespace optilearn
