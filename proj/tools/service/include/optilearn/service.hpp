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

#pragma once

// HTTP/1.1 JSON API over a CampaignStore, versioned under /v1.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>

#include "optilearn/campaign.hpp"

namespace httplib {
class Server;
}

namespace optilearn {

struct ServiceOptions {
  std::filesystem::path data_dir = "data";
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks an ephemeral port
  std::chrono::milliseconds audit_interval{std::chrono::seconds(60)};
  std::function<std::string()> clock = utc_timestamp;
  /// Optional directory served at / (the dashboard bundle).
  std::filesystem::path static_dir;
  std::optional<std::size_t> crash_after_bytes;
  std::ostream* log = nullptr;
};

/// Parses {"host", "port", "data_dir", "audit_interval_seconds", "static_dir"}.
ServiceOptions service_options_from_json(const nlohmann::json& doc);

struct HttpError {
  int status = 500;
  nlohmann::json body;
};

/// Maps a library exception to a status code and {code, message, field_path} body.
HttpError http_error(const std::exception& e);

class AdvisorService {
 public:
  explicit AdvisorService(ServiceOptions options);
  ~AdvisorService();
  AdvisorService(const AdvisorService&) = delete;
  AdvisorService& operator=(const AdvisorService&) = delete;

  /// Binds the listening socket and returns the port; throws std::runtime_error when busy.
  int bind();
  /// Serves until stop(). Call bind() first.
  void run();
  void stop();
  int port() const { return port_; }

  CampaignStore& store() { return *store_; }
  /// Runs one replay audit now and logs any disagreement.
  std::vector<StoreIssue> audit_now();

 private:
  void install_routes();
  void audit_loop();
  void log(const std::string& line);

  ServiceOptions options_;
  std::unique_ptr<CampaignStore> store_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
  std::thread auditor_;
  std::mutex audit_mutex_;
  std::condition_variable audit_cv_;
  bool stopping_ = false;
  std::mutex log_mutex_;
};

}  // namespace optilearn
