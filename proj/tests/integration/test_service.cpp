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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "optilearn/errors.hpp"
#include "optilearn/service.hpp"
#include "test_support.hpp"

#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;
using optilearn::AdvisorService;
using optilearn::ServiceOptions;
using testing_support::TempDir;

namespace {

const char* kDeclaration = R"({"id": "cat", "candidates": ["x1", "x2", "x3"], "budget": 3, "threshold": 20, "seed": 4,
  "prior": {"kind": "correlated_gaussian", "mean": [20, 16, 22],
            "covariance": [[12, 6, 3], [6, 7, 4], [3, 4, 15]], "noise_variance": 9}})";

class Running {
 public:
  explicit Running(const fs::path& dir, std::optional<std::size_t> crash = std::nullopt) {
    ServiceOptions o;
    o.data_dir = dir;
    o.port = 0;
    o.audit_interval = std::chrono::milliseconds(0);
    o.crash_after_bytes = crash;
    service_ = std::make_unique<AdvisorService>(o);
    service_->bind();
    thread_ = std::thread([this] { service_->run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", service_->port());
    for (int i = 0; i < 100 && !client_->Get("/v1/health"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ~Running() {
    service_->stop();
    thread_.join();
  }
  httplib::Client& client() { return *client_; }
  AdvisorService& service() { return *service_; }

  httplib::Result post(const std::string& path, const json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

 private:
  std::unique_ptr<AdvisorService> service_;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

json body_of(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST(Service, HealthAndCreate) {
  TempDir dir;
  Running s(dir.path());
  auto health = s.client().Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(body_of(health)["status"], "ok");

  auto created = s.post("/v1/campaigns", json::parse(kDeclaration));
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  EXPECT_EQ(created->get_header_value("Location"), "/v1/campaigns/cat");
  EXPECT_EQ(body_of(created)["n"], 0);
  EXPECT_EQ(s.post("/v1/campaigns", json::parse(kDeclaration))->status, 409);
  EXPECT_TRUE(fs::exists(dir.path() / "cat.jsonl"));
}

TEST(Service, ObservationLifecycle) {
  TempDir dir;
  Running s(dir.path());
  s.post("/v1/campaigns", json::parse(kDeclaration));
  auto obs = s.post("/v1/campaigns/cat/observations", {{"candidate", "x3"}, {"outcome", 19}, {"event_key", "run-1"}});
  ASSERT_EQ(obs->status, 201);
  const json summary = body_of(obs);
  EXPECT_EQ(summary["n"], 1);
  EXPECT_NEAR(summary["theta"][0].get<double>(), 19.625, 1e-12);
  EXPECT_NEAR(summary["theta"][2].get<double>(), 20.125, 1e-12);
  EXPECT_EQ(summary["duplicate"], false);

  auto dup = s.post("/v1/campaigns/cat/observations", {{"candidate", "x1"}, {"outcome", 5}, {"event_key", "run-1"}});
  EXPECT_EQ(dup->status, 200);
  EXPECT_EQ(body_of(dup)["duplicate"], true);
  EXPECT_EQ(body_of(dup)["n"], 1);

  s.post("/v1/campaigns/cat/observations", {{"candidate", "x1"}, {"outcome", 21}});
  s.post("/v1/campaigns/cat/observations", {{"candidate", "x2"}, {"outcome", 15}});
  auto over = s.post("/v1/campaigns/cat/observations", {{"candidate", "x2"}, {"outcome", 15}});
  EXPECT_EQ(over->status, 409);
  EXPECT_EQ(body_of(over)["code"], "conflict");
}

TEST(Service, ErrorMapping) {
  TempDir dir;
  Running s(dir.path());
  s.post("/v1/campaigns", json::parse(kDeclaration));
  auto malformed = s.client().Post("/v1/campaigns/cat/observations", "{nope", "application/json");
  EXPECT_EQ(malformed->status, 400);
  EXPECT_EQ(body_of(malformed)["code"], "malformed_json");
  EXPECT_EQ(s.client().Get("/v1/campaigns/missing")->status, 404);
  EXPECT_EQ(s.client().Get("/v1/elsewhere")->status, 404);
  EXPECT_EQ(s.post("/v1/campaigns/cat/observations", {{"candidate", "zz"}, {"outcome", 1}})->status, 404);
  auto bad_outcome = s.post("/v1/campaigns/cat/observations", {{"candidate", "x1"}, {"outcome", "inf"}});
  EXPECT_EQ(bad_outcome->status, 422);

  json bad = json::parse(kDeclaration);
  bad["id"] = "bad";
  bad["prior"]["covariance"][1][1] = -7;
  auto invalid = s.post("/v1/campaigns", bad);
  EXPECT_EQ(invalid->status, 422);
  EXPECT_EQ(body_of(invalid)["field_path"], "prior.covariance");

  auto surface = s.client().Get("/v1/campaigns/cat/surface");
  EXPECT_EQ(surface->status, 422);
  EXPECT_EQ(body_of(surface)["code"], "unsupported_representation");
  EXPECT_EQ(s.client().Get("/v1/campaigns/cat/risk?sims=abc")->status, 422);
}

TEST(Service, ReadEndpointsDoNotMutate) {
  TempDir dir;
  Running s(dir.path());
  s.post("/v1/campaigns", json::parse(kDeclaration));
  s.post("/v1/campaigns/cat/observations", {{"candidate", "x2"}, {"outcome", 17}});
  const json before = body_of(s.client().Get("/v1/campaigns/cat"));
  auto rec = s.client().Get("/v1/campaigns/cat/recommendation");
  ASSERT_EQ(rec->status, 200);
  EXPECT_EQ(body_of(rec), body_of(s.client().Get("/v1/campaigns/cat/recommendation")));
  auto risk = s.client().Get("/v1/campaigns/cat/risk?sims=200&bins=5");
  ASSERT_EQ(risk->status, 200);
  EXPECT_EQ(body_of(risk)["histogram"].size(), 5u);
  auto exported = s.client().Get("/v1/campaigns/cat/export");
  ASSERT_EQ(exported->status, 200);
  const json after = body_of(s.client().Get("/v1/campaigns/cat"));
  EXPECT_EQ(before["log_hash"], after["log_hash"]);
  EXPECT_EQ(before["n"], after["n"]);
}

TEST(Service, GridSurfaceJsonAndCsv) {
  TempDir dir;
  Running s(dir.path());
  json d = json::parse(kDeclaration);
  d["id"] = "grid";
  d["candidates"] = json::array({{{"name", "x1"}, {"coords", {0, 0}}},
                                 {{"name", "x2"}, {"coords", {0, 1}}},
                                 {{"name", "x3"}, {"coords", {1, 0}}}});
  ASSERT_EQ(s.post("/v1/campaigns", d)->status, 201);
  auto js = s.client().Get("/v1/campaigns/grid/surface");
  ASSERT_EQ(js->status, 200);
  EXPECT_EQ(body_of(js)["dimension"], 2);
  auto csv = s.client().Get("/v1/campaigns/grid/surface?format=csv");
  ASSERT_EQ(csv->status, 200);
  EXPECT_EQ(csv->body.substr(0, csv->body.find('\n')), "candidate,x,y,theta,sigma,nu,nu_online,stderr");
}

TEST(Service, RestartReplaysAndImports) {
  TempDir dir, other;
  std::string exported;
  json summary;
  {
    Running s(dir.path());
    s.post("/v1/campaigns", json::parse(kDeclaration));
    s.post("/v1/campaigns/cat/observations", {{"candidate", "x3"}, {"outcome", 19}});
    s.post("/v1/campaigns/cat/observations", {{"candidate", "x1"}, {"outcome", 18}});
    summary = body_of(s.client().Get("/v1/campaigns/cat"));
    exported = s.client().Get("/v1/campaigns/cat/export")->body;
  }
  {
    Running s(dir.path());
    EXPECT_EQ(body_of(s.client().Get("/v1/campaigns/cat")), summary);
    EXPECT_TRUE(s.service().audit_now().empty());
  }
  Running t(other.path());
  auto imported = t.client().Post("/v1/campaigns", exported, "application/x-ndjson");
  ASSERT_EQ(imported->status, 201);
  EXPECT_EQ(body_of(imported)["belief"], summary["belief"]);
  EXPECT_EQ(t.client().Get("/v1/campaigns/cat/export")->body, exported);
}

TEST(Service, CrashDuringAppendRecovers) {
  TempDir dir;
  { Running s(dir.path()); s.post("/v1/campaigns", json::parse(kDeclaration)); }
  {
    Running s(dir.path(), 10);
    auto r = s.post("/v1/campaigns/cat/observations", {{"candidate", "x1"}, {"outcome", 1}});
    EXPECT_EQ(r->status, 500);
  }
  Running s(dir.path());
  const json c = body_of(s.client().Get("/v1/campaigns/cat"));
  EXPECT_EQ(c["n"], 0);
  EXPECT_EQ(s.post("/v1/campaigns/cat/observations", {{"candidate", "x1"}, {"outcome", 1}})->status, 201);
}

TEST(Service, ConcurrentPostsAreLinearized) {
  TempDir dir;
  Running s(dir.path());
  json d = json::parse(kDeclaration);
  d["budget"] = 24;
  s.post("/v1/campaigns", d);
  std::vector<std::thread> threads;
  std::atomic<int> created{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", s.service().port());
      for (int i = 0; i < 6; ++i) {
        auto r = c.Post("/v1/campaigns/cat/observations", json{{"index", (t + i) % 3}, {"outcome", i}}.dump(),
                        "application/json");
        if (r && r->status == 201) ++created;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(created.load(), 24);
  const json c = body_of(s.client().Get("/v1/campaigns/cat"));
  EXPECT_EQ(c["n"], 24);
  EXPECT_TRUE(s.service().audit_now().empty());
}

TEST(Service, AdviseMatchesHttpRecommendation) {
  TempDir dir;
  Running s(dir.path());
  s.post("/v1/campaigns", json::parse(kDeclaration));
  s.post("/v1/campaigns/cat/observations", {{"candidate", "x2"}, {"outcome", 14}});
  const json http = body_of(s.client().Get("/v1/campaigns/cat/recommendation"));
  const std::string cmd = std::string(OPTILEARN_BINARY) + " advise --format json " + (dir.path() / "cat.jsonl").string();
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  EXPECT_EQ(WEXITSTATUS(::pclose(pipe)), 0);
  EXPECT_EQ(json::parse(out), http);
}

TEST(Service, OptionsFromJson) {
  const auto o = optilearn::service_options_from_json(json::parse(R"({"port": 0, "data_dir": "d", "audit_interval_seconds": 1.5})"));
  EXPECT_EQ(o.port, 0);
  EXPECT_EQ(o.data_dir, "d");
  EXPECT_EQ(o.audit_interval.count(), 1500);
  EXPECT_THROW(optilearn::service_options_from_json(json::parse(R"({"prot": 1})")), optilearn::ConfigError);
  EXPECT_THROW(optilearn::service_options_from_json(json::parse(R"({"port": 70000})")), optilearn::ConfigError);
}
