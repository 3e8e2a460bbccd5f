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

// Event-sourced experiment campaigns.
//
// A campaign document is JSON lines: the first line declares the prior, candidates,
// budget, policy, objective and threshold; each further line is an event. Observation
// events carry n = 1, 2, ... in order; decision events record a manual choice at the
// current n. The current belief is always the fold of belief updates over the
// observation events, so a document fully determines its campaign.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optilearn/belief.hpp"
#include "optilearn/evaluation.hpp"
#include "optilearn/knowledge_gradient.hpp"
#include "optilearn/policies.hpp"

namespace optilearn {

inline constexpr int kCampaignSchemaVersion = 1;

struct CampaignDeclaration {
  std::string id;
  BeliefState prior;
  /// Grid coordinates per candidate, or empty when candidates have none.
  std::vector<VectorXd> coordinates;
  int budget = 1;
  PolicyConfig policy;
  ObjectiveMode objective = ObjectiveMode::kFinal;
  std::optional<double> threshold;
  std::uint64_t seed = 0;
  int repetitions = 1;
  std::string created_at;
};

struct CampaignEvent {
  enum class Type { kObservation, kDecision };
  Type type = Type::kObservation;
  int n = 0;
  std::string candidate;
  double outcome = 0.0;  // observations only
  std::string note;
  std::string event_key;
  std::string recorded_at;
  std::optional<double> duration;
  std::optional<double> cost;
};

/// Parses a declaration line or request body; errors are ConfigError with field paths.
CampaignDeclaration parse_declaration(const nlohmann::json& doc);
nlohmann::json to_json(const CampaignDeclaration& declaration);

class Campaign {
 public:
  /// New campaign at n = 0. The declaration line is the canonical dump of `declaration`.
  static Campaign create(const CampaignDeclaration& declaration);

  /// Replays a document. A final line missing its newline that fails to parse is treated
  /// as a torn write and dropped (reported through `dropped_tail`). Any other bad line
  /// throws ConfigError naming it ("line L: ...").
  static Campaign from_document(const std::string& text, bool* dropped_tail = nullptr);

  const CampaignDeclaration& declaration() const { return declaration_; }
  const std::string& id() const { return declaration_.id; }
  const BeliefState& belief() const { return belief_; }
  int n() const { return n_; }
  int budget() const { return declaration_.budget; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<CampaignEvent>& events() const { return events_; }
  const std::vector<std::string>& lines() const { return lines_; }
  /// Lines joined with '\n', each terminated.
  std::string document() const;
  bool binary() const;

  /// Finds an event already recorded with this key.
  const CampaignEvent* find_event(const std::string& event_key) const;

  /// Validates an observation request and returns the event line that would record it.
  /// Throws NotFoundError (unknown candidate), ConflictError (budget exhausted) or
  /// InputError (bad outcome).
  std::string prepare_observation(const nlohmann::json& body, const std::string& recorded_at) const;
  std::string prepare_decision(const nlohmann::json& body, const std::string& recorded_at) const;

  /// Applies one event line; the same path serves live appends and replay.
  void apply_line(const std::string& line, std::size_t line_number);

 private:
  CampaignDeclaration declaration_;
  BeliefState belief_;
  int n_ = 0;
  std::vector<int> counts_;
  std::vector<CampaignEvent> events_;
  std::vector<std::string> lines_;
  std::map<std::string, std::size_t> keys_;
};

nlohmann::json campaign_summary(const Campaign& campaign);

struct RecommendationRow {
  std::size_t index = 0;
  std::string candidate;
  double theta = 0.0;
  double sigma = 0.0;
  double nu_kg = 0.0;
  double nu_online = 0.0;
  double score = 0.0;
  int rank = 0;
};

struct Recommendation {
  std::string campaign_id;
  std::string policy;
  int n = 0;
  int budget = 0;
  bool budget_exhausted = false;
  std::size_t pick = 0;
  std::vector<RecommendationRow> rows;  // ordered by rank
};

/// Seed shared by every KG evaluation of a campaign at iteration n.
std::uint64_t campaign_kg_seed(const Campaign& campaign);

Recommendation recommend(const Campaign& campaign);
nlohmann::json to_json(const Recommendation& recommendation);
std::string to_text(const Recommendation& recommendation);

struct CampaignSurface {
  std::string campaign_id;
  int n = 0;
  std::vector<std::string> candidates;
  std::vector<VectorXd> coordinates;
  std::vector<SurfaceRow> rows;
};

/// UnsupportedBeliefError when the candidates have no 1-D or 2-D grid coordinates.
CampaignSurface campaign_surface(const Campaign& campaign);
nlohmann::json to_json(const CampaignSurface& surface);
std::string to_csv(const CampaignSurface& surface);

struct RiskForecast {
  std::string campaign_id;
  int n = 0;
  int remaining = 0;
  double threshold = 0.0;
  int simulations = 0;
  Estimate probability;
  Histogram histogram;
};

/// Simulates the remaining N - n steps of the campaign policy from the current posterior.
/// ConflictError when no threshold is configured.
RiskForecast forecast_risk(const Campaign& campaign, int simulations, int bins = 20);
nlohmann::json to_json(const RiskForecast& forecast);

std::string utc_timestamp();

struct StoreOptions {
  std::filesystem::path directory;
  std::function<std::string()> clock = utc_timestamp;
  /// Test hook: when set, an append writes only this many bytes of the line and then
  /// throws, imitating a crash in the middle of a write.
  std::optional<std::size_t> crash_after_bytes;
};

struct StoreIssue {
  std::string campaign_id;
  std::string message;
};

struct ObservationResult {
  std::shared_ptr<const Campaign> campaign;
  CampaignEvent event;
  bool duplicate = false;
};

/// Directory of campaign logs (<id>.jsonl), loaded and replayed on construction.
/// Mutations are serialized per campaign; readers get immutable snapshots.
class CampaignStore {
 public:
  explicit CampaignStore(StoreOptions options);

  std::shared_ptr<const Campaign> create(const nlohmann::json& declaration);
  std::shared_ptr<const Campaign> import_document(const std::string& text);
  std::shared_ptr<const Campaign> get(const std::string& id) const;
  ObservationResult record_observation(const std::string& id, const nlohmann::json& body);
  ObservationResult record_decision(const std::string& id, const nlohmann::json& body);
  std::string export_document(const std::string& id) const;
  std::vector<std::string> ids() const;

  /// Replays every log from disk and compares with the in-memory state.
  std::vector<StoreIssue> audit() const;
  /// Problems found while loading (dropped torn tails, unreadable logs).
  const std::vector<StoreIssue>& load_issues() const { return load_issues_; }

 private:
  struct Entry {
    std::mutex write;
    mutable std::mutex snapshot_mutex;
    std::shared_ptr<const Campaign> current;
    std::filesystem::path file;

    std::shared_ptr<const Campaign> snapshot() const;
    void publish(std::shared_ptr<const Campaign> next);
  };

  std::shared_ptr<Entry> entry(const std::string& id) const;
  std::shared_ptr<const Campaign> insert(Campaign campaign);
  ObservationResult append_event(const std::string& id, const nlohmann::json& body, bool observation);
  void append_line(const std::filesystem::path& file, const std::string& line) const;
  std::string next_id(const nlohmann::json& declaration);

  StoreOptions options_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
  std::vector<StoreIssue> load_issues_;
  std::uint64_t id_counter_ = 0;
};

}  // namespace optilearn
