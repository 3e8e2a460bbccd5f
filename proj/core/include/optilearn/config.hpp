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

// Run-configuration document shared by the bench and risk commands.
//
//   {
//     "problem":  {"family": "...", "params": {...}},
//     "policies": [{"kind": "kg_offline", "id": "kg"}, ...],
//     "budget": 20, "replications": 1000, "repetitions": 1,
//     "objective": "final", "threshold": 0.5, "budgets": [10, 20, 40],
//     "seed": 7, "confidence": 0.95, "histogram_bins": 20,
//     "tuning": {"policy": {...}, "grid": {"theta_ie": [0, 1, 2]}},
//     "output": {"dir": "out", "format": "both", "traces": 0}
//   }

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optilearn/evaluation.hpp"
#include "optilearn/policies.hpp"
#include "optilearn/problems.hpp"

namespace optilearn {

struct TuningConfig {
  PolicyConfig policy;
  TuneGrid grid;
};

struct OutputConfig {
  std::string dir = "out";
  std::string format = "both";  // csv | json | both
  int traces = 0;
};

struct RunConfig {
  nlohmann::json problem;
  std::vector<PolicyConfig> policies;
  int budget = 20;
  int replications = 1000;
  int repetitions = 1;
  ObjectiveMode objective = ObjectiveMode::kFinal;
  std::optional<double> threshold;
  std::vector<int> budgets;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  int histogram_bins = 20;
  std::optional<TuningConfig> tuning;
  OutputConfig output;

  EvaluationOptions evaluation_options(int parallel = 1) const;
};

/// Parses and validates a run configuration. Errors are ConfigError whose message begins
/// with "line L:" when the offending field can be located in `text`. `seed_override`
/// satisfies the seed requirement when the document has none.
RunConfig parse_run_config(const std::string& text, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Canonical JSON echo of the parsed configuration (used for hashing and manifests).
nlohmann::json to_json(const RunConfig& config);

}  // namespace optilearn
