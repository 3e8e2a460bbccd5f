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

#include "optilearn/config.hpp"

#include <algorithm>
#include <set>

#include "optilearn/errors.hpp"
#include "optilearn/json_util.hpp"

namespace optilearn {

namespace {

namespace ju = json_util;
using nlohmann::json;

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

int positive_int(const json& doc, const std::string& key, int fallback, int minimum) {
  const auto v = ju::integer_or(doc, key, fallback, "");
  if (v < minimum || v > 100000000) throw ConfigError(key + ": must be >= " + std::to_string(minimum), key);
  return static_cast<int>(v);
}

RunConfig parse_document(const json& doc, std::optional<std::uint64_t> seed_override) {
  if (!doc.is_object()) throw ConfigError("run configuration must be a JSON object");
  static const std::set<std::string> kKnown = {"problem",   "policies",   "budget",    "replications",
                                               "repetitions", "objective", "threshold", "budgets",
                                               "seed",      "confidence", "histogram_bins", "tuning",
                                               "output",    "description"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKnown.count(key)) throw ConfigError(key + ": unknown configuration key '" + key + "'", key);
  }

  RunConfig c;
  c.problem = ju::require(doc, "problem", "");
  (void)build_problem(c.problem, "problem");

  const json& policies = ju::require(doc, "policies", "");
  if (!policies.is_array() || policies.empty()) throw ConfigError("policies: expected a nonempty array", "policies");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const std::string p = ju::index("policies", i);
    PolicyConfig policy = policy_from_json(policies[i], p);
    if (!labels.insert(policy.label()).second) {
      throw ConfigError(p + ": duplicate policy label '" + policy.label() + "' (set a distinct id)", p);
    }
    c.policies.push_back(std::move(policy));
  }

  c.budget = positive_int(doc, "budget", 20, 1);
  c.replications = positive_int(doc, "replications", 1000, 1);
  c.repetitions = positive_int(doc, "repetitions", 1, 1);
  c.histogram_bins = positive_int(doc, "histogram_bins", 20, 1);
  if (doc.contains("objective")) {
    try {
      c.objective = objective_from_string(ju::as_string(doc["objective"], "objective"));
    } catch (const ConfigError& e) {
      if (!e.field_path().empty()) throw;
      throw ConfigError(std::string("objective: ") + e.what(), "objective");
    }
  }
  if (doc.contains("threshold") && !doc["threshold"].is_null()) c.threshold = ju::as_number(doc["threshold"], "threshold");
  if (doc.contains("budgets")) {
    const json& b = doc["budgets"];
    if (!b.is_array() || b.empty()) throw ConfigError("budgets: expected a nonempty array of integers", "budgets");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto v = ju::as_integer(b[i], ju::index("budgets", i));
      if (v < 0) throw ConfigError(ju::index("budgets", i) + ": must be >= 0", ju::index("budgets", i));
      c.budgets.push_back(static_cast<int>(v));
    }
  }
  if (doc.contains("seed")) c.seed = ju::as_seed(doc["seed"], "seed");
  if (seed_override) c.seed = *seed_override;
  else if (!doc.contains("seed")) throw ConfigError("seed: missing required field (no wall-clock default)", "seed");
  c.confidence = ju::number_or(doc, "confidence", 0.95, "");
  if (!(c.confidence > 0 && c.confidence < 1)) throw ConfigError("confidence: must lie in (0, 1)", "confidence");

  if (doc.contains("tuning")) {
    const json& t = doc["tuning"];
    TuningConfig tuning;
    tuning.policy = policy_from_json(ju::require(t, "policy", "tuning"), "tuning.policy");
    const json& grid = ju::require(t, "grid", "tuning");
    if (!grid.is_object() || grid.empty()) throw ConfigError("tuning.grid: expected a nonempty object", "tuning.grid");
    for (const auto& [name, values] : grid.items()) {
      const std::string p = ju::join("tuning.grid", name);
      const VectorXd v = ju::as_vector(values, p);
      if (v.size() == 0) throw ConfigError(p + ": needs at least one value", p);
      PolicyConfig probe = tuning.policy;
      try {
        set_tunable(probe, name, v[0]);
      } catch (const ConfigError& e) {
        throw ConfigError(p + ": " + e.what(), p);
      }
      tuning.grid.axes[name] = std::vector<double>(v.data(), v.data() + v.size());
    }
    c.tuning = std::move(tuning);
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    if (!o.is_object()) throw ConfigError("output: expected an object", "output");
    for (const auto& [key, value] : o.items()) {
      const std::string p = ju::join("output", key);
      if (key == "dir") c.output.dir = ju::as_string(value, p);
      else if (key == "format") c.output.format = ju::as_string(value, p);
      else if (key == "traces") c.output.traces = static_cast<int>(ju::as_integer(value, p));
      else throw ConfigError(p + ": unknown output option '" + key + "'", p);
    }
    if (c.output.format != "csv" && c.output.format != "json" && c.output.format != "both") {
      throw ConfigError("output.format: expected csv, json or both", "output.format");
    }
  }
  return c;
}

}  // namespace

EvaluationOptions RunConfig::evaluation_options(int parallel) const {
  EvaluationOptions o;
  o.budget = budget;
  o.replications = replications;
  o.repetitions = repetitions;
  o.seed = seed;
  o.threshold = threshold.value_or(-std::numeric_limits<double>::infinity());
  o.parallel = parallel;
  o.confidence = confidence;
  o.keep_traces = output.traces;
  return o;
}

RunConfig parse_run_config(const std::string& text, std::optional<std::uint64_t> seed_override) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_of_byte(text, e.byte == 0 ? 0 : e.byte - 1)) +
                      ": malformed JSON: " + e.what());
  }
  try {
    return parse_document(doc, seed_override);
  } catch (const Error& e) {
    std::string path = e.field_path();
    std::size_t line = 0;
    while (line == 0 && !path.empty()) {
      line = ju::locate_line(text, path);
      if (line != 0) break;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) break;
      path = path.substr(0, cut);
    }
    const std::string prefix = line != 0 ? "line " + std::to_string(line) + ": " : "";
    throw ConfigError(prefix + e.what(), e.field_path());
  }
}

nlohmann::json to_json(const RunConfig& c) {
  json doc;
  doc["problem"] = c.problem;
  doc["policies"] = json::array();
  for (const auto& p : c.policies) doc["policies"].push_back(to_json(p));
  doc["budget"] = c.budget;
  doc["replications"] = c.replications;
  doc["repetitions"] = c.repetitions;
  doc["objective"] = std::string(to_string(c.objective));
  if (c.threshold) doc["threshold"] = json_util::number(*c.threshold);
  if (!c.budgets.empty()) doc["budgets"] = c.budgets;
  doc["seed"] = c.seed;
  doc["confidence"] = c.confidence;
  doc["histogram_bins"] = c.histogram_bins;
  if (c.tuning) {
    doc["tuning"]["policy"] = to_json(c.tuning->policy);
    for (const auto& [name, values] : c.tuning->grid.axes) doc["tuning"]["grid"][name] = values;
  }
  return doc;
}

}  // namespace optilearn
