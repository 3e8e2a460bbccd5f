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

// Policy evaluation: episodes, final and cumulative objectives, threshold risk, paired
// comparisons with common random numbers, and grid tuning.
//
// Replication i draws its truth, observation noise, policy randomness and design
// evaluation repetitions from four streams derived from (master seed, i). Every policy
// sees the same truth and noise streams, and parallel runs aggregate in index order, so
// a report is a pure function of (configuration, master seed).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optilearn/belief.hpp"
#include "optilearn/policies.hpp"
#include "optilearn/problems.hpp"
#include "optilearn/rng.hpp"

namespace optilearn {

enum class ObjectiveMode { kFinal, kCumulative };
std::string_view to_string(ObjectiveMode mode);
ObjectiveMode objective_from_string(std::string_view name);

struct StepRecord {
  int n = 0;                 // decision made from S^n
  std::size_t alternative = 0;
  double outcome = 0.0;      // W^{n+1}
  double theta = 0.0;        // theta^{n+1} of the measured alternative
  double sigma = 0.0;        // posterior std of the measured alternative after the update
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;
  BeliefState final_belief;
  std::size_t final_design = 0;  // argmax of theta^N
  TruthDraw truth;
  double cumulative_reward = 0.0;
};

/// Called with (replication, step, primitive noise draw) for every observation.
using NoiseObserver = std::function<void(std::size_t, int, double)>;

struct EpisodeStreams {
  RandomStream noise;
  PolicyStreams policy;
};

/// Runs N decide-observe-update steps against a fixed truth from the problem's prior.
EpisodeTrace run_episode(const PolicyConfig& policy, const Problem& problem, int budget, const TruthDraw& truth,
                         EpisodeStreams& streams, const std::function<void(int, double)>& on_noise = {});
/// Convenience overload drawing the truth from a seed.
EpisodeTrace run_episode(const PolicyConfig& policy, const Problem& problem, int budget, std::uint64_t seed);

/// F-bar^avg(x) = (1/J) sum_j F(x, W_j) against the given truth.
double estimate_design_value(std::size_t design, const Problem& problem, const TruthDraw& truth, int repetitions,
                             RandomStream& rng);

struct EvaluationOptions {
  int budget = 20;
  int replications = 1000;
  int repetitions = 1;  // J
  std::uint64_t seed = 0;
  double threshold = -std::numeric_limits<double>::infinity();
  int parallel = 1;
  double confidence = 0.95;
  NoiseObserver noise_observer;
  /// Episodes kept in full for the first this-many replications.
  int keep_traces = 0;
};

struct ReplicationResult {
  std::size_t final_design = 0;
  double final_value = 0.0;   // F-bar^avg(X^{pi,N})
  double true_value = 0.0;    // mu_{X^{pi,N}}
  double best_value = 0.0;    // max_x mu_x
  double opportunity_cost = 0.0;
  double cumulative_reward = 0.0;
  bool success = false;       // final_value >= threshold
};

struct Estimate {
  double mean = 0.0;
  double stddev = 0.0;
  double half_width = 0.0;
  std::size_t count = 0;
};

/// Mean, sample std and z * std / sqrt(I) half-width with z for the confidence level.
Estimate estimate(const std::vector<double>& samples, double confidence = 0.95);

struct EvaluationReport {
  std::string policy;
  ObjectiveMode mode = ObjectiveMode::kFinal;
  int budget = 0;
  int replications = 0;
  int repetitions = 0;
  std::uint64_t seed = 0;
  double threshold = -std::numeric_limits<double>::infinity();
  Estimate final_value;        // F-bar^pi
  Estimate cumulative_reward;  // F-bar^{pi,cum}
  Estimate opportunity_cost;
  Estimate true_value;
  Estimate probability;        // P-bar^pi
  std::vector<ReplicationResult> samples;
  std::vector<EpisodeTrace> traces;

  /// The metric the objective ranks by.
  const Estimate& objective() const { return mode == ObjectiveMode::kFinal ? final_value : cumulative_reward; }
};

EvaluationReport evaluate_policy(const PolicyConfig& policy, const Problem& problem, const EvaluationOptions& options,
                                 ObjectiveMode mode = ObjectiveMode::kFinal);
EvaluationReport evaluate_final(const PolicyConfig& policy, const Problem& problem, const EvaluationOptions& options);
EvaluationReport evaluate_cumulative(const PolicyConfig& policy, const Problem& problem, const EvaluationOptions& options);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

Histogram make_histogram(const std::vector<double>& values, int bins = 20);

struct RiskReport {
  EvaluationReport report;
  Histogram histogram;  // per-replication F-bar^avg(X^{pi,N})
};

RiskReport risk_probability(const PolicyConfig& policy, const Problem& problem, const EvaluationOptions& options,
                            int bins = 20);

struct PairedDifference {
  std::string first;
  std::string second;
  std::string metric;
  Estimate difference;  // first - second, per replication
};

struct Comparison {
  ObjectiveMode mode = ObjectiveMode::kFinal;
  std::vector<EvaluationReport> reports;
  std::vector<PairedDifference> differences;
};

inline const std::vector<std::string> kComparisonMetrics = {"final_value", "cumulative_reward", "opportunity_cost",
                                                            "probability"};

double metric_value(const ReplicationResult& r, const std::string& metric);
const Estimate& metric_estimate(const EvaluationReport& report, const std::string& metric);

/// Paired design: every policy sees identical truth and noise streams per replication.
Comparison compare_policies(const std::vector<PolicyConfig>& policies, const Problem& problem,
                            const EvaluationOptions& options, ObjectiveMode mode = ObjectiveMode::kFinal);

struct TuneGrid {
  /// tunable name -> candidate values; the grid is their Cartesian product.
  std::map<std::string, std::vector<double>> axes;
};

struct TunePoint {
  std::map<std::string, double> values;
  EvaluationReport report;
};

struct TuneResult {
  std::size_t best = 0;
  PolicyConfig best_policy;
  std::vector<TunePoint> table;
};

/// Evaluates every grid point with common random numbers and returns the maximizer of the
/// objective (ties to the first grid point in lexicographic order of tunable names).
TuneResult tune_policy(const PolicyConfig& family, const TuneGrid& grid, const Problem& problem,
                       const EvaluationOptions& options, ObjectiveMode mode = ObjectiveMode::kFinal);

}  // namespace optilearn
