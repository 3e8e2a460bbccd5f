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

// Decision rules X^pi(S^n): map a belief state plus counters and budget to the next
// alternative. Deterministic policies are pure functions of (context, tunables);
// stochastic ones additionally consume an explicit random stream.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "optilearn/belief.hpp"
#include "optilearn/knowledge_gradient.hpp"
#include "optilearn/rng.hpp"

namespace optilearn {

enum class PolicyKind {
  kExploitation,
  kExploration,
  kBoltzmann,
  kIntervalEstimation,
  kUcb,
  kThompson,
  kBayesGreedy,
  kParametricCfa,
  kKgOffline,
  kKgOnline,
  kGittins,
};

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

enum class TieBreak { kLowestIndex, kRandom };

/// Features available to the parametric CFA, evaluated per alternative.
enum class CfaFeature {
  kSigma,          // sigma^n_x
  kVariance,       // (sigma^n_x)^2
  kInverseCount,   // 1 / (1 + N^n_x)
  kUcbBonus,       // sqrt(ln n / N^n_x), +inf when N^n_x = 0
  kRemaining,      // N - n
  kSigmaRemaining, // sigma^n_x * (N - n)
  kKnowledgeGradient,
};

std::string_view to_string(CfaFeature feature);
CfaFeature cfa_feature_from_string(std::string_view name);

/// Caller-supplied Gittins table Gamma(s, gamma) on a grid of s = sigma / sigma^W for one
/// discount factor, linearly interpolated and clamped at the ends.
struct GittinsTable {
  double discount = 0.9;
  std::vector<double> s;
  std::vector<double> gamma;

  double operator()(double s_value) const;
  void validate() const;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kExploitation;
  std::string id;
  double theta_ie = 2.0;
  double boltzmann_beta = 1.0;
  double theta_ucb = 1.0;
  std::vector<double> cfa_coefficients;
  std::vector<CfaFeature> cfa_features;
  KgOptions kg;
  GittinsTable gittins;
  /// Exploration variant drawing uniformly among the least-measured alternatives.
  bool without_replacement = false;
  TieBreak tie_break = TieBreak::kLowestIndex;

  /// Label used in reports: id if set, else the kind name.
  std::string label() const;
  void validate() const;
};

PolicyConfig policy_from_json(const nlohmann::json& doc, const std::string& path);
nlohmann::json to_json(const PolicyConfig& policy);

/// Sets a named tunable (theta_ie, boltzmann_beta, theta_ucb, cfa_coefficients[i], samples, k_max).
void set_tunable(PolicyConfig& policy, const std::string& name, double value);

struct DecisionContext {
  const BeliefState* belief = nullptr;
  std::vector<int> counts;  // N^n_x
  int iteration = 0;        // n
  int budget = 0;           // N
  /// U(S^n, x) override; defaults to the point estimates theta^n_x.
  std::optional<VectorXd> utility;

  static DecisionContext fresh(const BeliefState& belief, int budget);
  VectorXd utilities() const;
  void validate() const;
};

/// Streams consumed by stochastic policies and random tie breaking.
struct PolicyStreams {
  explicit PolicyStreams(std::uint64_t seed);
  RandomStream draws;
  RandomStream ties;
};

/// argmax with the lowest-index tie rule, or a uniform pick among ties from `ties`.
std::size_t argmax(const VectorXd& scores, TieBreak rule = TieBreak::kLowestIndex, RandomStream* ties = nullptr);

std::size_t pure_exploitation(const DecisionContext& ctx);
std::size_t pure_exploration(const DecisionContext& ctx, RandomStream& rng);
VectorXd boltzmann_probabilities(const VectorXd& utilities, double beta);
std::size_t boltzmann(const DecisionContext& ctx, double beta, RandomStream& rng);
VectorXd interval_estimation_scores(const DecisionContext& ctx, double theta_ie);
std::size_t interval_estimation(const DecisionContext& ctx, double theta_ie);
VectorXd ucb_scores(const DecisionContext& ctx, double theta_ucb);
std::size_t ucb(const DecisionContext& ctx, double theta_ucb);
std::size_t thompson(const DecisionContext& ctx, RandomStream& rng);
std::size_t bayes_greedy(const DecisionContext& ctx);
VectorXd parametric_cfa_scores(const DecisionContext& ctx, const std::vector<double>& coefficients,
                               const std::vector<CfaFeature>& features);
std::size_t parametric_cfa(const DecisionContext& ctx, const std::vector<double>& coefficients,
                           const std::vector<CfaFeature>& features);
VectorXd gittins_scores(const DecisionContext& ctx, const GittinsTable& table);

/// Deterministic scores the policy ranks by: utilities, index values, KG values, Boltzmann
/// probabilities; Monte-Carlo estimates of P(x is best) for Thompson; 1/M for exploration.
VectorXd policy_scores(const PolicyConfig& policy, const DecisionContext& ctx, std::uint64_t seed);

/// X^pi(S^n). Throws ConfigError when the policy cannot act on the belief representation.
std::size_t decide(const PolicyConfig& policy, const DecisionContext& ctx, PolicyStreams& streams);

/// Throws ConfigError if the policy cannot operate on the belief (checked before step 1).
void check_compatible(const PolicyConfig& policy, const BeliefState& belief);

}  // namespace optilearn
