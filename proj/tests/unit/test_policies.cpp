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

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "optilearn/errors.hpp"
#include "optilearn/policies.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace optilearn;
using testing_support::independent;
using testing_support::worked_example;

namespace {

PolicyConfig of(PolicyKind kind) {
  PolicyConfig p;
  p.kind = kind;
  return p;
}

SampledBelief two_candidates() {
  SampledBelief b;
  b.alternatives = {"lo", "hi"};
  b.designs = {VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0)};
  b.state = VectorXd::Ones(1);
  b.candidates = {Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(0.0, -1.0)};
  b.probabilities = Eigen::Vector2d(0.5, 0.5);
  return b;
}

}  // namespace

TEST(Argmax, LowestIndexAndRandomTies) {
  const VectorXd s = (VectorXd(4) << 1.0, 3.0, 3.0, 2.0).finished();
  EXPECT_EQ(argmax(s), 1u);
  std::set<std::size_t> seen;
  RandomStream ties(5);
  for (int i = 0; i < 64; ++i) seen.insert(argmax(s, TieBreak::kRandom, &ties));
  EXPECT_EQ(seen, (std::set<std::size_t>{1, 2}));
}

TEST(Exploitation, PicksLargestMean) {
  const BeliefState b = worked_example();
  EXPECT_EQ(pure_exploitation(DecisionContext::fresh(b, 5)), 2u);
  const BeliefState tied = independent({1.0, 1.0, 0.0}, {1.0, 1.0, 1.0}, 1.0);
  EXPECT_EQ(pure_exploitation(DecisionContext::fresh(tied, 5)), 0u);
}

TEST(Exploration, UniformAndWithoutReplacement) {
  const BeliefState b = independent({0, 0, 0, 0}, {1, 1, 1, 1}, 1.0);
  auto ctx = DecisionContext::fresh(b, 100);
  RandomStream rng(3);
  std::vector<int> hits(4, 0);
  for (int i = 0; i < 4000; ++i) ++hits[pure_exploration(ctx, rng)];
  for (int h : hits) EXPECT_NEAR(h, 1000, 120);
  PolicyConfig p = of(PolicyKind::kExploration);
  p.without_replacement = true;
  ctx.counts = {2, 1, 2, 1};
  PolicyStreams streams(9);
  for (int i = 0; i < 50; ++i) {
    const auto x = decide(p, ctx, streams);
    EXPECT_TRUE(x == 1 || x == 3);
  }
}

TEST(Boltzmann, LimitsAndShift) {
  const VectorXd u = (VectorXd(3) << 1.0, 2.0, 0.0).finished();
  const VectorXd flat = boltzmann_probabilities(u, 0.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(flat[i], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(boltzmann_probabilities(u, INFINITY), Eigen::Vector3d(0, 1, 0));
  const VectorXd p = boltzmann_probabilities(u, 1.0);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
  EXPECT_NEAR(p[1] / p[0], std::exp(1.0), 1e-12);
  const VectorXd big = boltzmann_probabilities(u.array() + 1e6, 1.0);
  EXPECT_NEAR((big - p).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_THROW(boltzmann_probabilities(u, -1.0), InputError);
}

TEST(IntervalEstimation, WorkedExampleScores) {
  const BeliefState b = worked_example();
  const auto ctx = DecisionContext::fresh(b, 5);
  const VectorXd s = interval_estimation_scores(ctx, 2.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s[i], oracle::kIeScores[static_cast<std::size_t>(i)], 1e-12);
  EXPECT_EQ(interval_estimation(ctx, 2.0), 2u);
  EXPECT_EQ(interval_estimation(ctx, 0.0), pure_exploitation(ctx));
}

TEST(Ucb, ScoresAndUnmeasuredAlternatives) {
  const BeliefState b = independent({1.0, 2.0, 0.0}, {1.0, 1.0, 1.0}, 1.0);
  auto ctx = DecisionContext::fresh(b, 10);
  ctx.counts = {1, 5, 0};
  ctx.iteration = 6;
  const VectorXd s = ucb_scores(ctx, 1.0);
  EXPECT_NEAR(s[0], oracle::kUcbScore1, 1e-12);
  EXPECT_NEAR(s[1], oracle::kUcbScore2, 1e-12);
  EXPECT_TRUE(std::isinf(s[2]) && s[2] > 0);
  EXPECT_EQ(ucb(ctx, 1.0), 2u);
  const VectorXd zero = ucb_scores(ctx, 0.0);
  EXPECT_EQ(zero[2], 0.0);
  EXPECT_EQ(ucb(ctx, 0.0), 1u);
}

TEST(Thompson, BestProbabilityScores) {
  const BeliefState b = independent({0.0, 1.0}, {1.0, 1.0}, 1.0);
  const auto ctx = DecisionContext::fresh(b, 5);
  const VectorXd s = policy_scores(of(PolicyKind::kThompson), ctx, 17);
  EXPECT_NEAR(s.sum(), 1.0, 1e-12);
  EXPECT_NEAR(s[1], oracle::kThompsonShift1, 0.04);
  RandomStream rng(2);
  int hits = 0;
  for (int i = 0; i < 4000; ++i) hits += thompson(ctx, rng) == 1 ? 1 : 0;
  EXPECT_NEAR(hits / 4000.0, oracle::kThompsonShift1, 0.03);
}

TEST(Gittins, InterpolatedIndex) {
  GittinsTable t;
  t.s = {0.0, 1.0, 2.0};
  t.gamma = {0.0, 0.5, 0.7};
  EXPECT_DOUBLE_EQ(t(0.5), 0.25);
  EXPECT_DOUBLE_EQ(t(5.0), 0.7);
  EXPECT_DOUBLE_EQ(t(-1.0), 0.0);
  const BeliefState b = independent({1.0, 0.5}, {1.0, 0.25}, 1.0);
  const VectorXd s = gittins_scores(DecisionContext::fresh(b, 5), t);
  EXPECT_DOUBLE_EQ(s[0], 1.5);
  EXPECT_DOUBLE_EQ(s[1], 1.2);
  t.s = {1.0, 0.0};
  t.gamma = {0.0, 0.0};
  EXPECT_THROW(t.validate(), InputError);
}

TEST(ParametricCfa, LinearInFeatures) {
  const BeliefState b = independent({1.0, 0.0}, {1.0, 0.25}, 1.0);
  auto ctx = DecisionContext::fresh(b, 10);
  ctx.counts = {3, 0};
  const VectorXd s = parametric_cfa_scores(ctx, {0.5, 2.0}, {CfaFeature::kSigma, CfaFeature::kInverseCount});
  EXPECT_DOUBLE_EQ(s[0], 1.0 + 0.5 * 1.0 + 2.0 * 0.25);
  EXPECT_DOUBLE_EQ(s[1], 0.0 + 0.5 * 2.0 + 2.0 * 1.0);
  EXPECT_THROW(parametric_cfa_scores(ctx, {1.0}, {}), InputError);
}

TEST(KgPolicies, OnlineAtHorizonIsExploitation) {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 50; ++rep) {
    const BeliefState b = independent({n(gen), n(gen), n(gen), n(gen)}, {1.0, 2.0, 0.5, 1.0}, 1.0);
    auto ctx = DecisionContext::fresh(b, 7);
    ctx.iteration = 7;
    PolicyStreams streams(static_cast<std::uint64_t>(rep));
    EXPECT_EQ(decide(of(PolicyKind::kKgOnline), ctx, streams), pure_exploitation(ctx));
  }
}

TEST(KgPolicies, OfflineScoresAreClosedForm) {
  const BeliefState b = independent({0.0, 0.0}, {1.0, 1.0}, 1.0);
  const VectorXd s = policy_scores(of(PolicyKind::kKgOffline), DecisionContext::fresh(b, 3), 0);
  EXPECT_NEAR(s[0], oracle::kKgTwoEqual, 1e-14);
  EXPECT_NEAR(s[1], oracle::kKgTwoEqual, 1e-14);
}

TEST(Compatibility, SampledBeliefsLackStd) {
  const BeliefState s = two_candidates();
  EXPECT_THROW(check_compatible(of(PolicyKind::kIntervalEstimation), s), ConfigError);
  EXPECT_THROW(check_compatible(of(PolicyKind::kGittins), s), ConfigError);
  EXPECT_NO_THROW(check_compatible(of(PolicyKind::kKgOffline), s));
  EXPECT_NO_THROW(check_compatible(of(PolicyKind::kThompson), s));
  PolicyConfig star = of(PolicyKind::kKgOffline);
  star.kg.kg_star = true;
  EXPECT_THROW(check_compatible(star, BeliefState(worked_example())), ConfigError);
}

TEST(PolicyJson, ParsesAndReportsPaths) {
  const auto p = policy_from_json(nlohmann::json::parse(R"({"kind": "interval_estimation", "theta_ie": 1.5, "id": "ie"})"),
                                  "policies[0]");
  EXPECT_EQ(p.kind, PolicyKind::kIntervalEstimation);
  EXPECT_EQ(p.theta_ie, 1.5);
  EXPECT_EQ(p.label(), "ie");
  const auto back = policy_from_json(to_json(p), "p");
  EXPECT_EQ(back.theta_ie, 1.5);
  try {
    policy_from_json(nlohmann::json::parse(R"({"kind": "ucb", "theta": 1})"), "policies[2]");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field_path(), "policies[2].theta");
  }
  try {
    policy_from_json(nlohmann::json::parse(R"({"kind": "clairvoyant"})"), "policies[1]");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field_path(), "policies[1].kind");
  }
}

TEST(Context, ValidatesCounters) {
  const BeliefState b = worked_example();
  auto ctx = DecisionContext::fresh(b, 3);
  ctx.iteration = 4;
  EXPECT_THROW(ctx.validate(), InputError);
  ctx.iteration = 0;
  ctx.counts = {1, 2};
  EXPECT_THROW(ctx.validate(), InputError);
}

TEST(Decide, DeterministicPerSeed) {
  const BeliefState b = worked_example();
  const auto ctx = DecisionContext::fresh(b, 10);
  for (auto kind : {PolicyKind::kBoltzmann, PolicyKind::kThompson, PolicyKind::kExploration, PolicyKind::kKgOffline}) {
    PolicyStreams a(41), c(41);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(decide(of(kind), ctx, a), decide(of(kind), ctx, c));
  }
}
