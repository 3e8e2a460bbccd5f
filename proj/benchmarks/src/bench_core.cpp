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

#include <numeric>

#include <benchmark/benchmark.h>
#include <nlohmann/json.hpp>

#include "optilearn/belief.hpp"
#include "optilearn/evaluation.hpp"
#include "optilearn/knowledge_gradient.hpp"
#include "optilearn/problems.hpp"

using namespace optilearn;

namespace {

Problem grid(int side) {
  return build_problem({{"family", "grid-2d-exponential"}, {"params", {{"grid_size", side}}}});
}

Problem gaussian(int m) {
  return build_problem({{"family", "independent-gaussian"}, {"params", {{"alternatives", m}}}});
}

std::vector<std::size_t> all(std::size_t m) {
  std::vector<std::size_t> v(m);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

static void BM_UpdateCorrelated(benchmark::State& state) {
  const auto prior = std::get<CorrelatedGaussianBelief>(grid(static_cast<int>(state.range(0))).prior());
  for (auto _ : state) benchmark::DoNotOptimize(update_correlated(prior, 0, 0.5));
  state.SetLabel(std::to_string(prior.size()) + " alternatives");
}
BENCHMARK(BM_UpdateCorrelated)->Arg(5)->Arg(10)->Arg(21);

static void BM_UpdateIndependent(benchmark::State& state) {
  const auto prior = std::get<IndependentGaussianBelief>(gaussian(static_cast<int>(state.range(0))).prior());
  for (auto _ : state) benchmark::DoNotOptimize(update_independent(prior, 0, 0.5));
}
BENCHMARK(BM_UpdateIndependent)->Arg(10)->Arg(1000);

static void BM_UpdateLinear(benchmark::State& state) {
  const Problem p = build_problem({{"family", "linear-qsar"}});
  const auto prior = std::get<LinearGaussianBelief>(p.prior());
  for (auto _ : state) benchmark::DoNotOptimize(update_linear(prior, prior.designs[3], 0.2));
}
BENCHMARK(BM_UpdateLinear);

static void BM_KgClosedForm(benchmark::State& state) {
  const auto prior = std::get<IndependentGaussianBelief>(gaussian(static_cast<int>(state.range(0))).prior());
  for (auto _ : state) {
    for (std::size_t x = 0; x < prior.size(); ++x) benchmark::DoNotOptimize(kg_independent(prior, x));
  }
}
BENCHMARK(BM_KgClosedForm)->Arg(10)->Arg(100);

static void BM_KgMonteCarlo(benchmark::State& state) {
  const Problem p = build_problem({{"family", "correlated-catalysts"}});
  const auto candidates = all(p.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(kg_monte_carlo_all(p.prior(), candidates, static_cast<std::size_t>(state.range(0)), 7));
  }
}
BENCHMARK(BM_KgMonteCarlo)->Arg(1000)->Arg(10000);

static void BM_KgSampled(benchmark::State& state) {
  const Problem p = build_problem({{"family", "logistic-binary"}});
  const auto candidates = all(p.size());
  for (auto _ : state) benchmark::DoNotOptimize(kg_monte_carlo_all(p.prior(), candidates, 500, 7));
}
BENCHMARK(BM_KgSampled);

static void BM_EvaluatePolicy(benchmark::State& state) {
  const Problem p = gaussian(10);
  PolicyConfig kg;
  kg.kind = PolicyKind::kKgOffline;
  EvaluationOptions o;
  o.budget = 20;
  o.replications = 100;
  o.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_policy(kg, p, o));
}
BENCHMARK(BM_EvaluatePolicy)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
