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

#include "optilearn/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "optilearn/errors.hpp"
#include "optilearn/normal.hpp"

namespace optilearn {

namespace {

enum StreamTag : std::uint64_t { kTruthStream = 1, kNoiseStream = 2, kPolicyStream = 3, kDesignStream = 4 };

// Runs body(i) for i in [0, count) on up to `threads` workers; rethrows the first failure.
template <class Body>
void parallel_for(std::size_t count, int threads, Body body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(ObjectiveMode mode) { return mode == ObjectiveMode::kFinal ? "final" : "cumulative"; }

ObjectiveMode objective_from_string(std::string_view name) {
  if (name == "final") return ObjectiveMode::kFinal;
  if (name == "cumulative") return ObjectiveMode::kCumulative;
  throw ConfigError("unknown objective '" + std::string(name) + "' (expected final or cumulative)");
}

EpisodeTrace run_episode(const PolicyConfig& policy, const Problem& problem, int budget, const TruthDraw& truth,
                         EpisodeStreams& streams, const std::function<void(int, double)>& on_noise) {
  if (budget < 0) throw InputError("budget must be >= 0", "budget");
  check_compatible(policy, problem.prior());

  EpisodeTrace trace;
  trace.truth = truth;
  BeliefState belief = problem.prior();
  DecisionContext ctx = DecisionContext::fresh(belief, budget);
  trace.steps.reserve(static_cast<std::size_t>(budget));
  for (int n = 0; n < budget; ++n) {
    ctx.belief = &belief;
    ctx.iteration = n;
    const std::size_t x = decide(policy, ctx, streams.policy);
    const double draw = problem.noise_draw(streams.noise);
    if (on_noise) on_noise(n, draw);
    const double w = problem.outcome_from_draw(truth, x, draw);
    belief = update(belief, x, w);
    ++ctx.counts[x];
    trace.cumulative_reward += w;

    StepRecord step;
    step.n = n;
    step.alternative = x;
    step.outcome = w;
    step.theta = point_estimates(belief)[static_cast<Eigen::Index>(x)];
    step.sigma = truth_stddevs(belief)[static_cast<Eigen::Index>(x)];
    trace.steps.push_back(step);
  }
  trace.final_design = argmax(point_estimates(belief));
  trace.final_belief = std::move(belief);
  return trace;
}

EpisodeTrace run_episode(const PolicyConfig& policy, const Problem& problem, int budget, std::uint64_t seed) {
  RandomStream truth_rng(derive_seed(seed, {0, kTruthStream}));
  EpisodeStreams streams{RandomStream(derive_seed(seed, {0, kNoiseStream})),
                         PolicyStreams(derive_seed(seed, {0, kPolicyStream}))};
  return run_episode(policy, problem, budget, problem.sample_truth(truth_rng), streams);
}

double estimate_design_value(std::size_t design, const Problem& problem, const TruthDraw& truth, int repetitions,
                             RandomStream& rng) {
  if (repetitions < 1) throw InputError("repetitions J must be >= 1", "repetitions");
  double mean = 0.0;
  for (int j = 0; j < repetitions; ++j) {
    const double w = problem.outcome_from_draw(truth, design, problem.noise_draw(rng));
    mean += (w - mean) / static_cast<double>(j + 1);
  }
  return mean;
}

Estimate estimate(const std::vector<double>& samples, double confidence) {
  Estimate e;
  e.count = samples.size();
  if (samples.empty()) return e;
  double mean = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) mean += (samples[i] - mean) / static_cast<double>(i + 1);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  e.mean = mean;
  e.stddev = samples.size() > 1 ? std::sqrt(ss / static_cast<double>(samples.size() - 1)) : 0.0;
  e.half_width = normal_quantile(0.5 * (1.0 + confidence)) * e.stddev / std::sqrt(static_cast<double>(samples.size()));
  return e;
}

EvaluationReport evaluate_policy(const PolicyConfig& policy, const Problem& problem, const EvaluationOptions& options,
                                 ObjectiveMode mode) {
  if (options.replications < 1) throw InputError("replications I must be >= 1", "replications");
  if (options.repetitions < 1) throw InputError("repetitions J must be >= 1", "repetitions");
  if (options.budget < 0) throw InputError("budget must be >= 0", "budget");
  if (!(options.confidence > 0 && options.confidence < 1)) throw InputError("confidence must lie in (0, 1)", "confidence");
  check_compatible(policy, problem.prior());

  const auto count = static_cast<std::size_t>(options.replications);
  EvaluationReport report;
  report.policy = policy.label();
  report.mode = mode;
  report.budget = options.budget;
  report.replications = options.replications;
  report.repetitions = options.repetitions;
  report.seed = options.seed;
  report.threshold = options.threshold;
  report.samples.resize(count);
  const auto kept = static_cast<std::size_t>(std::clamp(options.keep_traces, 0, options.replications));
  report.traces.resize(kept);

  parallel_for(count, options.parallel, [&](std::size_t i) {
    RandomStream truth_rng(derive_seed(options.seed, {i, kTruthStream}));
    RandomStream design_rng(derive_seed(options.seed, {i, kDesignStream}));
    EpisodeStreams streams{RandomStream(derive_seed(options.seed, {i, kNoiseStream})),
                           PolicyStreams(derive_seed(options.seed, {i, kPolicyStream}))};
    const TruthDraw truth = problem.sample_truth(truth_rng);
    std::function<void(int, double)> on_noise;
    if (options.noise_observer) on_noise = [&](int n, double d) { options.noise_observer(i, n, d); };
    EpisodeTrace trace = run_episode(policy, problem, options.budget, truth, streams, on_noise);

    ReplicationResult r;
    r.final_design = trace.final_design;
    r.final_value = estimate_design_value(trace.final_design, problem, truth, options.repetitions, design_rng);
    r.true_value = truth.mu[static_cast<Eigen::Index>(trace.final_design)];
    r.best_value = truth.mu.maxCoeff();
    r.opportunity_cost = r.best_value - r.true_value;
    r.cumulative_reward = trace.cumulative_reward;
    r.success = r.final_value >= options.threshold;
    report.samples[i] = r;
    if (i < kept) report.traces[i] = std::move(trace);
  });

  std::vector<double> values[5];
  for (const auto& r : report.samples) {
    values[0].push_back(r.final_value);
    values[1].push_back(r.cumulative_reward);
    values[2].push_back(r.opportunity_cost);
    values[3].push_back(r.true_value);
    values[4].push_back(r.success ? 1.0 : 0.0);
  }
  report.final_value = estimate(values[0], options.confidence);
  report.cumulative_reward = estimate(values[1], options.confidence);
  report.opportunity_cost = estimate(values[2], options.confidence);
  report.true_value = estimate(values[3], options.confidence);
  report.probability = estimate(values[4], options.confidence);
  return report;
}

EvaluationReport evaluate_final(const PolicyConfig& policy, const Problem& problem, const EvaluationOptions& options) {
  return evaluate_policy(policy, problem, options, ObjectiveMode::kFinal);
}

EvaluationReport evaluate_cumulative(const PolicyConfig& policy, const Problem& problem,
                                     const EvaluationOptions& options) {
  return evaluate_policy(policy, problem, options, ObjectiveMode::kCumulative);
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw InputError("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  double lo = 0.0;
  double hi = 1.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + b * width);
  for (double v : values) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
    b = std::clamp<std::ptrdiff_t>(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

RiskReport risk_probability(const PolicyConfig& policy, const Problem& problem, const EvaluationOptions& options,
                            int bins) {
  RiskReport out;
  out.report = evaluate_policy(policy, problem, options, ObjectiveMode::kFinal);
  std::vector<double> values;
  values.reserve(out.report.samples.size());
  for (const auto& r : out.report.samples) values.push_back(r.final_value);
  out.histogram = make_histogram(values, bins);
  return out;
}

double metric_value(const ReplicationResult& r, const std::string& metric) {
  if (metric == "final_value") return r.final_value;
  if (metric == "cumulative_reward") return r.cumulative_reward;
  if (metric == "opportunity_cost") return r.opportunity_cost;
  if (metric == "true_value") return r.true_value;
  if (metric == "probability") return r.success ? 1.0 : 0.0;
  throw InputError("unknown metric '" + metric + "'");
}

const Estimate& metric_estimate(const EvaluationReport& report, const std::string& metric) {
  if (metric == "final_value") return report.final_value;
  if (metric == "cumulative_reward") return report.cumulative_reward;
  if (metric == "opportunity_cost") return report.opportunity_cost;
  if (metric == "true_value") return report.true_value;
  if (metric == "probability") return report.probability;
  throw InputError("unknown metric '" + metric + "'");
}

Comparison compare_policies(const std::vector<PolicyConfig>& policies, const Problem& problem,
                            const EvaluationOptions& options, ObjectiveMode mode) {
  if (policies.size() < 2) throw InputError("comparison needs at least two policies", "policies");
  Comparison out;
  out.mode = mode;
  for (const auto& p : policies) out.reports.push_back(evaluate_policy(p, problem, options, mode));
  for (std::size_t a = 0; a < out.reports.size(); ++a) {
    for (std::size_t b = a + 1; b < out.reports.size(); ++b) {
      for (const auto& metric : kComparisonMetrics) {
        std::vector<double> diff;
        diff.reserve(out.reports[a].samples.size());
        for (std::size_t i = 0; i < out.reports[a].samples.size(); ++i) {
          diff.push_back(metric_value(out.reports[a].samples[i], metric) - metric_value(out.reports[b].samples[i], metric));
        }
        out.differences.push_back({out.reports[a].policy, out.reports[b].policy, metric, estimate(diff, options.confidence)});
      }
    }
  }
  return out;
}

TuneResult tune_policy(const PolicyConfig& family, const TuneGrid& grid, const Problem& problem,
                       const EvaluationOptions& options, ObjectiveMode mode) {
  if (grid.axes.empty()) throw InputError("tuning grid is empty", "tuning.grid");
  std::vector<std::pair<std::string, std::vector<double>>> axes(grid.axes.begin(), grid.axes.end());
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw InputError("tuning axis '" + name + "' has no values", "tuning.grid." + name);
  }
  TuneResult out;
  std::vector<std::size_t> idx(axes.size(), 0);
  bool done = false;
  while (!done) {
    PolicyConfig p = family;
    TunePoint point;
    std::string label = family.label() + "[";
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const double v = axes[a].second[idx[a]];
      set_tunable(p, axes[a].first, v);
      point.values[axes[a].first] = v;
      label += (a == 0 ? "" : ",") + axes[a].first + "=" + format_value(v);
    }
    p.id = label + "]";
    point.report = evaluate_policy(p, problem, options, mode);
    if (out.table.empty() || point.report.objective().mean > out.table[out.best].report.objective().mean) {
      out.best = out.table.size();
      out.best_policy = p;
    }
    out.table.push_back(std::move(point));
    std::size_t a = axes.size();
    done = true;
    while (a-- > 0) {
      if (++idx[a] < axes[a].second.size()) {
        done = false;
        break;
      }
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace optilearn
